#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bsdep/array.hpp"
#include "bsdep/grid.hpp"

namespace bsdep {

struct JumpEvent {
    double time;
    int mark; // index into the MarkSpace
};

/// One realization of the driving noise: Brownian increments per step and
/// the marked jump events, with exact (off-grid) jump times.
struct NoisePath {
    Array2D dw;                   // n_steps x d
    std::vector<JumpEvent> jumps; // sorted by time, times in (0, T]

    /// W_T component j (sum of all increments).
    double terminal_brownian(std::size_t j) const {
        double w = 0.0;
        for (std::size_t k = 0; k < dw.rows(); ++k) w += dw(k, j);
        return w;
    }
    /// Number of jumps with time <= t (all marks, or one mark if mark >= 0).
    int jump_count_up_to(double t, int mark = -1) const {
        int n = 0;
        for (const auto& ev : jumps) {
            if (ev.time > t) break;
            if (mark < 0 || ev.mark == mark) ++n;
        }
        return n;
    }
};

/// Monte-Carlo ensemble of noise paths sharing one grid and mark space.
/// Regeneration from (seed, scheme, n_paths) is bit-identical.
struct PathEnsemble {
    TimeGrid grid;
    MarkSpace marks;
    int brownian_dim = 1;
    std::uint64_t seed = 0;
    std::string scheme;
    std::vector<NoisePath> paths;

    std::size_t n_paths() const { return paths.size(); }
    bool compatible_with(const PathEnsemble& o) const {
        return grid == o.grid && marks == o.marks && brownian_dim == o.brownian_dim &&
               seed == o.seed && paths.size() == o.paths.size();
    }
};

/// Draws n_paths independent paths: Gaussian increments of variance dt per
/// component and, per mark, an exact Poisson stream of rate lambda_i
/// (exponential interarrivals). Path substreams are counter-based, so the
/// result does not depend on generation order.
PathEnsemble sample_ensemble(const TimeGrid& grid, const MarkSpace& marks, int brownian_dim,
                             int n_paths, std::uint64_t seed);

/// Discrete realization of the integral of `integrand` against the
/// compensated measure up to `up_to`: jump sum at exact jump times minus
/// left-endpoint quadrature of the compensator on the grid.
double compensated_integral(const NoisePath& path, const TimeGrid& grid, const MarkSpace& marks,
                            const std::function<double(double, double)>& integrand, double up_to);

enum class NormKind { S2, H2, L2Jump };

/// Squared S2 norm estimate: ensemble mean of sup over nodes of value^2.
/// values is n_paths x n_nodes.
double estimate_norm_s2(const Array2D& values);

/// Squared H2 norm estimate: ensemble mean of left-endpoint quadrature of
/// |value|^2 dt. values is n_paths x n_steps (x d for the vector version).
double estimate_norm_h2(const Array2D& values, double dt);
double estimate_norm_h2(const Array3D& values, double dt);

/// Squared L2(mu~) norm estimate: as H2 with the inner sum of
/// value(e_i)^2 lambda_i. values is n_paths x n_steps x n_marks.
double estimate_norm_l2_jump(const Array3D& values, const MarkSpace& marks, double dt);

} // namespace bsdep
