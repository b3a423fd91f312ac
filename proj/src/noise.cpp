#include "bsdep/noise.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bsdep/philox.hpp"

namespace bsdep {

namespace {

// Stream ids within a path substream: 0 = Brownian, 1 + i = jumps of mark i.
constexpr std::uint32_t kBrownianStream = 0;

NoisePath sample_path(const TimeGrid& grid, const MarkSpace& marks, int d, std::uint64_t seed,
                      std::uint32_t path_index) {
    NoisePath path;
    path.dw = Array2D(grid.n_steps(), d);
    const double sqrt_dt = std::sqrt(grid.dt());

    CounterRng brownian(seed, path_index, kBrownianStream);
    for (int k = 0; k < grid.n_steps(); ++k)
        for (int j = 0; j < d; ++j) path.dw(k, j) = sqrt_dt * brownian.next_normal();

    for (std::size_t i = 0; i < marks.size(); ++i) {
        CounterRng rng(seed, path_index, static_cast<std::uint32_t>(1 + i));
        double t = rng.next_exponential(marks.intensity(i));
        while (t <= grid.horizon()) {
            path.jumps.push_back({t, static_cast<int>(i)});
            t += rng.next_exponential(marks.intensity(i));
        }
    }
    std::sort(path.jumps.begin(), path.jumps.end(), [](const JumpEvent& a, const JumpEvent& b) {
        return a.time != b.time ? a.time < b.time : a.mark < b.mark;
    });
    return path;
}

} // namespace

PathEnsemble sample_ensemble(const TimeGrid& grid, const MarkSpace& marks, int brownian_dim,
                             int n_paths, std::uint64_t seed) {
    if (n_paths < 1) throw std::invalid_argument("sample_ensemble: n_paths must be >= 1");
    if (brownian_dim < 1) throw std::invalid_argument("sample_ensemble: brownian_dim must be >= 1");

    PathEnsemble ens{grid, marks, brownian_dim, seed, std::string(kSubstreamScheme), {}};
    ens.paths.reserve(static_cast<std::size_t>(n_paths));
    for (int p = 0; p < n_paths; ++p)
        ens.paths.push_back(
            sample_path(grid, marks, brownian_dim, seed, static_cast<std::uint32_t>(p)));
    return ens;
}

double compensated_integral(const NoisePath& path, const TimeGrid& grid, const MarkSpace& marks,
                            const std::function<double(double, double)>& integrand, double up_to) {
    if (!(up_to > 0.0) || up_to > grid.horizon())
        throw std::invalid_argument("compensated_integral: up_to must lie in (0, T]");

    double jump_sum = 0.0;
    for (const auto& ev : path.jumps) {
        if (ev.time > up_to) break;
        jump_sum += integrand(ev.time, marks.mark(ev.mark));
    }

    double compensator = 0.0;
    for (int k = 0; k < grid.n_steps(); ++k) {
        const double t0 = grid.node(k);
        if (t0 >= up_to) break;
        const double width = std::min(grid.node(k + 1), up_to) - t0;
        double level = 0.0;
        for (std::size_t i = 0; i < marks.size(); ++i)
            level += integrand(t0, marks.mark(i)) * marks.intensity(i);
        compensator += level * width;
    }
    return jump_sum - compensator;
}

double estimate_norm_s2(const Array2D& values) {
    double acc = 0.0;
    for (std::size_t p = 0; p < values.rows(); ++p) {
        double sup = 0.0;
        for (std::size_t k = 0; k < values.cols(); ++k)
            sup = std::max(sup, values(p, k) * values(p, k));
        acc += sup;
    }
    return acc / static_cast<double>(values.rows());
}

double estimate_norm_h2(const Array2D& values, double dt) {
    double acc = 0.0;
    for (std::size_t p = 0; p < values.rows(); ++p)
        for (std::size_t k = 0; k < values.cols(); ++k) acc += values(p, k) * values(p, k) * dt;
    return acc / static_cast<double>(values.rows());
}

double estimate_norm_h2(const Array3D& values, double dt) {
    double acc = 0.0;
    for (std::size_t p = 0; p < values.dim0(); ++p)
        for (std::size_t k = 0; k < values.dim1(); ++k)
            for (std::size_t j = 0; j < values.dim2(); ++j)
                acc += values(p, k, j) * values(p, k, j) * dt;
    return acc / static_cast<double>(values.dim0());
}

double estimate_norm_l2_jump(const Array3D& values, const MarkSpace& marks, double dt) {
    if (values.dim2() != marks.size())
        throw std::invalid_argument("estimate_norm_l2_jump: mark dimension mismatch");
    double acc = 0.0;
    for (std::size_t p = 0; p < values.dim0(); ++p)
        for (std::size_t k = 0; k < values.dim1(); ++k)
            for (std::size_t i = 0; i < marks.size(); ++i)
                acc += values(p, k, i) * values(p, k, i) * marks.intensity(i) * dt;
    return acc / static_cast<double>(values.dim0());
}

} // namespace bsdep
