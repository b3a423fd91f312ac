#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "bsdep/generator.hpp"
#include "bsdep/validators.hpp"

namespace bsdep {

/// Deterministic coarse-to-fine search parameters for the approximate
/// infimum. With search_box_radius <= 0 the radius is derived from the
/// growth bound as (2 B + 1) / n with B = f_t + gamma|y| + rho|z| + sigma|u|;
/// any minimizer farther than that is dominated by the query point itself.
struct InfConvParams {
    double search_box_radius = 0.0;
    int coarse_points_per_axis = 9;
    int refinement_rounds = 4;

    void validate() const;
    static InfConvParams from_json(const nlohmann::json& j);
};

/// Lipschitz lower approximation f_n of a driver: the minimum over a
/// deterministic candidate set of f(t,y',z',u') + n (|y-y'| + |z-z'|_2 +
/// |u-u'|_lambda). The query point is always a candidate, so
/// inf_convolution <= eval_generator holds exactly at every evaluated point.
struct LipschitzApprox {
    const GeneratorSpec* base = nullptr;
    int n = 1;
    InfConvParams params;
};

double inf_convolution(const LipschitzApprox& approx, double t, double y,
                       std::span<const double> z, std::span<const double> u,
                       const MarkSpace& marks);

/// Evaluates f_n for every n in n_list over one shared candidate set (the
/// union of the per-n searches), so the returned values are exactly
/// nondecreasing in n and exactly dominated by f.
std::vector<double> inf_convolution_multi(const GeneratorSpec& spec, std::span<const int> n_list,
                                          const InfConvParams& params, double t, double y,
                                          std::span<const double> z, std::span<const double> u,
                                          const MarkSpace& marks);

/// Memoizing wrapper used by the minimal-solution driver: results are cached
/// per time node with arguments quantized to `rounding` (the induced error is
/// at most n (gamma + rho + sigma) * rounding per axis).
class CachedInfConvolution {
public:
    CachedInfConvolution(const GeneratorSpec& spec, int n, InfConvParams params,
                         double rounding = 1e-9)
        : approx_{&spec, n, params}, rounding_(rounding) {}

    double eval(int time_index, double t, double y, std::span<const double> z,
                std::span<const double> u, const MarkSpace& marks);

    std::size_t cache_size() const { return cache_.size(); }

private:
    LipschitzApprox approx_;
    double rounding_;
    std::unordered_map<std::string, double> cache_;
};

/// Sampled property report for the f_n sequence: growth envelope,
/// domination f_n <= f, exact monotonicity in n, sup-gap decrease, and the
/// finite-difference Lipschitz bound n (gamma |dy| + rho |dz| + sigma |du|).
struct FnPropertyReport {
    std::vector<int> n_list;
    int n_points = 0;

    bool growth_ok = false;
    double growth_worst = 0.0; // max |f_n| - envelope
    bool dominated_ok = false;
    double dominated_worst = 0.0; // max f_n - f
    bool monotone_ok = false;
    double monotone_worst = 0.0; // max f_{n_j} - f_{n_{j+1}}
    std::vector<double> sup_gap; // per n: max f - f_n over samples
    bool gap_decreasing_ok = false;
    double final_gap = 0.0;
    bool gap_tol_ok = true; // only meaningful with declared_lipschitz > 0
    bool lipschitz_ok = false;
    double lipschitz_worst = 0.0; // max |df_n| - n (1+tol) (gamma|dy|+rho|dz|+sigma|du|)
    int n_pairs = 0;

    bool all_passed() const {
        return growth_ok && dominated_ok && monotone_ok && gap_decreasing_ok && gap_tol_ok &&
               lipschitz_ok;
    }
    nlohmann::json to_json() const;
};

FnPropertyReport check_fn_properties(const GeneratorSpec& spec, const MarkSpace& marks,
                                     int brownian_dim, std::span<const int> n_list,
                                     const SampleBox& box, int sample_budget,
                                     const InfConvParams& params, double tol = 1e-2,
                                     double declared_lipschitz = 0.0, double grid_tol = 1e-3,
                                     std::uint64_t seed = 0);

} // namespace bsdep
