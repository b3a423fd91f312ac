#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdep/generator.hpp"
#include "bsdep/grid.hpp"

namespace bsdep {

/// Axis-aligned sampling region for validators: ranges for t, y, each z
/// component and each u component.
struct SampleBox {
    std::array<double, 2> t{0.0, 1.0};
    std::array<double, 2> y{-1.0, 1.0};
    std::array<double, 2> z{-1.0, 1.0};
    std::array<double, 2> u{-1.0, 1.0};

    void validate() const;

    static SampleBox from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// A concrete sampled pair that violates (or extremizes) the checked
/// inequality; every FAIL ships one, re-checkable through eval_generator.
struct Witness {
    double t = 0.0;
    double y = 0.0, y2 = 0.0;
    std::vector<double> z, z2;
    std::vector<double> u, u2;
    double lhs = 0.0, rhs = 0.0;

    nlohmann::json to_json() const;
};

/// Outcome of a sampled-inequality validator. A FAIL is a proof of
/// violation (the witness re-evaluates to one); a PASS is only evidence.
struct ValidationReport {
    std::string name;
    bool passed = false;
    double worst = 0.0; // worst ratio (A2) or worst inequality margin
    double tol = 0.0;
    int n_samples = 0;
    std::optional<Witness> witness;

    nlohmann::json to_json() const;
};

/// (A2): |f(t,y,z,u) - f(t,y',z',u)| <= gamma(t)|y-y'| + rho(t)|z-z'|.
/// Reports the worst observed ratio; PASS iff worst <= 1 + tol.
ValidationReport validate_lipschitz_A2(const GeneratorSpec& spec, const MarkSpace& marks,
                                       int brownian_dim, const SampleBox& box, int sample_budget,
                                       double tol = 1e-9, std::uint64_t seed = 0);

/// (A3)/(H2.3): f(t,y,z,u) - f(t,y,z,u') <= sigma(t) * sum (u-u') beta lambda,
/// checked in both argument orders. PASS iff the worst margin <= tol.
ValidationReport validate_jump_monotone_A3(const GeneratorSpec& spec, const MarkSpace& marks,
                                           int brownian_dim, const SampleBox& box,
                                           int sample_budget, double tol = 1e-9,
                                           std::uint64_t seed = 0);

/// (H2.1): (y-y')(f(t,y,..) - f(t,y',..)) <= |y-y'| gamma(t) varrho(|y-y'|).
ValidationReport validate_weak_monotone_H2(const GeneratorSpec& spec, const MarkSpace& marks,
                                           int brownian_dim, const SampleBox& box,
                                           int sample_budget, double tol = 1e-9,
                                           std::uint64_t seed = 0);

/// (H1.2): |f(t,y,z,u)| <= f_t + gamma|y| + rho|z| + sigma|u|.
ValidationReport validate_growth_H1(const GeneratorSpec& spec, const MarkSpace& marks,
                                    int brownian_dim, const SampleBox& box, int sample_budget,
                                    double tol = 1e-9, std::uint64_t seed = 0);

/// Bound used by the comparison machinery: for nondecreasing Psi with
/// Psi(x) <= K (x + 1) and n >= 2K, checks Psi(x) <= n x + Psi(2K/n) at the
/// given sample points.
struct PhiBoundReport {
    bool passed = false;
    double worst_margin = 0.0; // max of Psi(x) - n x - Psi(2K/n)
    double worst_x = 0.0;
    int n_samples = 0;
};

PhiBoundReport lemma_phi_bound(const std::function<double(double)>& psi, double growth_k, int n,
                               std::span<const double> x_samples);

} // namespace bsdep
