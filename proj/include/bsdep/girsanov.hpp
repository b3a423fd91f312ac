#pragma once

#include <vector>

#include <json.hpp>

#include "bsdep/array.hpp"
#include "bsdep/generator.hpp"
#include "bsdep/mark_function.hpp"
#include "bsdep/noise.hpp"
#include "bsdep/regression.hpp"
#include "bsdep/solver.hpp"
#include "bsdep/time_function.hpp"

namespace bsdep {

/// Data of a square-integrable martingale used as a measure change:
/// M = int theta dW + int upsilon dmu~ with bounded theta and
/// upsilon > -1, |upsilon| <= C (1 ^ |e|).
struct ExponentialMartingaleSpec {
    std::vector<TimeFunction> theta; // one per Brownian component
    MarkFunction upsilon = MarkFunction::constant(0.0);
    double theta_bound = 1e6; // declared uniform bound on |theta_t|
    double upsilon_c = 1e6;   // declared C in |upsilon| <= C (1 ^ |e|)

    /// Checks the declared bounds at every grid node and mark; returns the
    /// positivity margin min over (t, e) of 1 + upsilon (must be > 0).
    double validate(const TimeGrid& grid, const MarkSpace& marks) const;

    static ExponentialMartingaleSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Doleans-Dade exponential of the spec's martingale along one path, in the
/// product form
///   exp(sum theta.dW - 1/2 sum |theta|^2 dt)
///   * exp(-sum upsilon lambda dt) * prod over jumps (1 + upsilon)
/// which is algebraically the same as exp(M_T - <M^c>/2) prod (1+dM) e^{-dM}
/// for compensated-jump martingales but avoids the cancellation between the
/// jump part of M_T and the e^{-dM} factors. Strictly positive for
/// upsilon > -1.
double doleans_dade(const NoisePath& path, const TimeGrid& grid, const MarkSpace& marks,
                    const ExponentialMartingaleSpec& spec);

struct WeightsReport {
    std::vector<double> weights;
    double mean = 0.0;
    double se = 0.0;  // standard error of the mean
    double ess = 0.0; // effective sample size (sum w)^2 / sum w^2

    nlohmann::json to_json() const;
};

WeightsReport girsanov_weights(const PathEnsemble& ensemble,
                               const ExponentialMartingaleSpec& spec);

/// Linear driver phi_t + a_t y + b_t . z + int alpha_t(e) u(e) lambda(de),
/// whose solution has the closed representation
///   Y_t = E~[ xi Gamma_T / Gamma_t + int_t^T phi_s Gamma_s / Gamma_t ds | F_t ]
/// under the measure tilted by the (b, alpha) exponential, with the discount
/// Gamma_t = exp(int_0^t a).
struct LinearBSDEPSpec {
    TimeFunction a = TimeFunction::constant(0.0);
    std::vector<TimeFunction> b; // one per Brownian component
    MarkFunction alpha = MarkFunction::constant(0.0);
    TimeFunction phi = TimeFunction::constant(0.0);
    TerminalSpec terminal = TerminalSpec::constant(0.0);

    void validate(const TimeGrid& grid, const MarkSpace& marks) const;

    /// The driver as an expression tree, for solving the same problem with
    /// the regression solver.
    GeneratorSpec to_generator(const TimeGrid& grid, const MarkSpace& marks, int brownian_dim,
                               double c_bound = 0.0) const;

    static LinearBSDEPSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct LinearRepresentation {
    double value = 0.0;
    double se = 0.0; // delta-method standard error of the weighted mean
    WeightsReport weights;
};

/// Regression-free evaluation of the representation at t = 0: the
/// self-normalized weighted ensemble average of xi Gamma_T + quadrature of
/// phi Gamma.
LinearRepresentation linear_representation(const LinearBSDEPSpec& spec,
                                           const PathEnsemble& ensemble);

/// Conditional version at an interior node (> 0): per-path estimates of
/// Y_{t_k} via the ratio of two regressions of weighted payloads.
std::vector<double> linear_representation_at_node(const LinearBSDEPSpec& spec,
                                                  const PathEnsemble& ensemble, int node,
                                                  const RegressionBasis& basis);

/// Difference-quotient processes between two solutions under a driver f1:
///   dy = (f1(Y1,Z1,U1) - f1(Y2,Z1,U1)) / (Y1-Y2)          when Y1 != Y2
///   dz_j: same with only component j of Z swapped
///   du_i: same with only mark i of U swapped, divided additionally by
///         lambda_i so that affine drivers int alpha u dlambda recover alpha
/// with every 0/0 mapped to 0.
struct DeltaQuotients {
    Array2D dy; // M x N
    Array3D dz; // M x N x d
    Array3D du; // M x N x m

    double dy_worst_margin = 0.0; // max |dy| - gamma(t)
    double dz_worst_margin = 0.0; // max |dz| - rho(t)
    double du_min = 0.0;          // must stay > -1
    double du_worst_margin = 0.0; // max |du| - sigma(t) C (1 ^ |e|), needs a kernel
    bool bounds_ok = false;

    nlohmann::json to_json() const;
};

DeltaQuotients delta_quotients(const BSDEPSolution& sol1, const BSDEPSolution& sol2,
                               const GeneratorSpec& f1, const PathEnsemble& ensemble);

} // namespace bsdep
