#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdep/array.hpp"
#include "bsdep/generator.hpp"
#include "bsdep/inf_convolution.hpp"
#include "bsdep/noise.hpp"
#include "bsdep/regression.hpp"

namespace bsdep {

/// Closed-form terminal functional: a sum of terms, each a constant, a
/// whitelisted transform of one Brownian terminal component, or a transform
/// of the jump count (all marks or one mark).
struct TerminalTerm {
    enum class Kind { Constant, Brownian, JumpCount };
    enum class GFn { Identity, Abs, Square, Sin };

    Kind kind = Kind::Constant;
    GFn g = GFn::Identity;
    double value = 0.0; // Constant
    double scale = 1.0;
    int component = 0; // Brownian component
    int mark = -1;     // JumpCount filter; -1 = all marks
};

struct TerminalSpec {
    std::vector<TerminalTerm> terms;

    static TerminalSpec constant(double v);
    static TerminalSpec brownian(int component = 0, double scale = 1.0,
                                 TerminalTerm::GFn g = TerminalTerm::GFn::Identity);
    static TerminalSpec jump_count(int mark = -1, double scale = 1.0,
                                   TerminalTerm::GFn g = TerminalTerm::GFn::Identity);

    double eval(const NoisePath& path, const TimeGrid& grid) const;
    /// Analytic upper bound on E[xi^2] (Minkowski across terms).
    double second_moment_bound(const TimeGrid& grid, const MarkSpace& marks) const;

    static TerminalSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Truncation schedule for problems posed on [0, inf).
struct TruncationSchedule {
    std::vector<double> horizons; // strictly increasing
    int steps_per_unit = 64;
    void validate() const;
};

enum class HorizonKind { Finite, TruncatedInfinite };

struct BSDEPProblem {
    TerminalSpec terminal;
    GeneratorSpec generator;
    TimeGrid grid{1.0, 50};
    MarkSpace marks;
    HorizonKind horizon_kind = HorizonKind::Finite;
    TruncationSchedule schedule;

    void validate(int brownian_dim) const;
};

struct SolutionMeta {
    std::size_t n_paths = 0;
    int n_steps = 0;
    int brownian_dim = 0;
    std::size_t n_marks = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;

    bool operator==(const SolutionMeta&) const = default;
};

struct SolverDiagnostics {
    double y0_se = 0.0;
    Array2D z_mean, z_se; // n_steps x d, raw-target statistics per node
    double max_condition = 0.0;
    double norm_s2_y = 0.0, norm_h2_z = 0.0, norm_l2_u = 0.0;
    double xi_second_moment_bound = 0.0;

    nlohmann::json to_json() const;
};

/// Per-path, per-node triple (Y, Z, U) plus the conditional-mean estimates
/// actually fed to the driver, and ensemble summaries. Y at the last node is
/// the terminal value, bit-exact per path.
struct BSDEPSolution {
    SolutionMeta meta;
    Array2D y;      // M x (N+1)
    Array2D y_cond; // M x N
    Array3D z;      // M x N x d
    Array3D u;      // M x N x m
    double y0 = 0.0;
    SolverDiagnostics diagnostics;
};

struct SolverOptions {
    RegressionBasis basis;
    /// Extra fixed-point sweeps on the driver's y-argument (0 = explicit).
    int implicit_iterations = 0;
};

/// Per-(step, path) driver evaluation; the default solver ignores `path` and
/// evaluates the problem's generator at the supplied arguments.
using DriverFn = std::function<double(int step, int path, double t, double y,
                                      std::span<const double> z, std::span<const double> u)>;

/// One backward least-squares pass with an arbitrary driver.
BSDEPSolution solve_backward_with_driver(const TerminalSpec& terminal, const DriverFn& driver,
                                         const PathEnsemble& ensemble,
                                         const SolverOptions& options);

BSDEPSolution solve_backward(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                             const SolverOptions& options);

struct PicardResult {
    BSDEPSolution solution;
    bool converged = false;
    int iterations = 0;
    std::vector<double> distance_trace; // B^2 distances of successive iterates
};

/// Picard iteration: each sweep solves the equation with the driver frozen
/// at the previous iterate's (y_cond, z, u), so the fixed point coincides
/// with the scheme solved by solve_backward.
PicardResult picard_solve(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                          const SolverOptions& options, int max_iter, double tol);

struct MinimalSolutionReport {
    std::vector<int> n_list;
    std::vector<double> y0s;
    std::vector<double> y0_ses;
    /// per consecutive pair: fraction of (path, node) entries with
    /// Y^{n_j} > Y^{n_{j+1}} + slack
    std::vector<double> mono_violation_fraction;
    double slack = 0.0;
    BSDEPSolution last;

    nlohmann::json to_json() const;
};

/// Solves the equation driven by f_n for each n (inf-convolution evaluation
/// with per-node caching) and reports the escalation.
MinimalSolutionReport minimal_solution(const BSDEPProblem& problem, const PathEnsemble& ensemble,
                                       const SolverOptions& options, std::span<const int> n_list,
                                       const InfConvParams& params,
                                       double inf_conv_rounding = 1e-9);

struct ComparisonReport {
    double slack = 0.0;
    double violation_fraction = 0.0;          // over all (path, node) pairs
    double interior_violation_fraction = 0.0; // nodes 0..N-1 (terminal excluded)
    double worst_violation = 0.0;
    std::vector<double> per_node_fraction;
    bool passed = false; // no violations at all

    nlohmann::json to_json() const;
};

/// Checks Y^1 <= Y^2 + slack pathwise; both solutions must come from the
/// same ensemble.
ComparisonReport compare_solutions(const BSDEPSolution& sol1, const BSDEPSolution& sol2,
                                   double slack);

struct ResidualReport {
    std::vector<double> mean; // per node
    std::vector<double> se;
    double worst_abs_mean = 0.0;
};

/// Residual of the discrete backward equation over each step when plugging
/// in the given arrays; `y_driver_args` supplies the y-argument fed to f.
ResidualReport backward_residual(const GeneratorSpec& generator, const PathEnsemble& ensemble,
                                 const Array2D& y, const Array2D& y_driver_args, const Array3D& z,
                                 const Array3D& u);

ResidualReport backward_residual(const BSDEPProblem& problem, const BSDEPSolution& solution,
                                 const PathEnsemble& ensemble);

struct TruncationReport {
    std::vector<double> horizons;
    std::vector<double> y0s;
    std::vector<double> y0_ses;
    std::vector<double> diffs; // successive |y0_{j+1} - y0_j|
    std::vector<double> tails; // (A4) tail integral at each horizon
    double tol = 0.0;
    bool converged = false;
    BSDEPSolution last; // solution at the final truncation

    nlohmann::json to_json() const;
};

/// Truncated-infinite-horizon sweep: solves at each horizon of the schedule
/// on a fresh ensemble drawn with the same seed (counter-based substreams
/// make the shared time range identical across truncations) and certifies
/// convergence by successive differences plus the (A4) tail integral.
TruncationReport solve_infinite_horizon(const BSDEPProblem& problem, int n_paths,
                                        int brownian_dim, std::uint64_t seed,
                                        const SolverOptions& options, double tol);

} // namespace bsdep
