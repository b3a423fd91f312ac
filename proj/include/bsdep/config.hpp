#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bsdep/girsanov.hpp"
#include "bsdep/inf_convolution.hpp"
#include "bsdep/solver.hpp"
#include "bsdep/validators.hpp"

namespace bsdep {

/// Schema/validation failure carrying one message per offending JSON path.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<std::string> errors)
        : std::runtime_error(join(errors)), errors_(std::move(errors)) {}

    const std::vector<std::string>& errors() const { return errors_; }

private:
    static std::string join(const std::vector<std::string>& errors) {
        std::string s = "config validation failed:";
        for (const auto& e : errors) s += "\n  " + e;
        return s;
    }
    std::vector<std::string> errors_;
};

enum class ExperimentKind { Solve, Picard, Minimal, Compare, Oracle, Validate, Infinite, Simulate };

ExperimentKind experiment_kind_from_string(const std::string& s);
std::string to_string(ExperimentKind k);

struct EnsembleConfig {
    int n_paths = 10000;
    int brownian_dim = 1;
    std::uint64_t seed = 12345;
};

struct SolverConfig {
    RegressionBasis basis;
    int implicit_iterations = 0;
    int picard_max_iter = 50;
    double picard_tol = 1e-10;

    SolverOptions options() const { return SolverOptions{basis, implicit_iterations}; }
};

/// Fully validated experiment description. `problem` is ready to solve;
/// oracle runs additionally carry the linear specification the generator was
/// derived from.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Solve;
    BSDEPProblem problem;
    std::optional<LinearBSDEPSpec> linear;
    std::optional<BSDEPProblem> problem2; // compare
    EnsembleConfig ensemble;
    SolverConfig solver;

    // kind-specific settings, all with documented defaults
    std::vector<int> n_list{2, 4, 8};  // minimal
    InfConvParams infconv;
    double infconv_rounding = 1e-9;
    SampleBox box;             // validate
    int sample_budget = 20000; // validate
    double validate_tol = 1e-9;
    std::string expect = "pass";      // validate: "pass" or "fail" (negative control)
    double slack_se_multiplier = 5.0; // compare
    bool negative_control = false;    // compare: swapped orientation check
    double se_multiplier = 3.0;       // statistical band for target checks
    double rel_tol = 0.01;            // relative part for closed-form targets
    double tolerance = 0.01;          // infinite-horizon convergence tolerance
    std::optional<double> y0_target;
    std::optional<double> z_mean_target;
    std::optional<double> infinite_target;
    double target_horizon = 0.0; // infinite: horizon at which the target is checked (0 = last)

    std::string out_dir = "out";
    nlohmann::json raw; // resolved config as parsed, echoed into the run directory
};

/// Parses and validates UTF-8 JSON text; throws ConfigError with one entry
/// per schema violation (unknown keys are rejected).
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig parse_config_json(const nlohmann::json& j);

} // namespace bsdep
