#include "bsdep/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "bsdep/io.hpp"

namespace bsdep {

namespace fs = std::filesystem;

namespace {

constexpr double kAbsFloor = 1e-10; // covers SE = 0 deterministic cases in floating point

double pooled_se(double a, double b) { return std::sqrt(a * a + b * b); }

struct Run {
    const ExperimentConfig& cfg;
    fs::path dir;
    std::vector<std::string> outputs;
    std::vector<CheckResult> checks;
    nlohmann::json summary;

    explicit Run(const ExperimentConfig& c) : cfg(c), dir(c.out_dir) {}

    void add_check(const std::string& name, bool passed, double value, double tolerance) {
        checks.push_back({name, passed, value, tolerance});
    }

    /// |value - target| <= rel_tol |target| + se_mult * se + floor
    void target_check(const std::string& name, double value, double target, double se,
                      double rel_tol) {
        const double tol = rel_tol * std::abs(target) + cfg.se_multiplier * se + kAbsFloor;
        add_check(name, std::abs(value - target) <= tol, std::abs(value - target), tol);
    }

    void write(const std::string& filename, const std::string& content) {
        write_file_atomic(dir / filename, content);
        outputs.push_back(filename);
    }
    void write_json(const std::string& filename, const nlohmann::json& j) {
        write(filename, j.dump(2) + "\n");
    }
};

void check_terminal_exact(Run& run, const BSDEPProblem& problem, const PathEnsemble& ens,
                          const BSDEPSolution& sol) {
    double worst = 0.0;
    const std::size_t n = static_cast<std::size_t>(sol.meta.n_steps);
    for (std::size_t p = 0; p < ens.n_paths(); ++p)
        worst = std::max(worst,
                         std::abs(sol.y(p, n) - problem.terminal.eval(ens.paths[p], ens.grid)));
    run.add_check("terminal_exact", worst == 0.0, worst, 0.0);
}

void y0_target_checks(Run& run, const std::string& name, double y0, double se) {
    if (run.cfg.y0_target)
        run.target_check(name, y0, *run.cfg.y0_target, se, run.cfg.rel_tol);
}

void z_mean_checks(Run& run, const BSDEPSolution& sol) {
    if (!run.cfg.z_mean_target) return;
    const double target = *run.cfg.z_mean_target;
    double worst_dev = 0.0, tol_at_worst = 0.0;
    bool ok = true;
    for (std::size_t k = 0; k < sol.diagnostics.z_mean.rows(); ++k)
        for (std::size_t j = 0; j < sol.diagnostics.z_mean.cols(); ++j) {
            const double dev = std::abs(sol.diagnostics.z_mean(k, j) - target);
            const double tol =
                run.cfg.se_multiplier * sol.diagnostics.z_se(k, j) + kAbsFloor;
            if (dev > tol) ok = false;
            if (dev > worst_dev) {
                worst_dev = dev;
                tol_at_worst = tol;
            }
        }
    run.add_check("z_mean_all_nodes", ok, worst_dev, tol_at_worst);
}

nlohmann::json solution_summary(const BSDEPSolution& sol) {
    nlohmann::json j{{"y0", sol.y0}, {"diagnostics", sol.diagnostics.to_json()}};
    nlohmann::json z_mean = nlohmann::json::array(), z_se = nlohmann::json::array();
    for (std::size_t k = 0; k < sol.diagnostics.z_mean.rows(); ++k) {
        nlohmann::json row_m = nlohmann::json::array(), row_s = nlohmann::json::array();
        for (std::size_t c = 0; c < sol.diagnostics.z_mean.cols(); ++c) {
            row_m.push_back(sol.diagnostics.z_mean(k, c));
            row_s.push_back(sol.diagnostics.z_se(k, c));
        }
        z_mean.push_back(row_m);
        z_se.push_back(row_s);
    }
    j["z_mean"] = z_mean;
    j["z_se"] = z_se;
    return j;
}

void run_solve(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    const BSDEPSolution sol = solve_backward(run.cfg.problem, ens, run.cfg.solver.options());
    check_terminal_exact(run, run.cfg.problem, ens, sol);
    y0_target_checks(run, "y0_target", sol.y0, sol.diagnostics.y0_se);
    z_mean_checks(run, sol);
    write_solution_csv(run.dir / "solution.csv", sol);
    run.outputs.push_back("solution.csv");
    run.summary["solution"] = solution_summary(sol);
}

void run_picard(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    const BSDEPSolution backward =
        solve_backward(run.cfg.problem, ens, run.cfg.solver.options());
    const PicardResult picard =
        picard_solve(run.cfg.problem, ens, run.cfg.solver.options(),
                     run.cfg.solver.picard_max_iter, run.cfg.solver.picard_tol);

    run.add_check("picard_converged", picard.converged, picard.converged ? 1.0 : 0.0, 1.0);
    const double pooled =
        pooled_se(backward.diagnostics.y0_se, picard.solution.diagnostics.y0_se);
    const double tol = run.cfg.se_multiplier * pooled + kAbsFloor;
    run.add_check("picard_backward_agree",
                  std::abs(backward.y0 - picard.solution.y0) <= tol,
                  std::abs(backward.y0 - picard.solution.y0), tol);
    y0_target_checks(run, "y0_target_backward", backward.y0, backward.diagnostics.y0_se);
    y0_target_checks(run, "y0_target_picard", picard.solution.y0,
                     picard.solution.diagnostics.y0_se);

    write_solution_csv(run.dir / "solution.csv", picard.solution);
    run.outputs.push_back("solution.csv");
    run.summary["backward"] = solution_summary(backward);
    run.summary["picard"] = {{"converged", picard.converged},
                             {"iterations", picard.iterations},
                             {"distance_trace", picard.distance_trace},
                             {"y0", picard.solution.y0}};
}

void run_oracle(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    const BSDEPSolution sol = solve_backward(run.cfg.problem, ens, run.cfg.solver.options());
    const LinearRepresentation oracle = linear_representation(*run.cfg.linear, ens);

    const double pooled = pooled_se(sol.diagnostics.y0_se, oracle.se);
    const double tol = run.cfg.se_multiplier * pooled + kAbsFloor;
    run.add_check("oracle_agree", std::abs(sol.y0 - oracle.value) <= tol,
                  std::abs(sol.y0 - oracle.value), tol);
    y0_target_checks(run, "y0_target_solver", sol.y0, sol.diagnostics.y0_se);
    y0_target_checks(run, "y0_target_oracle", oracle.value, oracle.se);

    write_solution_csv(run.dir / "solution.csv", sol);
    run.outputs.push_back("solution.csv");
    write_weights_csv(run.dir / "weights.csv", oracle.weights);
    run.outputs.push_back("weights.csv");
    run.summary["solver"] = solution_summary(sol);
    run.summary["oracle"] = {{"value", oracle.value},
                             {"se", oracle.se},
                             {"weights", oracle.weights.to_json()}};
}

void run_compare(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    const BSDEPSolution sol1 = solve_backward(run.cfg.problem, ens, run.cfg.solver.options());
    const BSDEPSolution sol2 = solve_backward(*run.cfg.problem2, ens, run.cfg.solver.options());

    const double slack =
        run.cfg.slack_se_multiplier *
            pooled_se(sol1.diagnostics.y0_se, sol2.diagnostics.y0_se) +
        kAbsFloor;
    const ComparisonReport rep = run.cfg.negative_control
                                     ? compare_solutions(sol2, sol1, slack)
                                     : compare_solutions(sol1, sol2, slack);
    if (run.cfg.negative_control)
        run.add_check("negative_control", rep.interior_violation_fraction >= 0.99,
                      rep.interior_violation_fraction, 0.99);
    else
        run.add_check("comparison_pass", rep.passed, rep.violation_fraction, 0.0);

    write_solution_csv(run.dir / "solution.csv", sol1);
    run.outputs.push_back("solution.csv");
    write_solution_csv(run.dir / "solution2.csv", sol2);
    run.outputs.push_back("solution2.csv");
    run.summary["comparison"] = rep.to_json();
}

void run_minimal(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    const MinimalSolutionReport rep =
        minimal_solution(run.cfg.problem, ens, run.cfg.solver.options(), run.cfg.n_list,
                         run.cfg.infconv, run.cfg.infconv_rounding);

    double worst = 0.0;
    for (double f : rep.mono_violation_fraction) worst = std::max(worst, f);
    run.add_check("minimal_monotone", worst == 0.0, worst, 0.0);
    if (run.cfg.y0_target)
        for (std::size_t j = 0; j < rep.n_list.size(); ++j)
            run.target_check("minimal_y0_n" + std::to_string(rep.n_list[j]), rep.y0s[j],
                             *run.cfg.y0_target, rep.y0_ses[j], run.cfg.rel_tol);

    write_solution_csv(run.dir / "solution.csv", rep.last);
    run.outputs.push_back("solution.csv");
    run.summary["minimal"] = rep.to_json();
}

void run_infinite(Run& run) {
    const TruncationReport rep = solve_infinite_horizon(
        run.cfg.problem, run.cfg.ensemble.n_paths, run.cfg.ensemble.brownian_dim,
        run.cfg.ensemble.seed, run.cfg.solver.options(), run.cfg.tolerance);
    run.add_check("truncation_converged", rep.converged, rep.converged ? 1.0 : 0.0, 1.0);
    if (run.cfg.infinite_target) {
        std::size_t idx = rep.horizons.size() - 1;
        if (run.cfg.target_horizon > 0.0)
            for (std::size_t j = 0; j < rep.horizons.size(); ++j)
                if (rep.horizons[j] == run.cfg.target_horizon) idx = j;
        run.target_check("infinite_target", rep.y0s[idx], *run.cfg.infinite_target,
                         rep.y0_ses[idx], run.cfg.rel_tol);
    }
    write_solution_csv(run.dir / "solution.csv", rep.last);
    run.outputs.push_back("solution.csv");
    run.summary["truncation"] = rep.to_json();
}

void run_validate(Run& run) {
    const GeneratorSpec& gen = run.cfg.problem.generator;
    const MarkSpace& marks = run.cfg.problem.marks;
    const int d = run.cfg.ensemble.brownian_dim;

    std::vector<ValidationReport> reports;
    switch (gen.assumption_class) {
    case AssumptionClass::A:
        reports.push_back(validate_lipschitz_A2(gen, marks, d, run.cfg.box,
                                                run.cfg.sample_budget, run.cfg.validate_tol,
                                                run.cfg.ensemble.seed));
        if (gen.kernel)
            reports.push_back(validate_jump_monotone_A3(gen, marks, d, run.cfg.box,
                                                        run.cfg.sample_budget,
                                                        run.cfg.validate_tol,
                                                        run.cfg.ensemble.seed));
        break;
    case AssumptionClass::H1:
        reports.push_back(validate_growth_H1(gen, marks, d, run.cfg.box, run.cfg.sample_budget,
                                             run.cfg.validate_tol, run.cfg.ensemble.seed));
        break;
    case AssumptionClass::H2:
    case AssumptionClass::H3:
        reports.push_back(validate_weak_monotone_H2(gen, marks, d, run.cfg.box,
                                                    run.cfg.sample_budget, run.cfg.validate_tol,
                                                    run.cfg.ensemble.seed));
        if (gen.kernel)
            reports.push_back(validate_jump_monotone_A3(gen, marks, d, run.cfg.box,
                                                        run.cfg.sample_budget,
                                                        run.cfg.validate_tol,
                                                        run.cfg.ensemble.seed));
        break;
    }

    const bool expect_fail = run.cfg.expect == "fail";
    nlohmann::json rep_json = nlohmann::json::array();
    for (const auto& rep : reports) {
        rep_json.push_back(rep.to_json());
        const bool ok = expect_fail ? !rep.passed : rep.passed;
        run.add_check("validate_" + rep.name, ok, rep.worst, rep.tol);
    }
    run.summary["validators"] = rep_json;
    run.summary["expect"] = run.cfg.expect;
}

void run_simulate(Run& run) {
    const auto ens = sample_ensemble(run.cfg.problem.grid, run.cfg.problem.marks,
                                     run.cfg.ensemble.brownian_dim, run.cfg.ensemble.n_paths,
                                     run.cfg.ensemble.seed);
    write_ensemble_csvs(run.dir, ens);
    run.outputs.push_back("paths.csv");
    run.outputs.push_back("jumps.csv");
    run.summary["ensemble"] = {{"n_paths", ens.n_paths()},
                               {"scheme", ens.scheme},
                               {"seed", ens.seed}};
}

} // namespace

nlohmann::json RunManifest::to_json() const {
    nlohmann::json checks_json = nlohmann::json::array();
    for (const auto& c : checks) checks_json.push_back(c.to_json());
    return {{"config_hash", config_hash},
            {"seed", seed},
            {"artifact_version", artifact_version},
            {"wall_clock_seconds", wall_clock_seconds},
            {"outputs", outputs},
            {"checks", checks_json},
            {"all_passed", all_passed()}};
}

RunManifest run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    fs::create_directories(config.out_dir);

    Run run(config);
    try {
        switch (config.kind) {
        case ExperimentKind::Solve:
            run_solve(run);
            break;
        case ExperimentKind::Picard:
            run_picard(run);
            break;
        case ExperimentKind::Oracle:
            run_oracle(run);
            break;
        case ExperimentKind::Compare:
            run_compare(run);
            break;
        case ExperimentKind::Minimal:
            run_minimal(run);
            break;
        case ExperimentKind::Infinite:
            run_infinite(run);
            break;
        case ExperimentKind::Validate:
            run_validate(run);
            break;
        case ExperimentKind::Simulate:
            run_simulate(run);
            break;
        }

        RunManifest manifest;
        manifest.config_hash = fnv1a_hex(config.raw.dump());
        manifest.seed = config.ensemble.seed;

        run.write_json("config.json", config.raw);
        nlohmann::json checks_json = nlohmann::json::array();
        for (const auto& c : run.checks) checks_json.push_back(c.to_json());
        run.summary["checks"] = checks_json;
        run.summary["kind"] = to_string(config.kind);
        run.write_json("summary.json", run.summary);

        manifest.outputs = run.outputs;
        manifest.outputs.push_back("manifest.json");
        manifest.checks = run.checks;
        manifest.wall_clock_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        write_file_atomic(fs::path(config.out_dir) / "manifest.json",
                          manifest.to_json().dump(2) + "\n");

        for (const auto& c : manifest.checks)
            std::printf("CHECK %s %s %.6g %.6g\n", c.name.c_str(),
                        c.passed ? "PASS" : "FAIL", c.value, c.tolerance);
        return manifest;
    } catch (...) {
        // failed runs leave no partial outputs behind
        for (const auto& f : run.outputs) {
            std::error_code ec;
            fs::remove(fs::path(config.out_dir) / f, ec);
        }
        throw;
    }
}

} // namespace bsdep
