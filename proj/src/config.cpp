#include "bsdep/config.hpp"

#include <cmath>
#include <set>

namespace bsdep {

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "solve") return ExperimentKind::Solve;
    if (s == "picard") return ExperimentKind::Picard;
    if (s == "minimal") return ExperimentKind::Minimal;
    if (s == "compare") return ExperimentKind::Compare;
    if (s == "oracle") return ExperimentKind::Oracle;
    if (s == "validate") return ExperimentKind::Validate;
    if (s == "infinite") return ExperimentKind::Infinite;
    if (s == "simulate") return ExperimentKind::Simulate;
    throw std::invalid_argument("unknown experiment kind '" + s + "'");
}

std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Solve:
        return "solve";
    case ExperimentKind::Picard:
        return "picard";
    case ExperimentKind::Minimal:
        return "minimal";
    case ExperimentKind::Compare:
        return "compare";
    case ExperimentKind::Oracle:
        return "oracle";
    case ExperimentKind::Validate:
        return "validate";
    case ExperimentKind::Infinite:
        return "infinite";
    case ExperimentKind::Simulate:
        return "simulate";
    }
    return "solve";
}

namespace {

using nlohmann::json;

struct Parser {
    std::vector<std::string> errors;

    void fail(const std::string& path, const std::string& msg) {
        errors.push_back(path + ": " + msg);
    }

    void check_keys(const json& j, const std::string& path,
                    const std::set<std::string>& allowed) {
        if (!j.is_object()) {
            fail(path, "expected an object");
            return;
        }
        for (const auto& [key, value] : j.items())
            if (!allowed.count(key)) fail(path + "." + key, "unexpected key");
    }

    template <typename F>
    auto guarded(const std::string& path, F&& f) -> std::optional<decltype(f())> {
        try {
            return std::forward<F>(f)();
        } catch (const std::exception& e) {
            fail(path, e.what());
            return std::nullopt;
        }
    }
};

MarkSpace parse_marks(Parser& p, const json& j, const std::string& path) {
    if (!j.is_array()) {
        p.fail(path, "expected an array of {e, intensity} objects");
        return {};
    }
    std::vector<double> marks, intensities;
    int idx = 0;
    for (const auto& entry : j) {
        const std::string epath = path + "[" + std::to_string(idx++) + "]";
        p.check_keys(entry, epath, {"e", "intensity"});
        if (!entry.contains("e") || !entry.contains("intensity")) {
            p.fail(epath, "needs 'e' and 'intensity'");
            continue;
        }
        marks.push_back(entry.at("e").get<double>());
        intensities.push_back(entry.at("intensity").get<double>());
    }
    auto result = p.guarded(path, [&] { return MarkSpace(marks, intensities); });
    return result.value_or(MarkSpace{});
}

struct ParsedProblem {
    TerminalSpec terminal;
    std::optional<GeneratorSpec> generator;
    std::optional<LinearBSDEPSpec> linear;
    TimeGrid grid{1.0, 50};
    MarkSpace marks;
    HorizonKind horizon_kind = HorizonKind::Finite;
    TruncationSchedule schedule;
};

ParsedProblem parse_problem(Parser& p, const json& j, const std::string& path) {
    ParsedProblem out;
    p.check_keys(j, path, {"terminal", "generator", "linear", "grid", "marks", "horizon"});

    if (j.contains("terminal")) {
        auto t = p.guarded(path + ".terminal",
                           [&] { return TerminalSpec::from_json(j.at("terminal")); });
        if (t) out.terminal = *t;
    } else {
        p.fail(path + ".terminal", "required");
    }

    double horizon = 1.0;
    int n_steps = 50;
    if (j.contains("grid")) {
        p.check_keys(j.at("grid"), path + ".grid", {"horizon", "n_steps"});
        horizon = j.at("grid").value("horizon", 1.0);
        n_steps = j.at("grid").value("n_steps", 50);
    }
    if (auto g = p.guarded(path + ".grid", [&] { return TimeGrid(horizon, n_steps); }))
        out.grid = *g;

    if (j.contains("marks")) out.marks = parse_marks(p, j.at("marks"), path + ".marks");

    if (j.contains("horizon")) {
        const json& h = j.at("horizon");
        p.check_keys(h, path + ".horizon",
                     {"kind", "truncations", "steps_per_unit"});
        const std::string kind = h.value("kind", "finite");
        if (kind == "finite") {
            out.horizon_kind = HorizonKind::Finite;
        } else if (kind == "truncated_infinite" || kind == "infinite") {
            out.horizon_kind = HorizonKind::TruncatedInfinite;
            if (h.contains("truncations"))
                out.schedule.horizons = h.at("truncations").get<std::vector<double>>();
            out.schedule.steps_per_unit = h.value("steps_per_unit", 64);
            p.guarded(path + ".horizon", [&] {
                out.schedule.validate();
                return 0;
            });
        } else {
            p.fail(path + ".horizon.kind", "must be 'finite' or 'truncated_infinite'");
        }
    }

    if (j.contains("generator") && j.contains("linear"))
        p.fail(path, "give either 'generator' or 'linear', not both");
    if (j.contains("generator")) {
        auto g = p.guarded(path + ".generator",
                           [&] { return GeneratorSpec::from_json(j.at("generator")); });
        if (g) out.generator = *g;
    }
    if (j.contains("linear")) {
        auto l = p.guarded(path + ".linear",
                           [&] { return LinearBSDEPSpec::from_json(j.at("linear")); });
        if (l) {
            l->terminal = out.terminal;
            out.linear = *l;
        }
    }
    if (!j.contains("generator") && !j.contains("linear"))
        p.fail(path, "needs a 'generator' (or a 'linear' block for oracle runs)");
    return out;
}

BSDEPProblem assemble_problem(Parser& p, ParsedProblem& parsed, int brownian_dim,
                              const std::string& path) {
    BSDEPProblem problem;
    problem.terminal = parsed.terminal;
    problem.grid = parsed.grid;
    problem.marks = parsed.marks;
    problem.horizon_kind = parsed.horizon_kind;
    problem.schedule = parsed.schedule;
    if (parsed.linear) {
        auto g = p.guarded(path + ".linear", [&] {
            parsed.linear->validate(parsed.grid, parsed.marks);
            return parsed.linear->to_generator(parsed.grid, parsed.marks, brownian_dim);
        });
        if (g) problem.generator = *g;
    } else if (parsed.generator) {
        problem.generator = *parsed.generator;
    }
    p.guarded(path, [&] {
        problem.validate(brownian_dim);
        return 0;
    });
    return problem;
}

} // namespace

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("$: JSON syntax error: ") + e.what()});
    }
    return parse_config_json(j);
}

ExperimentConfig parse_config_json(const nlohmann::json& j) {
    Parser p;
    ExperimentConfig cfg;
    cfg.raw = j;

    p.check_keys(j, "$", {"problem", "problem2", "ensemble", "solver", "experiment", "output"});

    if (j.contains("ensemble")) {
        const json& e = j.at("ensemble");
        p.check_keys(e, "$.ensemble", {"n_paths", "brownian_dim", "seed"});
        cfg.ensemble.n_paths = e.value("n_paths", 10000);
        cfg.ensemble.brownian_dim = e.value("brownian_dim", 1);
        cfg.ensemble.seed = e.value("seed", static_cast<std::uint64_t>(12345));
        if (cfg.ensemble.n_paths < 1) p.fail("$.ensemble.n_paths", "must be >= 1");
        if (cfg.ensemble.brownian_dim < 1) p.fail("$.ensemble.brownian_dim", "must be >= 1");
    }

    if (j.contains("solver")) {
        const json& s = j.at("solver");
        p.check_keys(s, "$.solver",
                     {"basis", "implicit_iterations", "picard"});
        if (s.contains("basis")) {
            p.check_keys(s.at("basis"), "$.solver.basis",
                         {"degree", "include_jump_count", "cross_terms", "ridge"});
            if (auto b = p.guarded("$.solver.basis",
                                   [&] { return RegressionBasis::from_json(s.at("basis")); }))
                cfg.solver.basis = *b;
        }
        cfg.solver.implicit_iterations = s.value("implicit_iterations", 0);
        if (s.contains("picard")) {
            p.check_keys(s.at("picard"), "$.solver.picard", {"max_iter", "tol"});
            cfg.solver.picard_max_iter = s.at("picard").value("max_iter", 50);
            cfg.solver.picard_tol = s.at("picard").value("tol", 1e-10);
        }
    }

    if (j.contains("experiment")) {
        const json& e = j.at("experiment");
        p.check_keys(e, "$.experiment",
                     {"kind", "n_list", "infconv", "infconv_rounding", "box", "sample_budget",
                      "validate_tol", "expect", "slack_se_multiplier", "negative_control",
                      "se_multiplier", "rel_tol", "tolerance", "y0_target", "z_mean_target",
                      "infinite_target", "target_horizon"});
        if (e.contains("kind")) {
            if (auto k = p.guarded("$.experiment.kind", [&] {
                    return experiment_kind_from_string(e.at("kind").get<std::string>());
                }))
                cfg.kind = *k;
        } else {
            p.fail("$.experiment.kind", "required");
        }
        if (e.contains("n_list")) cfg.n_list = e.at("n_list").get<std::vector<int>>();
        if (e.contains("infconv")) {
            p.check_keys(e.at("infconv"), "$.experiment.infconv",
                         {"search_box_radius", "coarse_points_per_axis", "refinement_rounds"});
            if (auto ic = p.guarded("$.experiment.infconv",
                                    [&] { return InfConvParams::from_json(e.at("infconv")); }))
                cfg.infconv = *ic;
        }
        cfg.infconv_rounding = e.value("infconv_rounding", 1e-9);
        if (e.contains("box")) {
            if (auto b =
                    p.guarded("$.experiment.box", [&] { return SampleBox::from_json(e.at("box")); }))
                cfg.box = *b;
        }
        cfg.sample_budget = e.value("sample_budget", 20000);
        cfg.validate_tol = e.value("validate_tol", 1e-9);
        cfg.expect = e.value("expect", "pass");
        if (cfg.expect != "pass" && cfg.expect != "fail")
            p.fail("$.experiment.expect", "must be 'pass' or 'fail'");
        cfg.slack_se_multiplier = e.value("slack_se_multiplier", 5.0);
        cfg.negative_control = e.value("negative_control", false);
        cfg.se_multiplier = e.value("se_multiplier", 3.0);
        cfg.rel_tol = e.value("rel_tol", 0.01);
        cfg.tolerance = e.value("tolerance", 0.01);
        if (e.contains("y0_target")) cfg.y0_target = e.at("y0_target").get<double>();
        if (e.contains("z_mean_target")) cfg.z_mean_target = e.at("z_mean_target").get<double>();
        if (e.contains("infinite_target"))
            cfg.infinite_target = e.at("infinite_target").get<double>();
        cfg.target_horizon = e.value("target_horizon", 0.0);
    } else {
        p.fail("$.experiment", "required");
    }

    if (j.contains("output")) {
        p.check_keys(j.at("output"), "$.output", {"directory"});
        cfg.out_dir = j.at("output").value("directory", "out");
    }

    if (!j.contains("problem")) {
        p.fail("$.problem", "required");
        throw ConfigError(std::move(p.errors));
    }

    ParsedProblem parsed = parse_problem(p, j.at("problem"), "$.problem");
    if (cfg.kind == ExperimentKind::Oracle && !parsed.linear)
        p.fail("$.problem", "oracle experiments need a 'linear' block");
    cfg.problem = assemble_problem(p, parsed, cfg.ensemble.brownian_dim, "$.problem");
    cfg.linear = parsed.linear;

    if (j.contains("problem2")) {
        ParsedProblem parsed2 = parse_problem(p, j.at("problem2"), "$.problem2");
        cfg.problem2 = assemble_problem(p, parsed2, cfg.ensemble.brownian_dim, "$.problem2");
        if (p.errors.empty()) {
            if (!(cfg.problem2->grid == cfg.problem.grid))
                p.fail("$.problem2.grid", "must match $.problem.grid for comparisons");
            if (!(cfg.problem2->marks == cfg.problem.marks))
                p.fail("$.problem2.marks", "must match $.problem.marks for comparisons");
        }
    }
    if (cfg.kind == ExperimentKind::Compare && !cfg.problem2)
        p.fail("$.problem2", "compare experiments need a second problem");

    for (std::size_t i = 1; i < cfg.n_list.size(); ++i)
        if (cfg.n_list[i] <= cfg.n_list[i - 1])
            p.fail("$.experiment.n_list", "must be strictly increasing");

    if (!p.errors.empty()) throw ConfigError(std::move(p.errors));
    return cfg;
}

} // namespace bsdep
