#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "bsdep/experiment.hpp"
#include "bsdep/io.hpp"

using namespace bsdep;
namespace fs = std::filesystem;

namespace {

std::string minimal_solve_config() {
    return R"({
        "problem": {
            "terminal": {"kind": "constant", "value": 1.0},
            "generator": {"expr": 0.0}
        },
        "experiment": {"kind": "solve"}
    })";
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("minimal config parses with the documented defaults") {
    const auto cfg = parse_config(minimal_solve_config());
    CHECK(cfg.problem.grid.n_steps() == 50);
    CHECK(cfg.problem.grid.horizon() == 1.0);
    CHECK(cfg.ensemble.n_paths == 10000);
    CHECK(cfg.solver.basis.degree == 2);
    CHECK(cfg.kind == ExperimentKind::Solve);
}

TEST_CASE("constant gamma with an infinite horizon is rejected citing (A4)") {
    const std::string text = R"({
        "problem": {
            "terminal": 0.0,
            "generator": {
                "expr": {"op": "neg", "arg": {"var": "y"}},
                "coefficients": {"gamma": {"kind": "constant", "value": 1.0}}
            },
            "horizon": {"kind": "truncated_infinite", "truncations": [4.0, 8.0]}
        },
        "experiment": {"kind": "infinite"}
    })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("(A4)") != std::string::npos);
    }
}

TEST_CASE("u-arity mismatches are schema errors with a path") {
    const std::string text = R"({
        "problem": {
            "terminal": 0.0,
            "generator": {"expr": {"var": "u", "index": 2}},
            "marks": [{"e": 1.0, "intensity": 1.0}, {"e": -1.0, "intensity": 0.5}]
        },
        "experiment": {"kind": "solve"}
    })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("arity") != std::string::npos);
        CHECK(std::string(e.what()).find("$.problem") != std::string::npos);
    }
}

TEST_CASE("unknown keys and syntax errors are rejected") {
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);

    const std::string text = R"({
        "problem": {
            "terminal": 0.0,
            "generator": {"expr": 0.0},
            "grid": {"horizon": 1.0, "n_stepz": 50}
        },
        "experiment": {"kind": "solve"},
        "mystery": 1
    })";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        CHECK(what.find("$.mystery") != std::string::npos);
        CHECK(what.find("n_stepz") != std::string::npos);
    }

    // compare without a second problem
    const std::string compare_text = R"({
        "problem": {"terminal": 0.0, "generator": {"expr": 0.0}},
        "experiment": {"kind": "compare"}
    })";
    CHECK_THROWS_AS(parse_config(compare_text), ConfigError);
}

TEST_CASE("run_experiment writes outputs, manifest and is byte-deterministic") {
    const fs::path base = fs::temp_directory_path() / "bsdep_harness_test";
    fs::remove_all(base);

    nlohmann::json j = nlohmann::json::parse(R"({
        "problem": {
            "terminal": {"kind": "brownian"},
            "generator": {"expr": 0.0},
            "grid": {"horizon": 1.0, "n_steps": 10}
        },
        "ensemble": {"n_paths": 64, "seed": 7},
        "experiment": {"kind": "solve", "y0_target": 0.0, "rel_tol": 0.0},
        "output": {"directory": ""}
    })");

    j["output"]["directory"] = (base / "a").string();
    const auto manifest_a = run_experiment(parse_config_json(j));
    j["output"]["directory"] = (base / "b").string();
    const auto manifest_b = run_experiment(parse_config_json(j));

    CHECK(manifest_a.all_passed());
    CHECK(fs::exists(base / "a" / "solution.csv"));
    CHECK(fs::exists(base / "a" / "summary.json"));
    CHECK(fs::exists(base / "a" / "manifest.json"));
    CHECK(fs::exists(base / "a" / "config.json"));

    CHECK(slurp(base / "a" / "solution.csv") == slurp(base / "b" / "solution.csv"));
    CHECK(slurp(base / "a" / "summary.json") == slurp(base / "b" / "summary.json"));

    // different seed changes the numbers
    j["ensemble"]["seed"] = 8;
    j["output"]["directory"] = (base / "c").string();
    run_experiment(parse_config_json(j));
    CHECK(slurp(base / "a" / "solution.csv") != slurp(base / "c" / "solution.csv"));

    // hash covers the resolved config, so the seed change shows up
    CHECK(manifest_a.config_hash != fnv1a_hex(j.dump()));
    fs::remove_all(base);
}

TEST_CASE("validate experiment: negative control fails with a witness in the summary") {
    const fs::path dir = fs::temp_directory_path() / "bsdep_validate_test";
    fs::remove_all(dir);
    nlohmann::json j = nlohmann::json::parse(R"({
        "problem": {
            "terminal": 0.0,
            "generator": {
                "expr": {"op": "mul", "args": [{"var": "y"}, {"var": "y"}]},
                "coefficients": {"gamma": 1.0, "rho": 1.0},
                "assumption_class": "A"
            }
        },
        "ensemble": {"n_paths": 16, "seed": 3},
        "experiment": {"kind": "validate", "sample_budget": 2000,
                        "box": {"y": [-10, 10]}},
        "output": {"directory": ""}
    })");
    j["output"]["directory"] = dir.string();
    const auto manifest = run_experiment(parse_config_json(j));
    CHECK_FALSE(manifest.all_passed()); // y^2 is not 1-Lipschitz on the box

    const auto summary = nlohmann::json::parse(slurp(dir / "summary.json"));
    REQUIRE(summary.contains("validators"));
    CHECK(summary["validators"][0].contains("witness"));

    // declared as a negative control, the same run passes
    j["experiment"]["expect"] = "fail";
    j["output"]["directory"] = (dir / "neg").string();
    CHECK(run_experiment(parse_config_json(j)).all_passed());
    fs::remove_all(dir);
}

TEST_CASE("simulate experiment dumps the ensemble tables") {
    const fs::path dir = fs::temp_directory_path() / "bsdep_simulate_test";
    fs::remove_all(dir);
    nlohmann::json j = nlohmann::json::parse(R"({
        "problem": {
            "terminal": 0.0,
            "generator": {"expr": 0.0},
            "grid": {"horizon": 1.0, "n_steps": 4},
            "marks": [{"e": 1.0, "intensity": 2.0}]
        },
        "ensemble": {"n_paths": 8, "seed": 5},
        "experiment": {"kind": "simulate"},
        "output": {"directory": ""}
    })");
    j["output"]["directory"] = dir.string();
    run_experiment(parse_config_json(j));
    const std::string paths = slurp(dir / "paths.csv");
    CHECK(paths.rfind("path,step,dw_0\n", 0) == 0);
    const std::string jumps = slurp(dir / "jumps.csv");
    CHECK(jumps.rfind("path,time,mark\n", 0) == 0);
    fs::remove_all(dir);
}
