#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "bsdep/config.hpp"

namespace bsdep {

inline constexpr const char* kArtifactVersion = "bsdep-lab 1.0.0";

struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double tolerance = 0.0;

    nlohmann::json to_json() const {
        return {{"name", name}, {"passed", passed}, {"value", value}, {"tolerance", tolerance}};
    }
};

struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::string artifact_version = kArtifactVersion;
    double wall_clock_seconds = 0.0;
    std::vector<std::string> outputs;
    std::vector<CheckResult> checks;

    bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    nlohmann::json to_json() const;
};

/// Executes the experiment described by the config: runs the declared kind,
/// writes the CSV/JSON outputs plus the manifest into the output directory
/// (partial outputs are removed on failure), and prints one machine-parsable
/// "CHECK <name> PASS|FAIL <value> <tolerance>" line per declared check.
RunManifest run_experiment(const ExperimentConfig& config);

} // namespace bsdep
