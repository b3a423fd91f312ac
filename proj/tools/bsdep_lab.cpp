#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "bsdep/experiment.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"bsdep-lab: a numerical laboratory for scalar BSDEs with Poisson jumps"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    int n_paths = 0;
    app.add_option("--config", config_path, "experiment config (JSON)")->required(false);
    app.add_option("--seed", seed, "override the ensemble seed");
    app.add_option("--out", out_dir, "override the output directory");
    app.add_option("--paths", n_paths, "override the number of Monte-Carlo paths");

    const char* kinds[] = {"solve",  "picard",   "minimal",  "compare",
                           "oracle", "validate", "infinite", "simulate"};
    for (const char* kind : kinds)
        app.add_subcommand(kind, std::string("run a '") + kind + "' experiment")
            ->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e); // 0
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "%s\n", e.what());
        std::fprintf(stderr, "run with --help for usage\n");
        return 2;
    }

    try {
        if (config_path.empty()) throw std::runtime_error("--config is required");
        nlohmann::json raw = nlohmann::json::parse(read_file(config_path));

        // the subcommand selects the experiment kind; flags override the config
        if (!raw.contains("experiment")) raw["experiment"] = nlohmann::json::object();
        raw["experiment"]["kind"] = app.get_subcommands().front()->get_name();
        if (seed >= 0) raw["ensemble"]["seed"] = static_cast<std::uint64_t>(seed);
        if (n_paths > 0) raw["ensemble"]["n_paths"] = n_paths;
        if (!out_dir.empty()) raw["output"]["directory"] = out_dir;

        const bsdep::ExperimentConfig cfg = bsdep::parse_config_json(raw);
        const bsdep::RunManifest manifest = bsdep::run_experiment(cfg);
        return manifest.all_passed() ? 0 : 1;
    } catch (const nlohmann::json::parse_error& e) {
        std::fprintf(stderr, "error: config is not valid JSON: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
