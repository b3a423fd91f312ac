#include "bsdep/io.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace bsdep {

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) throw std::runtime_error("short write to " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

std::string fnv1a_hex(const std::string& text) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_solution_csv(const std::filesystem::path& path, const BSDEPSolution& sol) {
    std::string csv = "path,node,y";
    for (int j = 0; j < sol.meta.brownian_dim; ++j) csv += ",z_" + std::to_string(j);
    for (std::size_t i = 0; i < sol.meta.n_marks; ++i) csv += ",u_" + std::to_string(i);
    csv += "\n";
    const std::size_t n = static_cast<std::size_t>(sol.meta.n_steps);
    for (std::size_t p = 0; p < sol.meta.n_paths; ++p) {
        for (std::size_t k = 0; k <= n; ++k) {
            csv += std::to_string(p) + "," + std::to_string(k) + "," + format_double(sol.y(p, k));
            for (int j = 0; j < sol.meta.brownian_dim; ++j)
                csv += "," + format_double(k < n ? sol.z(p, k, static_cast<std::size_t>(j)) : 0.0);
            for (std::size_t i = 0; i < sol.meta.n_marks; ++i)
                csv += "," + format_double(k < n ? sol.u(p, k, i) : 0.0);
            csv += "\n";
        }
    }
    write_file_atomic(path, csv);
}

void write_weights_csv(const std::filesystem::path& path, const WeightsReport& weights) {
    std::string csv = "path,weight\n";
    for (std::size_t p = 0; p < weights.weights.size(); ++p)
        csv += std::to_string(p) + "," + format_double(weights.weights[p]) + "\n";
    write_file_atomic(path, csv);
}

void write_ensemble_csvs(const std::filesystem::path& dir, const PathEnsemble& ensemble) {
    std::string paths_csv = "path,step";
    for (int j = 0; j < ensemble.brownian_dim; ++j) paths_csv += ",dw_" + std::to_string(j);
    paths_csv += "\n";
    for (std::size_t p = 0; p < ensemble.n_paths(); ++p)
        for (int k = 0; k < ensemble.grid.n_steps(); ++k) {
            paths_csv += std::to_string(p) + "," + std::to_string(k);
            for (int j = 0; j < ensemble.brownian_dim; ++j)
                paths_csv += "," + format_double(ensemble.paths[p].dw(k, j));
            paths_csv += "\n";
        }
    write_file_atomic(dir / "paths.csv", paths_csv);

    std::string jumps_csv = "path,time,mark\n";
    for (std::size_t p = 0; p < ensemble.n_paths(); ++p)
        for (const JumpEvent& ev : ensemble.paths[p].jumps)
            jumps_csv += std::to_string(p) + "," + format_double(ev.time) + "," +
                         std::to_string(ev.mark) + "\n";
    write_file_atomic(dir / "jumps.csv", jumps_csv);
}

} // namespace bsdep
