#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "bsdep/girsanov.hpp"
#include "bsdep/noise.hpp"
#include "bsdep/solver.hpp"

namespace bsdep {

/// "%.17g" formatting: round-trips doubles and keeps reruns byte-identical.
std::string format_double(double v);

/// Writes via a temporary file plus rename, so readers never observe a
/// partial file.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// FNV-1a 64-bit hex digest, used as the config hash.
std::string fnv1a_hex(const std::string& text);

/// solution.csv: path,node,y,z_0..z_{d-1},u_0..u_{m-1}; one row per
/// (path, node), nodes 0..N; Z and U are step quantities on [t_k, t_{k+1})
/// and are written as 0 on the terminal row.
void write_solution_csv(const std::filesystem::path& path, const BSDEPSolution& sol);

/// weights.csv: path,weight.
void write_weights_csv(const std::filesystem::path& path, const WeightsReport& weights);

/// paths.csv: path,step,dw_0..dw_{d-1}; jumps.csv: path,time,mark.
void write_ensemble_csvs(const std::filesystem::path& dir, const PathEnsemble& ensemble);

} // namespace bsdep
