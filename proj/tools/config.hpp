// config.hpp: run configuration for the tempo command-line tool.
//
// The document is JSON. Frequencies are in units of Omega, times in 1/Omega,
// and the bath temperature is given as T (beta = 1/T, T = 0 for zero temperature).
#pragma once

#include "tempo/bath.hpp"
#include "tempo/network.hpp"
#include "tempo/observables.hpp"
#include "tempo/process.hpp"

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tempo::cli {

// Schema violation at a dotted field path (exit code 2).
class SchemaError : public std::runtime_error {
public:
    SchemaError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(std::move(path)) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

struct CorrelateTask {
    std::optional<std::size_t> anchor;  // empty: detect the steady state
    std::optional<std::size_t> n_tau;   // empty: up to the end of the grid
    double tail_fraction = 0.1;
    std::size_t steady_window = 20;
    double steady_threshold = 1e-5;
};

struct SpectrumTask {
    std::vector<observables::SpectrumKind> policies{observables::SpectrumKind::exact,
                                                    observables::SpectrumKind::regression,
                                                    observables::SpectrumKind::markov};
    double detuning_min = -30.0;
    double detuning_max = 30.0;
    std::size_t detuning_points = 1201;
    double window_rate = 0.0;
    double sideband_delta = 3.0;
    double peak_half_width = 3.0;
};

struct BenchmarkTask {
    std::vector<double> alphas;
    std::vector<double> omega_cs;
    std::vector<std::size_t> ks;
    std::vector<network::Scheme> schemes{network::Scheme::nonlocal, network::Scheme::local};
    bool warmup = true;
    std::size_t warmup_k = 0;
    bool parallel = false;
    double cross_tolerance = 1e-4;
};

struct OutputSpec {
    std::filesystem::path directory = "tempo_out";
    bool csv = true;
    bool json = true;
    bool mps = false;
};

struct RunConfig {
    process::SystemSpec system;
    bath::BathSpec bath;
    bath::TimeGrid grid;
    network::Scheme scheme = network::Scheme::local;
    double lambda_c = 1e-6;
    std::optional<std::size_t> memory_depth;
    CorrelateTask correlate;
    SpectrumTask spectrum;
    BenchmarkTask benchmark;
    OutputSpec output;
};

/// Parses and validates; every failure is a SchemaError naming the offending field.
RunConfig parse_config(const nlohmann::json& doc);

/// Sets the value at a dotted path; the value is read as JSON, falling back to a plain string.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// FNV-1a of the compact dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& doc);

}  // namespace tempo::cli
