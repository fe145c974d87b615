// scaling.hpp: memory-truncation error bound, memory-time estimate and the contraction benchmark.
#pragma once

#include "tempo/bath.hpp"
#include "tempo/network.hpp"
#include "tempo/process.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tempo::scaling {

/// 2 ||s||_op sum_{l=m}^{k} (k - l) |eta_l| with ||s||_op = max |lambda|.
double error_bound_epsilon(const bath::MemoryKernel& kernel, std::size_t m, std::size_t k,
                           std::span<const double> lambdas);

/// Smallest depth m <= k whose bound is <= epsilon (m = k always qualifies).
std::size_t depth_for_epsilon(const bath::MemoryKernel& kernel, std::size_t k, double epsilon,
                              std::span<const double> lambdas);

struct MemoryTimeEstimate {
    double t_m = 0.0;
    bool omega_c_regime = true;  // omega_c t_m >> 1
    bool beta_regime = true;     // t_m >> beta
    std::vector<std::string> warnings;
};

/// alpha t_max / (pi beta omega_c epsilon); "much greater" means a factor 10.
MemoryTimeEstimate predicted_memory_time(const bath::BathSpec& spec, double t_max, double epsilon);

/// Least-squares slope of y against its index.
double least_squares_slope(std::span<const double> y);

struct BenchCase {
    bath::BathSpec bath;
    double dt = 0.04;
    std::size_t k = 100;
    double lambda_c = 1e-6;
    std::optional<std::size_t> memory_depth;
};

struct BenchOptions {
    std::vector<network::Scheme> schemes{network::Scheme::nonlocal, network::Scheme::local};
    bool warmup = true;
    std::size_t warmup_k = 0;  // 0: warm up at the full k
    bool parallel = false;
    double cross_tolerance = 1e-4;
    process::SystemSpec system = process::spin_boson(1.0, 0.0, Eigen::Matrix2cd{{1.0, 0.0}, {0.0, 0.0}});
};

struct BenchRecord {
    std::string scheme;
    std::size_t k = 0;
    double dt = 0.0;
    double lambda_c = 0.0;
    bath::BathSpec bath;
    std::vector<double> iteration_seconds;
    std::vector<std::size_t> max_bond;
    double total_seconds = 0.0;
    double cumulative_discarded = 0.0;
    bool ok = true;
    std::string error;
    // Largest elementwise trajectory difference to the first scheme of the same case.
    double cross_scheme_diff = 0.0;
    bool consistent = true;

    void validate() const;
};

/// Runs every scheme on every case with identical inputs. Failures are recorded, not thrown.
std::vector<BenchRecord> benchmark(std::span<const BenchCase> cases, const BenchOptions& options = {});

void write_bench_jsonl(std::ostream& os, std::span<const BenchRecord> records);
void write_bench_csv(std::ostream& os, std::span<const BenchRecord> records);

}  // namespace tempo::scaling
