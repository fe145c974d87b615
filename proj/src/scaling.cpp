#include "tempo/scaling.hpp"

#include "tempo/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <numbers>
#include <ostream>

namespace tempo::scaling {

namespace {

double op_norm(std::span<const double> lambdas) {
    double s = 0.0;
    for (double l : lambdas) {
        s = std::max(s, std::abs(l));
    }
    return s;
}

void check_depth(const bath::MemoryKernel& kernel, std::size_t m, std::size_t k) {
    if (m > k) {
        throw ConfigError("error bound: depth m = " + std::to_string(m) + " exceeds k = " + std::to_string(k));
    }
    if (kernel.size() < k + 1) {
        throw ConfigError("error bound: kernel has " + std::to_string(kernel.size()) + " entries, need k + 1 = " +
                          std::to_string(k + 1));
    }
}

}  // namespace

double error_bound_epsilon(const bath::MemoryKernel& kernel, std::size_t m, std::size_t k,
                           std::span<const double> lambdas) {
    check_depth(kernel, m, k);
    double acc = 0.0;
    for (std::size_t l = m; l <= k; ++l) {
        acc += static_cast<double>(k - l) * std::abs(kernel.eta[l]);
    }
    return 2.0 * op_norm(lambdas) * acc;
}

std::size_t depth_for_epsilon(const bath::MemoryKernel& kernel, std::size_t k, double epsilon,
                              std::span<const double> lambdas) {
    check_depth(kernel, 0, k);
    if (!(epsilon > 0.0)) {
        throw ConfigError("depth_for_epsilon: epsilon must be > 0");
    }
    // The bound is non-increasing in m, so one backward pass suffices.
    const double scale = 2.0 * op_norm(lambdas);
    double tail = 0.0;
    std::size_t m = k;
    for (std::size_t l = k; l-- > 0;) {
        tail += static_cast<double>(k - l) * std::abs(kernel.eta[l]);
        if (scale * tail > epsilon) {
            break;
        }
        m = l;
    }
    return m;
}

MemoryTimeEstimate predicted_memory_time(const bath::BathSpec& spec, double t_max, double epsilon) {
    spec.validate();
    if (!(t_max > 0.0) || !(epsilon > 0.0)) {
        throw ConfigError("predicted_memory_time: t_max and epsilon must be > 0");
    }
    MemoryTimeEstimate out;
    out.t_m = spec.alpha * t_max / (std::numbers::pi * spec.beta * spec.omega_c * epsilon);
    if (spec.alpha == 0.0) {
        return out;
    }
    out.omega_c_regime = spec.omega_c * out.t_m >= 10.0;
    out.beta_regime = out.t_m >= 10.0 * spec.beta;
    if (!out.omega_c_regime) {
        out.warnings.push_back("omega_c t_m = " + std::to_string(spec.omega_c * out.t_m) +
                               " is not >> 1; the 1/l^2 kernel tail has not set in");
    }
    if (!out.beta_regime) {
        out.warnings.push_back("t_m = " + std::to_string(out.t_m) + " is not >> beta = " + std::to_string(spec.beta) +
                               "; the thermal asymptote does not apply");
    }
    if (spec.nu != 1.0 || spec.is_discrete()) {
        out.warnings.push_back("estimate derived for the Ohmic (nu = 1) continuum only");
    }
    return out;
}

double least_squares_slope(std::span<const double> y) {
    const std::size_t n = y.size();
    if (n < 2) {
        throw ConfigError("least_squares_slope: need at least two points");
    }
    const double xm = 0.5 * static_cast<double>(n - 1);
    double ym = 0.0;
    for (double v : y) {
        ym += v;
    }
    ym /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = static_cast<double>(i) - xm;
        sxy += dx * (y[i] - ym);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

void BenchRecord::validate() const {
    if (!ok) {
        return;
    }
    if (iteration_seconds.size() != k || max_bond.size() != k) {
        throw ConfigError("bench record: per-iteration series do not have k entries");
    }
}

namespace {

std::vector<BenchRecord> run_case(const BenchCase& c, const BenchOptions& opt) {
    std::vector<BenchRecord> out;
    std::vector<Eigen::MatrixXcd> reference;
    bath::InfluenceTensorSet bset;
    std::string setup_error;
    try {
        const bath::TimeGrid grid{c.dt, c.k};
        grid.validate();
        bset = bath::influence_tensors(bath::memory_kernel(grid, c.bath), opt.system.lambdas());
        if (c.memory_depth) {
            bset = network::memory_truncate(bset, *c.memory_depth);
        }
    } catch (const std::exception& e) {
        setup_error = e.what();
    }
    for (const auto scheme : opt.schemes) {
        BenchRecord rec;
        rec.scheme = network::to_string(scheme);
        rec.k = c.k;
        rec.dt = c.dt;
        rec.lambda_c = c.lambda_c;
        rec.bath = c.bath;
        if (!setup_error.empty()) {
            rec.ok = false;
            rec.error = setup_error;
            out.push_back(std::move(rec));
            continue;
        }
        try {
            if (opt.warmup) {
                const std::size_t wk = opt.warmup_k == 0 ? c.k : std::min(opt.warmup_k, c.k);
                (void)network::contract(scheme, bset, {c.dt, wk}, {c.lambda_c, {}});
            }
            const network::InfluenceMPS m = network::contract(scheme, bset, {c.dt, c.k}, {c.lambda_c, {}});
            rec.iteration_seconds = m.stats.iteration_seconds;
            rec.max_bond = m.stats.max_bond;
            rec.total_seconds = m.stats.total_seconds;
            rec.cumulative_discarded = m.stats.cumulative_discarded;
            const auto traj = process::density_trajectory(m, opt.system, c.dt);
            if (reference.empty()) {
                reference = traj;
            } else {
                for (std::size_t j = 0; j < traj.size(); ++j) {
                    rec.cross_scheme_diff =
                        std::max(rec.cross_scheme_diff, (traj[j] - reference[j]).cwiseAbs().maxCoeff());
                }
                rec.consistent = rec.cross_scheme_diff <= opt.cross_tolerance;
            }
        } catch (const std::exception& e) {
            rec.ok = false;
            rec.error = e.what();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace

std::vector<BenchRecord> benchmark(std::span<const BenchCase> cases, const BenchOptions& options) {
    std::vector<BenchRecord> out;
    if (options.parallel) {
        std::vector<std::future<std::vector<BenchRecord>>> jobs;
        for (const auto& c : cases) {
            jobs.push_back(std::async(std::launch::async, [&options, c] { return run_case(c, options); }));
        }
        for (auto& j : jobs) {
            auto recs = j.get();
            out.insert(out.end(), recs.begin(), recs.end());
        }
    } else {
        for (const auto& c : cases) {
            auto recs = run_case(c, options);
            out.insert(out.end(), recs.begin(), recs.end());
        }
    }
    return out;
}

namespace {

nlohmann::json bath_json(const bath::BathSpec& b) {
    return {{"alpha", b.alpha},
            {"omega_c", b.omega_c},
            {"nu", b.nu},
            {"temperature", b.zero_temperature() ? 0.0 : 1.0 / b.beta},
            {"discrete_modes", b.discrete_modes.size()}};
}

}  // namespace

void write_bench_jsonl(std::ostream& os, std::span<const BenchRecord> records) {
    for (const auto& r : records) {
        nlohmann::json j = {{"scheme", r.scheme},
                            {"k", r.k},
                            {"dt", r.dt},
                            {"lambda_c", r.lambda_c},
                            {"bath", bath_json(r.bath)},
                            {"iteration_seconds", r.iteration_seconds},
                            {"max_bond", r.max_bond},
                            {"total_seconds", r.total_seconds},
                            {"cumulative_discarded", r.cumulative_discarded},
                            {"ok", r.ok},
                            {"cross_scheme_diff", r.cross_scheme_diff},
                            {"consistent", r.consistent}};
        if (!r.ok) {
            j["error"] = r.error;
        }
        os << j.dump() << '\n';
    }
}

void write_bench_csv(std::ostream& os, std::span<const BenchRecord> records) {
    os << "scheme,k,dt,lambda_c,alpha,omega_c,nu,temperature,total_seconds,max_bond,cumulative_discarded,"
          "slope_seconds_per_iteration,cross_scheme_diff,consistent,ok\n";
    os << std::setprecision(10);
    for (const auto& r : records) {
        const std::size_t mb = r.max_bond.empty() ? 0 : *std::max_element(r.max_bond.begin(), r.max_bond.end());
        const double slope = r.iteration_seconds.size() >= 2 ? least_squares_slope(r.iteration_seconds) : 0.0;
        os << r.scheme << ',' << r.k << ',' << r.dt << ',' << r.lambda_c << ',' << r.bath.alpha << ','
           << r.bath.omega_c << ',' << r.bath.nu << ',' << (r.bath.zero_temperature() ? 0.0 : 1.0 / r.bath.beta) << ','
           << r.total_seconds << ',' << mb << ',' << r.cumulative_discarded << ',' << slope << ','
           << r.cross_scheme_diff << ',' << (r.consistent ? 1 : 0) << ',' << (r.ok ? 1 : 0) << '\n';
    }
}

}  // namespace tempo::scaling
