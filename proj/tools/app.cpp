#include "app.hpp"

#include "config.hpp"
#include "validate.hpp"

#include "tempo/errors.hpp"
#include "tempo/observables.hpp"
#include "tempo/scaling.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#ifndef TEMPO_VERSION
#define TEMPO_VERSION "0.0.0"
#endif

namespace tempo::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

// Numeric failure with the pipeline stage it happened in.
class StageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Flags {
    std::string config;
    std::string out;
    std::string scheme;
    std::optional<double> lambda_c;
    std::optional<std::size_t> k;
    std::optional<double> dt;
    std::vector<std::string> overrides;
};

json load_document(const Flags& f) {
    if (f.config.empty()) {
        throw SchemaError("--config", "a configuration file is required for this command");
    }
    std::ifstream in(f.config);
    if (!in) {
        throw SchemaError("--config", "cannot read '" + f.config + "'");
    }
    json doc;
    try {
        doc = json::parse(in, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw SchemaError(f.config, std::string("not valid JSON: ") + e.what());
    }
    if (!f.scheme.empty()) {
        doc["solver"]["scheme"] = f.scheme;
    }
    if (f.lambda_c) {
        doc["solver"]["lambda_c"] = *f.lambda_c;
    }
    if (f.k) {
        doc["grid"]["k"] = *f.k;
    }
    if (f.dt) {
        doc["grid"]["dt"] = *f.dt;
    }
    for (const auto& o : f.overrides) {
        apply_override(doc, o);
    }
    if (!f.out.empty()) {
        doc["output"]["directory"] = f.out;
    }
    return doc;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) {
        throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return os;
}

struct Pipeline {
    RunConfig cfg;
    json doc;
    std::string command;
    network::InfluenceMPS mps;
};

network::InfluenceMPS build_mps(const RunConfig& cfg) {
    bath::InfluenceTensorSet bset;
    try {
        bset = bath::influence_tensors(bath::memory_kernel(cfg.grid, cfg.bath), cfg.system.lambdas());
    } catch (const NumericError& e) {
        throw StageError(std::string("bath setup: ") + e.what());
    }
    if (cfg.memory_depth) {
        bset = network::memory_truncate(bset, *cfg.memory_depth);
    }
    std::size_t done = 0;
    network::ContractionOptions opts{cfg.lambda_c, [&done](std::size_t it, const network::BoundaryMPS&) { done = it; }};
    try {
        return network::contract(cfg.scheme, bset, cfg.grid, opts);
    } catch (const NumericError& e) {
        throw StageError(network::to_string(cfg.scheme) + " contraction, iteration " + std::to_string(done + 1) +
                         " of " + std::to_string(cfg.grid.k) + ": " + e.what());
    }
}

json stats_json(const Pipeline& p) {
    const auto& st = p.mps.stats;
    return {{"version", TEMPO_VERSION},
            {"command", p.command},
            {"config_hash", config_hash(p.doc)},
            {"config", p.doc},
            {"scheme", network::to_string(p.cfg.scheme)},
            {"k", p.cfg.grid.k},
            {"dt", p.cfg.grid.dt},
            {"lambda_c", p.cfg.lambda_c},
            {"max_bond_history", st.max_bond},
            {"discarded_per_iteration", st.discarded_per_iteration},
            {"cumulative_discarded", st.cumulative_discarded},
            {"final_max_bond", p.mps.max_bond()}};
}

void write_stats(const Pipeline& p, const json& extra) {
    if (!p.cfg.output.json) {
        return;
    }
    json j = stats_json(p);
    j.update(extra);
    open_output(p.cfg.output.directory / "stats.json") << j.dump(2) << '\n';
}

Pipeline prepare(const Flags& f, const std::string& command) {
    Pipeline p;
    p.command = command;
    p.doc = load_document(f);
    p.cfg = parse_config(p.doc);
    fs::create_directories(p.cfg.output.directory);
    p.mps = build_mps(p.cfg);
    if (p.cfg.output.mps) {
        // Wall-clock fields are zeroed so identical inputs give identical files.
        std::fill(p.mps.stats.iteration_seconds.begin(), p.mps.stats.iteration_seconds.end(), 0.0);
        p.mps.stats.total_seconds = 0.0;
        std::ofstream os(p.cfg.output.directory / "influence.tmps", std::ios::binary);
        network::write_influence_mps(os, p.mps);
    }
    return p;
}

std::vector<Eigen::MatrixXcd> full_trajectory(const Pipeline& p) {
    try {
        auto traj = process::density_trajectory(p.mps, p.cfg.system, p.cfg.grid.dt);
        traj.insert(traj.begin(), p.cfg.system.rho0);
        return traj;
    } catch (const NumericError& e) {
        throw StageError(std::string("trajectory evaluation: ") + e.what());
    }
}

struct Anchor {
    std::size_t step = 0;
    std::size_t n_tau = 0;
    bool detected = false;
    bool converged = true;
    std::string warning;
};

Anchor choose_anchor(const Pipeline& p) {
    const auto& c = p.cfg.correlate;
    const std::size_t k = p.cfg.grid.k;
    Anchor a;
    if (c.anchor) {
        a.step = *c.anchor;
    } else {
        a.detected = true;
        const auto traj = full_trajectory(p);
        const auto ss = observables::steady_state_anchor(traj, c.steady_window, c.steady_threshold);
        a.converged = ss.converged;
        a.step = ss.step;
        if (!ss.converged) {
            a.step = k / 2;
            a.warning = "no steady state within the grid; anchored at k/2";
        }
    }
    if (a.step >= k) {
        throw SchemaError("task.correlate.anchor", "must be < grid.k = " + std::to_string(k));
    }
    a.n_tau = c.n_tau.value_or(k - a.step);
    if (a.step + a.n_tau > k) {
        throw SchemaError("task.correlate.n_tau", "anchor + n_tau exceeds grid.k = " + std::to_string(k));
    }
    return a;
}

json anchor_json(const Anchor& a) {
    json j = {{"anchor_step", a.step}, {"n_tau", a.n_tau}, {"anchor_detected", a.detected},
              {"steady_state_converged", a.converged}};
    if (!a.warning.empty()) {
        j["warning"] = a.warning;
    }
    return j;
}

observables::CorrelationSeries correlation(const Pipeline& p, const Anchor& a, const process::BreakPolicy& policy) {
    try {
        return observables::g1_series(p.mps, p.cfg.system, p.cfg.grid.dt, a.step, a.n_tau, policy,
                                      p.cfg.correlate.tail_fraction);
    } catch (const NumericError& e) {
        throw StageError(std::string("correlation evaluation: ") + e.what());
    }
}

int cmd_evolve(const Flags& f, std::ostream& out) {
    const Pipeline p = prepare(f, "evolve");
    const auto traj = full_trajectory(p);
    if (p.cfg.output.csv) {
        auto os = open_output(p.cfg.output.directory / "trajectory.csv");
        process::write_trajectory_csv(os, traj, p.cfg.grid.dt, 0);
    }
    write_stats(p, json::object());
    out << "evolve: " << traj.size() << " states, max bond " << p.mps.max_bond() << " -> "
        << p.cfg.output.directory.string() << '\n';
    return kExitOk;
}

int cmd_correlate(const Flags& f, std::ostream& out) {
    const Pipeline p = prepare(f, "correlate");
    const Anchor a = choose_anchor(p);
    const auto g = correlation(p, a, process::BreakPolicy::none());
    if (p.cfg.output.csv) {
        auto os = open_output(p.cfg.output.directory / "g1.csv");
        observables::write_g1_csv(os, g);
    }
    json extra = anchor_json(a);
    extra["g1_infinity"] = {g.g1_infinity.real(), g.g1_infinity.imag()};
    write_stats(p, extra);
    out << "correlate: anchor step " << a.step << ", " << g.values.size() << " samples -> "
        << p.cfg.output.directory.string() << '\n';
    if (!a.warning.empty()) {
        out << "warning: " << a.warning << '\n';
    }
    return kExitOk;
}

int cmd_spectrum(const Flags& f, std::ostream& out) {
    const Pipeline p = prepare(f, "spectrum");
    const Anchor a = choose_anchor(p);
    const auto& sc = p.cfg.spectrum;
    const auto det = observables::uniform_detunings(sc.detuning_min, sc.detuning_max, sc.detuning_points);
    json metrics = json::object();
    for (const auto kind : sc.policies) {
        const std::string name = observables::to_string(kind);
        const auto g = correlation(p, a, observables::policy_for(kind, a.step));
        const auto s = observables::emission_spectrum(g, det, sc.window_rate);
        if (p.cfg.output.csv) {
            auto gs = open_output(p.cfg.output.directory / ("g1_" + name + ".csv"));
            observables::write_g1_csv(gs, g);
            auto ss = open_output(p.cfg.output.directory / ("spectrum_" + name + ".csv"));
            observables::write_spectrum_csv(ss, s);
        }
        const auto peak = std::max_element(s.values.begin(), s.values.end()) - s.values.begin();
        const double center = s.detunings[static_cast<std::size_t>(peak)];
        json m = {{"sideband_asymmetry", observables::sideband_asymmetry(s, sc.sideband_delta)},
                  {"sideband_delta", sc.sideband_delta},
                  {"peak_detuning", center},
                  {"peak_half_width", sc.peak_half_width},
                  {"g1_infinity", {g.g1_infinity.real(), g.g1_infinity.imag()}}};
        try {
            m["peak_weight_fraction"] = observables::peak_weight_fraction(s, center, sc.peak_half_width);
        } catch (const NumericError&) {
            m["peak_weight_fraction"] = nullptr;
        }
        metrics[name] = m;
        out << "spectrum[" << name << "]: asymmetry " << m["sideband_asymmetry"].get<double>() << '\n';
    }
    json extra = anchor_json(a);
    extra["spectra"] = metrics;
    write_stats(p, extra);
    if (!a.warning.empty()) {
        out << "warning: " << a.warning << '\n';
    }
    return kExitOk;
}

int cmd_benchmark(const Flags& f, std::ostream& out) {
    const json doc = load_document(f);
    const RunConfig cfg = parse_config(doc);
    fs::create_directories(cfg.output.directory);
    std::vector<scaling::BenchCase> cases;
    for (double alpha : cfg.benchmark.alphas) {
        for (double wc : cfg.benchmark.omega_cs) {
            for (std::size_t k : cfg.benchmark.ks) {
                bath::BathSpec b = cfg.bath;
                b.alpha = alpha;
                b.omega_c = wc;
                cases.push_back({b, cfg.grid.dt, k, cfg.lambda_c, cfg.memory_depth});
            }
        }
    }
    scaling::BenchOptions opt;
    opt.schemes = cfg.benchmark.schemes;
    opt.warmup = cfg.benchmark.warmup;
    opt.warmup_k = cfg.benchmark.warmup_k;
    opt.parallel = cfg.benchmark.parallel;
    opt.cross_tolerance = cfg.benchmark.cross_tolerance;
    opt.system = cfg.system;
    const auto recs = scaling::benchmark(cases, opt);
    if (cfg.output.json) {
        auto os = open_output(cfg.output.directory / "bench.jsonl");
        scaling::write_bench_jsonl(os, recs);
    }
    if (cfg.output.csv) {
        auto os = open_output(cfg.output.directory / "bench.csv");
        scaling::write_bench_csv(os, recs);
    }
    std::size_t failed = 0, inconsistent = 0;
    for (const auto& r : recs) {
        failed += r.ok ? 0 : 1;
        inconsistent += r.consistent ? 0 : 1;
    }
    out << "benchmark: " << recs.size() << " records, " << failed << " failed, " << inconsistent
        << " inconsistent -> " << cfg.output.directory.string() << '\n';
    return kExitOk;
}

int cmd_validate(const Flags& f, std::ostream& out) {
    const auto results = run_validation();
    bool ok = true;
    json arr = json::array();
    for (const auto& r : results) {
        print_check(out, r);
        ok = ok && r.passed;
        arr.push_back({{"name", r.name}, {"passed", r.passed}, {"value", r.value}, {"tolerance", r.tolerance},
                       {"detail", r.detail}});
    }
    if (!f.out.empty()) {
        fs::create_directories(f.out);
        open_output(fs::path(f.out) / "validate.json") << json{{"version", TEMPO_VERSION}, {"checks", arr}}.dump(2)
                                                       << '\n';
    }
    out << (ok ? "validate: all checks passed\n" : "validate: FAILED\n");
    return ok ? kExitOk : kExitFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"tempo: process-tensor simulation of a small system in a Gaussian bosonic bath"};
    app.set_version_flag("--version", TEMPO_VERSION);
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "JSON run configuration");
    app.add_option("--out", f.out, "output directory (overrides output.directory)");
    app.add_option("--scheme", f.scheme, "contraction scheme")->check(CLI::IsMember({"local", "nonlocal"}));
    app.add_option("--lambda-c", f.lambda_c, "singular-value cutoff");
    app.add_option("--k", f.k, "number of time steps");
    app.add_option("--dt", f.dt, "time step in 1/Omega");
    app.add_option("--override", f.overrides, "dotted.path=value, value read as JSON (repeatable)");

    const std::vector<std::pair<std::string, std::string>> commands{
        {"evolve", "density-matrix trajectory (trajectory.csv, stats.json)"},
        {"correlate", "two-time correlation g1 at a steady-state or given anchor (g1.csv)"},
        {"spectrum", "emission spectra for the exact, regression and Markovian policies"},
        {"benchmark", "timing sweep of the contraction schemes (bench.jsonl, bench.csv)"},
        {"validate", "desk-scale checks against brute force, exact limits and invariants"}};
    for (const auto& [name, help] : commands) {
        app.add_subcommand(name, help);
    }

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::Success& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitSchema;
    }

    const std::string cmd = app.get_subcommands().front()->get_name();
    try {
        if (cmd == "evolve") {
            return cmd_evolve(f, out);
        }
        if (cmd == "correlate") {
            return cmd_correlate(f, out);
        }
        if (cmd == "spectrum") {
            return cmd_spectrum(f, out);
        }
        if (cmd == "benchmark") {
            return cmd_benchmark(f, out);
        }
        return cmd_validate(f, out);
    } catch (const SchemaError& e) {
        err << "config error at " << e.what() << '\n';
        return kExitSchema;
    } catch (const StageError& e) {
        err << "numeric failure in " << e.what() << '\n';
        return kExitNumeric;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::invalid_argument& e) {
        // ConfigError, DimensionError and friends raised while running a valid-looking config.
        err << "config error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const std::domain_error& e) {
        err << "config error: " << e.what() << '\n';
        return kExitSchema;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailed;
    }
}

}  // namespace tempo::cli
