#include "config.hpp"

#include "tempo/errors.hpp"

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>

namespace tempo::cli {

namespace {

using nlohmann::json;

// A JSON object together with its dotted path; every accessor reports errors against the path.
class Node {
public:
    Node(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) {
            throw SchemaError(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }
    const json& raw(const std::string& key) const { return j_.at(key); }

    Node child(const std::string& key) const {
        static const json empty = json::object();
        return has(key) ? Node(j_.at(key), at(key)) : Node(empty, at(key));
    }

    void allow(std::initializer_list<const char*> keys) const {
        const std::set<std::string> ok(keys.begin(), keys.end());
        for (const auto& [key, value] : j_.items()) {
            if (!ok.contains(key)) {
                std::string list;
                for (const auto& k : ok) {
                    list += (list.empty() ? "" : ", ") + k;
                }
                throw SchemaError(at(key), "unknown field (expected one of: " + list + ")");
            }
        }
    }

    double number(const std::string& key, double fallback) const {
        return has(key) ? number_of(raw(key), at(key)) : fallback;
    }
    double number(const std::string& key) const {
        require(key);
        return number_of(raw(key), at(key));
    }
    std::size_t count(const std::string& key, std::size_t fallback) const {
        return has(key) ? count_of(raw(key), at(key)) : fallback;
    }
    std::size_t count(const std::string& key) const {
        require(key);
        return count_of(raw(key), at(key));
    }
    bool flag(const std::string& key, bool fallback) const {
        if (!has(key)) {
            return fallback;
        }
        if (!raw(key).is_boolean()) {
            throw SchemaError(at(key), "expected true or false");
        }
        return raw(key).get<bool>();
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        if (!has(key)) {
            return fallback;
        }
        if (!raw(key).is_string()) {
            throw SchemaError(at(key), "expected a string");
        }
        return raw(key).get<std::string>();
    }
    const json& array(const std::string& key) const {
        if (!raw(key).is_array()) {
            throw SchemaError(at(key), "expected an array");
        }
        return raw(key);
    }

    static double number_of(const json& v, const std::string& path) {
        if (!v.is_number()) {
            throw SchemaError(path, "expected a number");
        }
        const double x = v.get<double>();
        if (!std::isfinite(x)) {
            throw SchemaError(path, "expected a finite number");
        }
        return x;
    }
    static std::size_t count_of(const json& v, const std::string& path) {
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
            throw SchemaError(path, "expected a non-negative integer");
        }
        return v.get<std::size_t>();
    }

private:
    void require(const std::string& key) const {
        if (!has(key)) {
            throw SchemaError(at(key), "required field is missing");
        }
    }

    const json& j_;
    std::string path_;
};

// {"re": [[...]], "im": [[...]]} with "im" optional.
Eigen::MatrixXcd matrix_of(const json& v, const std::string& path, std::size_t d) {
    const Node n(v, path);
    n.allow({"re", "im"});
    const auto n_ = static_cast<Eigen::Index>(d);
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
    for (const char* part : {"re", "im"}) {
        if (!n.has(part)) {
            if (std::string(part) == "re") {
                throw SchemaError(n.at("re"), "required field is missing");
            }
            continue;
        }
        const json& rows = n.array(part);
        if (rows.size() != d) {
            throw SchemaError(n.at(part), "expected " + std::to_string(d) + " rows");
        }
        for (std::size_t i = 0; i < d; ++i) {
            const std::string rp = n.at(part) + "[" + std::to_string(i) + "]";
            if (!rows[i].is_array() || rows[i].size() != d) {
                throw SchemaError(rp, "expected a row of " + std::to_string(d) + " numbers");
            }
            for (std::size_t j = 0; j < d; ++j) {
                const double x = Node::number_of(rows[i][j], rp + "[" + std::to_string(j) + "]");
                auto& e = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
                e += std::string(part) == "re" ? cplx(x, 0.0) : cplx(0.0, x);
            }
        }
    }
    return m;
}

Eigen::MatrixXcd named_state(const std::string& name, const std::string& path) {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
    if (name == "up") {
        rho(0, 0) = 1.0;
    } else if (name == "down") {
        rho(1, 1) = 1.0;
    } else if (name == "plus" || name == "minus") {
        const double s = name == "plus" ? 0.5 : -0.5;
        rho << 0.5, s, s, 0.5;
    } else if (name == "mixed") {
        rho(0, 0) = rho(1, 1) = 0.5;
    } else {
        throw SchemaError(path, "unknown state '" + name + "' (expected up, down, plus, minus or mixed)");
    }
    return rho;
}

process::SystemSpec parse_system(const Node& n) {
    n.allow({"d", "omega", "epsilon", "h0", "s_eigenvalues", "rho0"});
    const std::size_t d = n.count("d", 2);
    if (d == 0) {
        throw SchemaError(n.at("d"), "must be >= 1");
    }
    process::SystemSpec sys;
    if (d == 2) {
        sys = process::spin_boson(n.number("omega", 1.0), n.number("epsilon", 0.0), named_state("up", ""));
    } else {
        sys.d = d;
        sys.h0 = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        if (n.has("omega") || n.has("epsilon")) {
            throw SchemaError(n.at(n.has("omega") ? "omega" : "epsilon"), "only valid for d = 2; give h0 instead");
        }
    }
    if (n.has("h0")) {
        if (n.has("omega") || n.has("epsilon")) {
            throw SchemaError(n.at("h0"), "give either h0 or omega/epsilon, not both");
        }
        sys.h0 = matrix_of(n.raw("h0"), n.at("h0"), d);
    }
    if (n.has("s_eigenvalues")) {
        const json& ev = n.array("s_eigenvalues");
        if (ev.size() != d) {
            throw SchemaError(n.at("s_eigenvalues"), "expected " + std::to_string(d) + " values");
        }
        sys.s_op = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) {
            sys.s_op(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) =
                Node::number_of(ev[i], n.at("s_eigenvalues") + "[" + std::to_string(i) + "]");
        }
    } else if (d != 2) {
        throw SchemaError(n.at("s_eigenvalues"), "required when d != 2");
    }
    if (n.has("rho0")) {
        const json& r = n.raw("rho0");
        if (r.is_string()) {
            if (d != 2) {
                throw SchemaError(n.at("rho0"), "named states need d = 2");
            }
            sys.rho0 = named_state(r.get<std::string>(), n.at("rho0"));
        } else {
            sys.rho0 = matrix_of(r, n.at("rho0"), d);
        }
    } else if (d != 2) {
        throw SchemaError(n.at("rho0"), "required when d != 2");
    }
    try {
        sys.validate();
    } catch (const std::exception& e) {
        throw SchemaError("system", e.what());
    }
    return sys;
}

bath::BathSpec parse_bath(const Node& n) {
    n.allow({"alpha", "omega_c", "nu", "T", "modes", "quadrature"});
    bath::BathSpec b;
    b.alpha = n.number("alpha", 0.0);
    b.omega_c = n.number("omega_c", 1.0);
    b.nu = n.number("nu", 1.0);
    const double t = n.number("T", 0.0);
    if (t < 0.0) {
        throw SchemaError(n.at("T"), "temperature must be >= 0");
    }
    b.beta = t == 0.0 ? std::numeric_limits<double>::infinity() : 1.0 / t;
    if (n.has("modes")) {
        const json& modes = n.array("modes");
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const Node m(modes[i], n.at("modes") + "[" + std::to_string(i) + "]");
            m.allow({"g", "g_im", "omega"});
            b.discrete_modes.push_back({cplx(m.number("g"), m.number("g_im", 0.0)), m.number("omega")});
        }
    }
    const Node q = n.child("quadrature");
    q.allow({"gl_nodes", "cell_panels", "rel_tol", "max_depth"});
    b.quad.gl_nodes = static_cast<int>(q.count("gl_nodes", static_cast<std::size_t>(b.quad.gl_nodes)));
    b.quad.cell_panels = static_cast<int>(q.count("cell_panels", static_cast<std::size_t>(b.quad.cell_panels)));
    b.quad.rel_tol = q.number("rel_tol", b.quad.rel_tol);
    b.quad.max_depth = static_cast<unsigned>(q.count("max_depth", b.quad.max_depth));
    try {
        b.validate();
    } catch (const std::exception& e) {
        std::string msg = e.what();
        std::string field = "bath";
        for (const char* key : {"alpha", "omega_c", "nu", "beta", "quadrature", "discrete mode"}) {
            if (msg.find(key) != std::string::npos) {
                field = std::string(key) == "beta" ? n.at("T")
                        : std::string(key) == "discrete mode" ? n.at("modes")
                                                               : n.at(key);
                break;
            }
        }
        throw SchemaError(field, msg);
    }
    return b;
}

observables::SpectrumKind kind_of(const json& v, const std::string& path) {
    if (!v.is_string()) {
        throw SchemaError(path, "expected a policy name");
    }
    try {
        return observables::spectrum_kind_from_string(v.get<std::string>());
    } catch (const ConfigError& e) {
        throw SchemaError(path, e.what());
    }
}

network::Scheme scheme_of(const std::string& name, const std::string& path) {
    try {
        return network::scheme_from_string(name);
    } catch (const std::exception& e) {
        throw SchemaError(path, e.what());
    }
}

}  // namespace

RunConfig parse_config(const json& doc) {
    const Node root(doc, "");
    root.allow({"system", "bath", "grid", "solver", "task", "output"});
    RunConfig c;
    c.system = parse_system(root.child("system"));
    c.bath = parse_bath(root.child("bath"));

    const Node grid = root.child("grid");
    grid.allow({"dt", "k"});
    c.grid = {grid.number("dt"), grid.count("k")};
    if (!(c.grid.dt > 0.0)) {
        throw SchemaError(grid.at("dt"), "must be > 0");
    }
    if (c.grid.k == 0) {
        throw SchemaError(grid.at("k"), "must be >= 1");
    }

    const Node solver = root.child("solver");
    solver.allow({"scheme", "lambda_c", "memory_depth"});
    c.scheme = scheme_of(solver.text("scheme", "local"), solver.at("scheme"));
    c.lambda_c = solver.number("lambda_c", 1e-6);
    if (c.lambda_c < 0.0 || c.lambda_c >= 1.0) {
        throw SchemaError(solver.at("lambda_c"), "must lie in [0, 1)");
    }
    if (solver.has("memory_depth")) {
        c.memory_depth = solver.count("memory_depth");
    }

    const Node task = root.child("task");
    task.allow({"correlate", "spectrum", "benchmark"});

    const Node cor = task.child("correlate");
    cor.allow({"anchor", "n_tau", "tail_fraction", "steady_window", "steady_threshold"});
    if (cor.has("anchor")) {
        const json& a = cor.raw("anchor");
        if (a.is_string()) {
            if (a.get<std::string>() != "steady") {
                throw SchemaError(cor.at("anchor"), "expected a step index or \"steady\"");
            }
        } else {
            c.correlate.anchor = Node::count_of(a, cor.at("anchor"));
        }
    }
    if (cor.has("n_tau")) {
        c.correlate.n_tau = cor.count("n_tau");
        if (*c.correlate.n_tau == 0) {
            throw SchemaError(cor.at("n_tau"), "must be >= 1");
        }
    }
    c.correlate.tail_fraction = cor.number("tail_fraction", c.correlate.tail_fraction);
    if (!(c.correlate.tail_fraction > 0.0 && c.correlate.tail_fraction <= 1.0)) {
        throw SchemaError(cor.at("tail_fraction"), "must lie in (0, 1]");
    }
    c.correlate.steady_window = cor.count("steady_window", c.correlate.steady_window);
    c.correlate.steady_threshold = cor.number("steady_threshold", c.correlate.steady_threshold);
    if (c.correlate.steady_window == 0) {
        throw SchemaError(cor.at("steady_window"), "must be >= 1");
    }
    if (c.correlate.anchor && c.correlate.n_tau && *c.correlate.anchor + *c.correlate.n_tau > c.grid.k) {
        throw SchemaError(cor.at("n_tau"), "anchor + n_tau exceeds grid.k = " + std::to_string(c.grid.k));
    }

    const Node sp = task.child("spectrum");
    sp.allow({"policies", "detuning_min", "detuning_max", "detuning_points", "window_rate", "sideband_delta",
              "peak_half_width"});
    if (sp.has("policies")) {
        const json& p = sp.array("policies");
        if (p.empty()) {
            throw SchemaError(sp.at("policies"), "needs at least one policy");
        }
        c.spectrum.policies.clear();
        for (std::size_t i = 0; i < p.size(); ++i) {
            c.spectrum.policies.push_back(kind_of(p[i], sp.at("policies") + "[" + std::to_string(i) + "]"));
        }
    }
    c.spectrum.detuning_min = sp.number("detuning_min", c.spectrum.detuning_min);
    c.spectrum.detuning_max = sp.number("detuning_max", c.spectrum.detuning_max);
    c.spectrum.detuning_points = sp.count("detuning_points", c.spectrum.detuning_points);
    if (!(c.spectrum.detuning_max > c.spectrum.detuning_min)) {
        throw SchemaError(sp.at("detuning_max"), "must exceed detuning_min");
    }
    if (c.spectrum.detuning_points < 2) {
        throw SchemaError(sp.at("detuning_points"), "must be >= 2");
    }
    c.spectrum.window_rate = sp.number("window_rate", c.spectrum.window_rate);
    if (c.spectrum.window_rate < 0.0) {
        throw SchemaError(sp.at("window_rate"), "must be >= 0");
    }
    c.spectrum.sideband_delta = sp.number("sideband_delta", c.spectrum.sideband_delta);
    c.spectrum.peak_half_width = sp.number("peak_half_width", c.spectrum.peak_half_width);
    if (!(c.spectrum.peak_half_width > 0.0)) {
        throw SchemaError(sp.at("peak_half_width"), "must be > 0");
    }

    const Node bm = task.child("benchmark");
    bm.allow({"alpha", "omega_c", "k", "schemes", "warmup", "warmup_k", "parallel", "cross_tolerance"});
    auto numbers = [&](const char* key, double fallback) {
        std::vector<double> out;
        if (!bm.has(key)) {
            out.push_back(fallback);
            return out;
        }
        const json& a = bm.array(key);
        for (std::size_t i = 0; i < a.size(); ++i) {
            out.push_back(Node::number_of(a[i], bm.at(key) + "[" + std::to_string(i) + "]"));
        }
        if (out.empty()) {
            throw SchemaError(bm.at(key), "needs at least one value");
        }
        return out;
    };
    c.benchmark.alphas = numbers("alpha", c.bath.alpha);
    c.benchmark.omega_cs = numbers("omega_c", c.bath.omega_c);
    for (double k : numbers("k", static_cast<double>(c.grid.k))) {
        if (k < 1.0 || k != std::floor(k)) {
            throw SchemaError(bm.at("k"), "expected positive integers");
        }
        c.benchmark.ks.push_back(static_cast<std::size_t>(k));
    }
    if (bm.has("schemes")) {
        const json& s = bm.array("schemes");
        c.benchmark.schemes.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string p = bm.at("schemes") + "[" + std::to_string(i) + "]";
            if (!s[i].is_string()) {
                throw SchemaError(p, "expected a scheme name");
            }
            c.benchmark.schemes.push_back(scheme_of(s[i].get<std::string>(), p));
        }
        if (c.benchmark.schemes.empty()) {
            throw SchemaError(bm.at("schemes"), "needs at least one scheme");
        }
    }
    c.benchmark.warmup = bm.flag("warmup", c.benchmark.warmup);
    c.benchmark.warmup_k = bm.count("warmup_k", c.benchmark.warmup_k);
    c.benchmark.parallel = bm.flag("parallel", c.benchmark.parallel);
    c.benchmark.cross_tolerance = bm.number("cross_tolerance", c.benchmark.cross_tolerance);

    const Node out = root.child("output");
    out.allow({"directory", "formats"});
    c.output.directory = out.text("directory", c.output.directory.string());
    if (out.has("formats")) {
        c.output.csv = c.output.json = c.output.mps = false;
        const json& f = out.array("formats");
        for (std::size_t i = 0; i < f.size(); ++i) {
            const std::string p = out.at("formats") + "[" + std::to_string(i) + "]";
            const std::string name = f[i].is_string() ? f[i].get<std::string>() : "";
            if (name == "csv") {
                c.output.csv = true;
            } else if (name == "json") {
                c.output.json = true;
            } else if (name == "mps") {
                c.output.mps = true;
            } else {
                throw SchemaError(p, "expected csv, json or mps");
            }
        }
    }
    return c;
}

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw SchemaError("--override", "expected key=value, got '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    json parsed = json::parse(value, nullptr, false);
    if (parsed.is_discarded()) {
        parsed = value;
    }
    json* node = &doc;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw SchemaError(key, "empty path component in override");
        }
        if (!node->is_object()) {
            if (!node->is_null()) {
                throw SchemaError(key.substr(0, start == 0 ? 0 : start - 1), "override descends into a non-object");
            }
            *node = json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    *node = std::move(parsed);
}

std::string config_hash(const json& doc) {
    std::uint64_t h = 14695981039346656037ULL;
    for (unsigned char ch : doc.dump()) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace tempo::cli
