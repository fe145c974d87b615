#include "tempo/oracle.hpp"

#include "tempo/errors.hpp"
#include "tempo/liouville.hpp"

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <functional>

namespace tempo::oracle {

namespace {

constexpr double kMaxEntries = 1 << 20;

void check_size(const bath::InfluenceTensorSet& bset, std::size_t k) {
    if (k == 0) {
        throw ConfigError("oracle: k must be at least 1");
    }
    if (k > bset.max_separation() + 1) {
        throw ConfigError("oracle: influence tensors do not reach separation k - 1");
    }
    if (std::pow(static_cast<double>(bset.d2()), static_cast<double>(k)) > kMaxEntries) {
        throw ConfigError("oracle: (d^2)^k exceeds 2^20");
    }
}

// Factor contributed by leg i given all earlier legs: b_0 diagonal times b_{i-j} couplings.
cplx row_factor(const bath::InfluenceTensorSet& bset, const std::vector<std::size_t>& path, std::size_t i) {
    const auto ai = static_cast<Eigen::Index>(path[i]);
    cplx f = bset.b[0](ai, ai);
    for (std::size_t j = 0; j < i; ++j) {
        f *= bset.b[i - j](ai, static_cast<Eigen::Index>(path[j]));
    }
    return f;
}

}  // namespace

DenseTensor brute_force_influence(const bath::InfluenceTensorSet& bset, std::size_t k) {
    check_size(bset, k);
    const std::size_t d2 = bset.d2();
    DenseTensor out(Shape(k, d2));
    std::vector<std::size_t> path(k, 0);
    for (std::size_t flat = 0; flat < out.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t n = k; n-- > 0;) {
            path[n] = rem % d2;
            rem /= d2;
        }
        cplx f = 1.0;
        for (std::size_t i = 0; i < k; ++i) {
            f *= row_factor(bset, path, i);
        }
        out[flat] = f;
    }
    return out;
}

Eigen::MatrixXcd path_sum_state(const bath::InfluenceTensorSet& bset, const process::SystemSpec& sys, double dt,
                                std::size_t k, std::span<const process::Intervention> seq) {
    check_size(bset, k);
    if (bset.d != sys.d) {
        throw ConfigError("oracle: influence tensors and system disagree on the dimension");
    }
    if (seq.size() != k && seq.size() != k + 1) {
        throw ConfigError("oracle: intervention sequence must have k or k + 1 entries");
    }
    const Eigen::MatrixXcd vh = process::free_half_propagator(sys, dt).v_half;
    const auto d2 = static_cast<Eigen::Index>(bset.d2());

    Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d2);
    std::vector<std::size_t> path(k, 0);
    std::function<void(std::size_t, const Eigen::VectorXcd&, cplx)> walk =
        [&](std::size_t j, const Eigen::VectorXcd& v, cplx f) {
            if (j == k) {
                acc += f * v;
                return;
            }
            const Eigen::VectorXcd pre = vh * (seq[j].matrix * v);
            for (Eigen::Index a = 0; a < d2; ++a) {
                if (pre(a) == cplx(0.0)) {
                    continue;
                }
                path[j] = static_cast<std::size_t>(a);
                Eigen::VectorXcd proj = Eigen::VectorXcd::Zero(d2);
                proj(a) = pre(a);
                walk(j + 1, vh * proj, f * row_factor(bset, path, j));
            }
        };
    walk(0, vectorize(sys.rho0), 1.0);
    if (seq.size() == k + 1) {
        acc = seq[k].matrix * acc;
    }
    return unvectorize(acc, static_cast<Eigen::Index>(sys.d));
}

// ------------------------------- few-mode model --------------------------------

std::size_t FewModeModel::dimension() const {
    double dim = static_cast<double>(sys.d) * std::pow(static_cast<double>(n_max), static_cast<double>(modes.size()));
    return dim > 1e9 ? static_cast<std::size_t>(-1) : static_cast<std::size_t>(dim);
}

void FewModeModel::validate() const {
    sys.validate();
    if (n_max < 2) {
        throw ConfigError("few-mode model: n_max must be at least 2");
    }
    if (dimension() > 4096) {
        throw ConfigError("few-mode model: Hilbert dimension " + std::to_string(dimension()) + " exceeds 4096");
    }
    if (!(beta > 0.0)) {
        throw ConfigError("few-mode model: beta must be positive");
    }
    for (const auto& m : modes) {
        if (!(m.omega > 0.0) || !std::isfinite(std::abs(m.g))) {
            throw ConfigError("few-mode model: modes need omega > 0 and finite coupling");
        }
    }
}

namespace {

struct FullSpace {
    Eigen::MatrixXcd u;     // one-step propagator
    Eigen::MatrixXcd chi0;  // initial product state
    std::size_t bath_dim = 1;
    double leak = 0.0;
};

FullSpace build_full_space(const FewModeModel& model, double dt) {
    model.validate();
    const auto nm = static_cast<Eigen::Index>(model.n_max);
    Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(nm, nm);
    for (Eigen::Index n = 1; n < nm; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    const Eigen::MatrixXcd num = a.adjoint() * a;

    std::size_t bdim = 1;
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
        bdim *= static_cast<std::size_t>(nm);
    }
    const auto bd = static_cast<Eigen::Index>(bdim);
    // Operator acting on mode i only, embedded in the bath space.
    auto embed = [&](const Eigen::MatrixXcd& op, std::size_t i) {
        Eigen::MatrixXcd out = Eigen::MatrixXcd::Identity(1, 1);
        for (std::size_t j = 0; j < model.modes.size(); ++j) {
            const Eigen::MatrixXcd f = j == i ? op : Eigen::MatrixXcd::Identity(nm, nm);
            out = Eigen::kroneckerProduct(out, f).eval();
        }
        return out;
    };

    Eigen::MatrixXcd hb = Eigen::MatrixXcd::Zero(bd, bd);
    Eigen::MatrixXcd coupling = Eigen::MatrixXcd::Zero(bd, bd);
    Eigen::MatrixXcd tau = Eigen::MatrixXcd::Identity(1, 1);
    FullSpace fs;
    fs.bath_dim = bdim;
    for (std::size_t i = 0; i < model.modes.size(); ++i) {
        const auto& m = model.modes[i];
        hb += m.omega * embed(num, i);
        coupling += embed(m.g * a + std::conj(m.g) * a.adjoint(), i);

        Eigen::MatrixXcd gibbs = Eigen::MatrixXcd::Zero(nm, nm);
        if (std::isinf(model.beta)) {
            gibbs(0, 0) = 1.0;
        } else {
            double z = 0.0;
            for (Eigen::Index n = 0; n < nm; ++n) {
                gibbs(n, n) = std::exp(-model.beta * m.omega * static_cast<double>(n));
                z += gibbs(n, n).real();
            }
            gibbs /= z;
            fs.leak = std::max(fs.leak, std::exp(-model.beta * m.omega * static_cast<double>(model.n_max)));
        }
        tau = Eigen::kroneckerProduct(tau, gibbs).eval();
    }
    const auto d = static_cast<Eigen::Index>(model.sys.d);
    const Eigen::MatrixXcd h = Eigen::kroneckerProduct(model.sys.h0, Eigen::MatrixXcd::Identity(bd, bd)).eval() +
                               Eigen::kroneckerProduct(model.sys.s_op, coupling).eval() +
                               Eigen::kroneckerProduct(Eigen::MatrixXcd::Identity(d, d), hb).eval();
    fs.u = (h * cplx(0.0, -dt)).exp();
    fs.chi0 = Eigen::kroneckerProduct(model.sys.rho0, tau).eval();
    return fs;
}

Eigen::MatrixXcd partial_trace(const Eigen::MatrixXcd& chi, std::size_t d, std::size_t bdim) {
    const auto dd = static_cast<Eigen::Index>(d);
    const auto bd = static_cast<Eigen::Index>(bdim);
    Eigen::MatrixXcd rho(dd, dd);
    for (Eigen::Index s = 0; s < dd; ++s) {
        for (Eigen::Index r = 0; r < dd; ++r) {
            rho(s, r) = chi.block(s * bd, r * bd, bd, bd).trace();
        }
    }
    return rho;
}

Eigen::MatrixXcd apply_insertion(const Eigen::MatrixXcd& chi, const process::Insertion& ins, std::size_t bdim) {
    const auto bd = static_cast<Eigen::Index>(bdim);
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(bd, bd);
    const Eigen::MatrixXcd l = Eigen::kroneckerProduct(ins.left, id).eval();
    const Eigen::MatrixXcd r = Eigen::kroneckerProduct(ins.right, id).eval();
    return l * chi * r.adjoint();
}

}  // namespace

FewModeRun exact_few_mode_trajectory(const FewModeModel& model, const bath::TimeGrid& grid,
                                     std::span<const process::Insertion> insertions) {
    grid.validate();
    const FullSpace fs = build_full_space(model, grid.dt);
    for (std::size_t i = 0; i < insertions.size(); ++i) {
        if (insertions[i].step > grid.k || (i > 0 && insertions[i].step <= insertions[i - 1].step)) {
            throw ConfigError("oracle: insertion steps must be strictly increasing and within the grid");
        }
    }
    FewModeRun run;
    run.thermal_leak = fs.leak;
    run.truncation_warning = fs.leak > 1e-6;
    Eigen::MatrixXcd chi = fs.chi0;
    run.trajectory.push_back(partial_trace(chi, model.sys.d, fs.bath_dim));
    std::size_t next = 0;
    for (std::size_t j = 1; j <= grid.k; ++j) {
        if (next < insertions.size() && insertions[next].step == j - 1) {
            chi = apply_insertion(chi, insertions[next++], fs.bath_dim);
        }
        const cplx before = chi.trace();
        chi = fs.u * chi * fs.u.adjoint();
        run.max_norm_drift = std::max(run.max_norm_drift, std::abs(chi.trace() - before));
        run.trajectory.push_back(partial_trace(chi, model.sys.d, fs.bath_dim));
    }
    return run;
}

cplx exact_few_mode_correlation(const FewModeModel& model, const bath::TimeGrid& grid,
                                std::span<const process::Insertion> insertions) {
    const FewModeRun run = exact_few_mode_trajectory(model, grid, insertions);
    Eigen::MatrixXcd rho = run.trajectory.back();
    if (!insertions.empty() && insertions.back().step == grid.k) {
        rho = insertions.back().left * rho * insertions.back().right.adjoint();
    }
    return rho.trace();
}

}  // namespace tempo::oracle
