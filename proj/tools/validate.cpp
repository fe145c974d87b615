#include "validate.hpp"

#include "tempo/bath.hpp"
#include "tempo/liouville.hpp"
#include "tempo/network.hpp"
#include "tempo/oracle.hpp"
#include "tempo/process.hpp"
#include "tempo/scaling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>

namespace tempo::cli {

namespace {

using network::Scheme;

const std::vector<double> kSpinHalf{0.5, -0.5};

std::mt19937_64& rng() {
    static std::mt19937_64 gen(7301);
    return gen;
}

double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

bath::MemoryKernel random_kernel(std::size_t k, double dt, double scale) {
    bath::MemoryKernel ker{dt, {}};
    for (std::size_t l = 0; l <= k; ++l) {
        const double w = scale / (1.0 + 0.3 * static_cast<double>(l));
        ker.eta.push_back({w * uniform(0.1, 1.0), w * uniform(-1.0, 1.0)});
    }
    return ker;
}

bath::BathSpec ohmic(double alpha, double omega_c, double beta) {
    bath::BathSpec b;
    b.alpha = alpha;
    b.omega_c = omega_c;
    b.beta = beta;
    return b;
}

Eigen::MatrixXcd up() {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

double max_abs(const Eigen::MatrixXcd& m) { return m.cwiseAbs().maxCoeff(); }

CheckResult finish(std::string name, double value, double tol, std::string detail = {}) {
    return {std::move(name), value <= tol, value, tol, std::move(detail)};
}

// Compressed MPS shared by the element-wise invariants.
struct Compressed {
    network::InfluenceMPS mps;
    double tol;
};

std::vector<Compressed> compressed_pair() {
    const bath::TimeGrid grid{0.05, 24};
    const auto bset = bath::influence_tensors(bath::memory_kernel(grid, ohmic(0.5, 5.0, 2.0)), kSpinHalf);
    std::vector<Compressed> out;
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        auto m = network::contract(s, bset, grid, {1e-6, {}});
        const double tol = 10.0 * std::sqrt(m.stats.cumulative_discarded) + 1e-11;
        out.push_back({std::move(m), tol});
    }
    return out;
}

}  // namespace

CheckResult check_brute_force() {
    double worst = 0.0;
    for (std::size_t k = 1; k <= 6; ++k) {
        const auto bset = bath::influence_tensors(random_kernel(k, 0.1, 0.4), kSpinHalf);
        const auto ref = oracle::brute_force_influence(bset, k);
        for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
            const auto dense = network::contract(s, bset, {0.1, k}, {0.0, {}}).dense();
            for (std::size_t i = 0; i < ref.data().size(); ++i) {
                worst = std::max(worst, std::abs(dense.data()[i] - ref.data()[i]) / std::abs(ref.data()[i]));
            }
        }
    }
    return finish("brute-force equivalence (k <= 6, lambda_c = 0)", worst, 1e-10, "max relative deviation");
}

CheckResult check_rabi_limit() {
    const double dt = 0.05;
    const std::size_t k = 100;
    const bath::MemoryKernel zero{dt, std::vector<cplx>(k + 1, 0.0)};
    double worst = 0.0;
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        const auto m = network::contract(s, bath::influence_tensors(zero, kSpinHalf), {dt, k}, {1e-6, {}});
        const auto traj = process::density_trajectory(m, process::spin_boson(1.0, 0.0, up()), dt);
        for (std::size_t j = 0; j < traj.size(); ++j) {
            const double t = dt * static_cast<double>(j + 1);
            worst = std::max(worst, std::abs((traj[j](0, 0) - traj[j](1, 1)).real() - std::cos(t)));
        }
    }
    return finish("zero coupling gives cos(t) Rabi oscillations", worst, 1e-10, "max |<sigma_z> - cos t|");
}

CheckResult check_few_mode() {
    oracle::FewModeModel model;
    model.modes = {{0.15, 1.2}};
    model.n_max = 6;
    model.sys = process::spin_boson(1.0, 0.0, up());
    const bath::TimeGrid grid{0.05, 30};
    const auto run = oracle::exact_few_mode_trajectory(model, grid);
    bath::BathSpec spec;
    spec.discrete_modes = model.modes;
    const auto bset = bath::influence_tensors(bath::memory_kernel(grid, spec), kSpinHalf);
    const auto m = network::contract_local(bset, grid, 1e-10);
    const auto traj = process::density_trajectory(m, model.sys, grid.dt);
    double worst = 0.0;
    for (std::size_t j = 1; j <= grid.k; ++j) {
        worst = std::max(worst, max_abs(traj[j - 1] - run.trajectory[j]));
    }
    const Eigen::MatrixXcd sig = process::lowering();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    const std::vector<process::Insertion> ins{{10, sig, id}, {25, sig.adjoint(), id}};
    const cplx ref = oracle::exact_few_mode_correlation(model, {grid.dt, 25}, ins);
    worst = std::max(worst, std::abs(process::multitime_correlation(m, model.sys, grid.dt, ins) - ref));
    return finish("single discrete mode matches exact Fock-space evolution", worst, 1e-3,
                  "trajectory and one two-time correlation");
}

CheckResult check_diagonal_unity() {
    double worst = 0.0;
    for (const auto& c : compressed_pair()) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::size_t> legs(c.mps.k());
            for (auto& a : legs) {
                const std::size_t q = rng()() % 2;
                a = compound_index(q, q, 2);
            }
            worst = std::max(worst, std::abs(c.mps.element(legs) - 1.0) / c.tol);
        }
    }
    return finish("diagonal unity of the influence MPS", worst, 1.0, "deviation in units of 10 sqrt(discarded)");
}

CheckResult check_conjugation() {
    double worst = 0.0;
    for (const auto& c : compressed_pair()) {
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<std::size_t> legs(c.mps.k()), swapped(c.mps.k());
            for (std::size_t n = 0; n < legs.size(); ++n) {
                const std::size_t s = rng()() % 2, r = rng()() % 2;
                legs[n] = compound_index(s, r, 2);
                swapped[n] = compound_index(r, s, 2);
            }
            worst = std::max(worst, std::abs(c.mps.element(swapped) - std::conj(c.mps.element(legs))) / c.tol);
        }
    }
    return finish("s <-> r swap conjugates the influence MPS", worst, 1.0, "deviation in units of 10 sqrt(discarded)");
}

CheckResult check_trace_hermiticity() {
    const double dt = 0.04;
    const std::size_t k = 60;
    const auto bset = bath::influence_tensors(bath::memory_kernel({dt, k}, ohmic(0.7, 10.0, 100.0)), kSpinHalf);
    Eigen::MatrixXcd rho0(2, 2);
    rho0 << 0.7, cplx(0.2, 0.1), cplx(0.2, -0.1), 0.3;
    const auto sys = process::spin_boson(1.0, 0.3, rho0);
    double worst = 0.0;
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        const auto m = network::contract(s, bset, {dt, k}, {1e-6, {}});
        const double tol = 10.0 * std::sqrt(m.stats.cumulative_discarded) + 1e-12;
        for (const auto& rho : process::density_trajectory(m, sys, dt)) {
            const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (rho + rho.adjoint()));
            worst = std::max({worst, std::abs(rho.trace() - 1.0) / tol, max_abs(rho - rho.adjoint()) / 1e-10,
                              -es.eigenvalues().minCoeff() / tol});
        }
    }
    return finish("trace, Hermiticity and positivity of rho", worst, 1.0,
                  "worst of |tr - 1|, min eigenvalue (units of 10 sqrt(discarded)) and |rho - rho^dag| (units of 1e-10)");
}

CheckResult check_causality() {
    const double dt = 0.1;
    const std::size_t k = 12, j = 5;
    const auto bset = bath::influence_tensors(bath::memory_kernel({dt, k}, ohmic(0.3, 4.0, 2.0)), kSpinHalf);
    const auto sys = process::spin_boson(1.0, 0.0, up());
    double worst = 0.0;
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        const auto m = network::contract(s, bset, {dt, k}, {1e-9, {}});
        const process::Evaluator ev(m, sys, dt);
        std::vector<process::Intervention> seq(k, process::Intervention::identity(2));
        const auto a = ev.states(seq);
        seq[j] = process::Intervention::sandwich(process::pauli_x(), process::pauli_x());
        const auto b = ev.states(seq);
        for (std::size_t i = 0; i <= j; ++i) {
            worst = std::max(worst, max_abs(a[i] - b[i]));
        }
    }
    return finish("past states ignore a later intervention", worst, 0.0, "bit-for-bit");
}

CheckResult check_monotone_compression() {
    const bath::TimeGrid grid{0.05, 24};
    const auto bset = bath::influence_tensors(bath::memory_kernel(grid, ohmic(0.5, 5.0, 2.0)), kSpinHalf);
    double violations = 0.0;
    std::string detail = "max bond for lambda_c = 1e-10 .. 1e-1:";
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        std::size_t prev = SIZE_MAX;
        detail += " " + network::to_string(s);
        for (double lc : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1e-1}) {
            const std::size_t b = network::contract(s, bset, grid, {lc, {}}).max_bond();
            detail += " " + std::to_string(b);
            if (b > prev) {
                violations += 1.0;
            }
            prev = b;
        }
    }
    return finish("max bond non-increasing in lambda_c", violations, 0.0, detail);
}

CheckResult check_error_bound() {
    const std::size_t k = 6;
    double worst = 0.0;
    for (int draw = 0; draw < 3; ++draw) {
        const auto ker = random_kernel(k, 0.1, 0.05);
        const auto bset = bath::influence_tensors(ker, kSpinHalf);
        const auto full = oracle::brute_force_influence(bset, k);
        for (std::size_t m = 0; m <= k; ++m) {
            const auto trunc = oracle::brute_force_influence(network::memory_truncate(bset, m), k);
            double err = 0.0;
            for (std::size_t i = 0; i < full.data().size(); ++i) {
                err = std::max(err, std::abs(full.data()[i] / trunc.data()[i] - 1.0));
            }
            const double bound = scaling::error_bound_epsilon(ker, m, k, kSpinHalf);
            worst = std::max(worst, err - bound);
        }
    }
    return finish("memory truncation error within the analytic bound", worst, 1e-14,
                  "max (measured - bound) over depths");
}

std::vector<CheckResult> run_validation() {
    return {check_brute_force(),  check_rabi_limit(),        check_few_mode(),
            check_diagonal_unity(), check_conjugation(),     check_trace_hermiticity(),
            check_causality(),    check_monotone_compression(), check_error_bound()};
}

void print_check(std::ostream& os, const CheckResult& r) {
    os << (r.passed ? "PASS " : "FAIL ") << r.name << "  value=" << std::setprecision(3) << r.value
       << " tol=" << r.tolerance;
    if (!r.detail.empty()) {
        os << "  (" << r.detail << ")";
    }
    os << '\n';
}

}  // namespace tempo::cli
