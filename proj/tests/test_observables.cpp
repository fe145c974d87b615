#include "doctest.h"
#include "support.hpp"

#include "tempo/errors.hpp"
#include "tempo/observables.hpp"
#include "tempo/oracle.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace tempo;
using namespace tempo::observables;

namespace {

network::InfluenceMPS zero_bath(std::size_t k, double dt) {
    bath::MemoryKernel ker{dt, std::vector<cplx>(k + 1, 0.0)};
    return network::contract_local(bath::influence_tensors(ker, tt::spin_half_lambdas()), {dt, k}, 0.0);
}

CorrelationSeries synthetic(double dt, std::size_t n, auto f) {
    CorrelationSeries s;
    for (std::size_t m = 0; m < n; ++m) {
        s.tau.push_back(dt * static_cast<double>(m));
        s.values.push_back(f(s.tau.back()));
    }
    return s;
}

}  // namespace

TEST_CASE("g1: tau = 0 is the excited population at the anchor") {
    const double dt = 0.05;
    const std::size_t k = 40;
    const auto bset = bath::influence_tensors(bath::memory_kernel({dt, k}, tt::ohmic(0.3, 5.0, 2.0)),
                                              tt::spin_half_lambdas());
    const auto m = network::contract_local(bset, {dt, k}, 1e-8);
    const auto sys = process::spin_boson(1.0, 0.2, tt::random_density(2));
    const auto traj = process::density_trajectory(m, sys, dt);
    for (auto kind : {SpectrumKind::exact, SpectrumKind::regression}) {
        const std::size_t anchor = 15;
        const auto s = g1_series(m, sys, dt, anchor, 20, policy_for(kind, anchor));
        CHECK(std::abs(s.values[0] - traj[anchor - 1](0, 0)) < 1e-12);
        CHECK(s.tau.size() == 21);
        CHECK(s.t_anchor == doctest::Approx(anchor * dt));
    }
}

TEST_CASE("g1: free diagonal evolution has unit modulus and the bare frequency") {
    const double dt = 0.05, eps = 1.7;
    const auto m = zero_bath(60, dt);
    const auto sys = process::spin_boson(0.0, eps, tt::up_state());
    const auto s = g1_series(m, sys, dt, 10, 50, process::BreakPolicy::none());
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        CHECK(std::abs(s.values[i] - std::polar(1.0, eps * s.tau[i])) < 1e-12);
    }
}

TEST_CASE("g1: few-mode model matches the exact Fock-space correlation") {
    oracle::FewModeModel model;
    model.modes = {{0.2, 1.3}};
    model.n_max = 6;
    model.sys = process::spin_boson(1.0, 0.4, tt::up_state());
    const bath::TimeGrid grid{0.1, 6};
    bath::BathSpec spec;
    spec.discrete_modes = model.modes;
    const auto bset = bath::influence_tensors(bath::memory_kernel(grid, spec), tt::spin_half_lambdas());
    const auto m = network::contract_local(bset, grid, 0.0);
    const std::size_t anchor = 2;
    const auto s = g1_series(m, model.sys, grid.dt, anchor, 4, process::BreakPolicy::none());
    const Eigen::MatrixXcd sig = process::lowering();
    const Eigen::MatrixXcd id = Eigen::MatrixXcd::Identity(2, 2);
    for (std::size_t mm = 1; mm <= 4; ++mm) {
        const std::vector<process::Insertion> ins{{anchor, sig, id}, {anchor + mm, sig.adjoint(), id}};
        bath::TimeGrid g2{grid.dt, anchor + mm};
        const cplx ref = oracle::exact_few_mode_correlation(model, g2, ins);
        CHECK(std::abs(s.values[mm] - ref) < 1e-3);
    }
}

TEST_CASE("g1: errors and tail mean") {
    const auto m = zero_bath(20, 0.1);
    const auto sys = process::spin_boson(1.0, 0.0, tt::up_state());
    CHECK_THROWS_AS(g1_series(m, sys, 0.1, 15, 6, {}), ConfigError);
    CHECK_THROWS_AS(g1_series(m, sys, 0.1, 5, 5, {}, 0.0), ConfigError);
    const auto s = g1_series(m, sys, 0.1, 0, 19, {}, 0.2);
    cplx mean = (s.values[16] + s.values[17] + s.values[18] + s.values[19]) / 4.0;
    CHECK(std::abs(s.g1_infinity - mean) < 1e-14);
}

TEST_CASE("policies: names and break modes") {
    CHECK(policy_for(SpectrumKind::exact, 5).mode == process::BreakPolicy::Mode::none);
    const auto r = policy_for(SpectrumKind::regression, 5);
    CHECK(r.mode == process::BreakPolicy::Mode::cut_at_times);
    CHECK(r.cuts == std::vector<std::size_t>{5});
    CHECK(policy_for(SpectrumKind::markov, 5).mode == process::BreakPolicy::Mode::every_step);
    for (auto kind : {SpectrumKind::exact, SpectrumKind::regression, SpectrumKind::markov}) {
        CHECK(spectrum_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS(spectrum_kind_from_string("lindblad"), ConfigError);
}

TEST_CASE("steady_state_anchor: constant, Rabi and dephasing trajectories") {
    std::vector<Eigen::MatrixXcd> flat(50, tt::plus_state());
    const auto c = steady_state_anchor(flat);
    CHECK(c.converged);
    CHECK(c.step == 0);

    const double dt = 0.05;
    const auto m = zero_bath(200, dt);
    const auto rabi = process::density_trajectory(m, process::spin_boson(1.0, 0.0, tt::up_state()), dt);
    const auto r = steady_state_anchor(rabi);
    CHECK_FALSE(r.converged);
    CHECK(r.step == rabi.size() - 1);

    // |rho_01| = exp(-g t)/2: the 20-step spread falls below 1e-5 once e^{-g t} (1 - e^{-20 g dt}) < 2e-5.
    const double g = 0.8;
    std::vector<Eigen::MatrixXcd> deph;
    for (std::size_t j = 0; j < 600; ++j) {
        Eigen::MatrixXcd rho = tt::plus_state();
        const double c01 = 0.5 * std::exp(-g * dt * static_cast<double>(j));
        rho(0, 1) = c01;
        rho(1, 0) = c01;
        deph.push_back(rho);
    }
    const auto d = steady_state_anchor(deph);
    CHECK(d.converged);
    const double decay = 1.0 - std::exp(-20.0 * g * dt);
    const double t_star = std::log(0.5 * decay / 1e-5) / g;
    CHECK(std::abs(static_cast<double>(d.step) - t_star / dt) <= 1.0);
    CHECK_THROWS_AS(steady_state_anchor(std::span<const Eigen::MatrixXcd>(flat.data(), 5)), ConfigError);
}

TEST_CASE("emission_spectrum: Lorentzian Fourier pair") {
    const double gamma = 0.5, w0 = 1.3, dt = 0.01;
    const auto s = synthetic(dt, 8001, [&](double t) { return std::exp(cplx(-gamma, -w0) * t); });
    const auto det = uniform_detunings(-4.0, 2.0, 61);
    const Spectrum sp = emission_spectrum(s, det);
    for (std::size_t i = 0; i < det.size(); ++i) {
        const double ref = (1.0 / cplx(gamma, det[i] + w0)).real();
        CHECK(std::abs(sp.values[i] - ref) <= 0.01 * std::abs(ref) + 1e-6);
    }
}

TEST_CASE("emission_spectrum: constant series, linearity and apodization") {
    auto s = synthetic(0.1, 100, [](double) { return cplx(0.3, -0.2); });
    s.g1_infinity = cplx(0.3, -0.2);
    const auto det = uniform_detunings(-3.0, 3.0, 31);
    for (double v : emission_spectrum(s, det).values) {
        CHECK(v == 0.0);
    }
    auto a = synthetic(0.05, 300, [](double t) { return std::exp(cplx(-0.4, 2.0) * t); });
    auto b = synthetic(0.05, 300, [](double t) { return cplx(std::cos(t), 0.3) * std::exp(-0.2 * t); });
    a.g1_infinity = 0.01;
    b.g1_infinity = cplx(0.0, 0.02);
    CorrelationSeries ab = a;
    for (std::size_t i = 0; i < ab.values.size(); ++i) {
        ab.values[i] = 2.0 * a.values[i] - 0.5 * b.values[i];
    }
    ab.g1_infinity = 2.0 * a.g1_infinity - 0.5 * b.g1_infinity;
    const auto sa = emission_spectrum(a, det, 0.1), sb = emission_spectrum(b, det, 0.1), sab = emission_spectrum(ab, det, 0.1);
    for (std::size_t i = 0; i < det.size(); ++i) {
        CHECK(std::abs(sab.values[i] - (2.0 * sa.values[i] - 0.5 * sb.values[i])) < 1e-12);
    }
    CHECK(sa.window_rate == 0.1);
    CorrelationSeries bad = a;
    bad.tau[3] += 0.01;
    CHECK_THROWS_AS(emission_spectrum(bad, det), ConfigError);
    CHECK_THROWS_AS(emission_spectrum(a, std::span<const double>{}), ConfigError);
}

TEST_CASE("emission_spectrum: doubling the window stays within the tail bound") {
    const double dt = 0.02;
    auto f = [](double t) { return cplx(0.1, 0.0) + std::exp(cplx(-0.6, 1.1) * t) * cplx(0.7, 0.2); };
    auto shortw = synthetic(dt, 501, f);
    auto longw = synthetic(dt, 1001, f);
    shortw.g1_infinity = longw.g1_infinity = 0.1;
    const auto det = uniform_detunings(-5.0, 5.0, 41);
    const auto s1 = emission_spectrum(shortw, det), s2 = emission_spectrum(longw, det);
    const double tmax = shortw.tau.back();
    const double bound = std::abs(shortw.values.back() - shortw.g1_infinity) * tmax;
    for (std::size_t i = 0; i < det.size(); ++i) {
        CHECK(std::abs(s1.values[i] - s2.values[i]) <= bound);
    }
}

TEST_CASE("spectrum metrics and CSV output") {
    Spectrum s;
    s.detunings = uniform_detunings(-4.0, 4.0, 9);
    s.values = {0, 0, 0, 1, 2, 1, 3, 3, 0};
    // Above 2: trapezoids on [2,3],[3,4] = 3 + 1.5; below -2: zero.
    CHECK(sideband_asymmetry(s, 2.0) == doctest::Approx(4.5));
    // Total 0.5+1.5+1.5+2+3+1.5 = 10; within |w| <= 1: 1.5 + 1.5 = 3.
    CHECK(peak_weight_fraction(s, 0.0, 1.0) == doctest::Approx(0.3));
    std::ostringstream os;
    write_spectrum_csv(os, s);
    CHECK(os.str().rfind("detuning,S\n-4,0\n", 0) == 0);
    std::ostringstream g;
    write_g1_csv(g, synthetic(0.5, 2, [](double t) { return cplx(t, -t); }));
    CHECK(g.str() == "tau,re_g1,im_g1\n0,0,-0\n0.5,0.5,-0.5\n");
}
