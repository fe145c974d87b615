#include "tempo/observables.hpp"

#include "tempo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>

namespace tempo::observables {

std::string to_string(SpectrumKind kind) {
    switch (kind) {
        case SpectrumKind::exact:
            return "exact";
        case SpectrumKind::regression:
            return "regression";
        case SpectrumKind::markov:
            return "markov";
    }
    return "exact";
}

SpectrumKind spectrum_kind_from_string(const std::string& name) {
    if (name == "exact") {
        return SpectrumKind::exact;
    }
    if (name == "regression") {
        return SpectrumKind::regression;
    }
    if (name == "markov") {
        return SpectrumKind::markov;
    }
    throw ConfigError("unknown spectrum policy '" + name + "' (expected exact, regression or markov)");
}

process::BreakPolicy policy_for(SpectrumKind kind, std::size_t anchor_step) {
    switch (kind) {
        case SpectrumKind::regression:
            return process::BreakPolicy::cut_at({anchor_step});
        case SpectrumKind::markov:
            return process::BreakPolicy::every_step();
        case SpectrumKind::exact:
            break;
    }
    return process::BreakPolicy::none();
}

CorrelationSeries g1_series(const network::InfluenceMPS& fmps, const process::SystemSpec& sys, double dt,
                            std::size_t anchor_step, std::size_t n_tau, const process::BreakPolicy& policy,
                            double tail_fraction) {
    if (anchor_step + n_tau > fmps.k()) {
        throw ConfigError("g1_series: anchor " + std::to_string(anchor_step) + " + n_tau " + std::to_string(n_tau) +
                          " exceeds the " + std::to_string(fmps.k()) + "-step grid");
    }
    if (!(tail_fraction > 0.0 && tail_fraction <= 1.0)) {
        throw ConfigError("g1_series: tail fraction must lie in (0, 1]");
    }
    if (sys.d != 2) {
        throw ConfigError("g1_series: raising/lowering operators need d = 2");
    }
    const process::Evaluator ev(fmps, sys, dt, policy);
    const Eigen::MatrixXcd sigma = process::lowering();
    const Eigen::MatrixXcd sigma_dag = sigma.adjoint();

    std::vector<process::Intervention> seq(anchor_step + 1, process::Intervention::identity(sys.d));
    seq[anchor_step] = process::Intervention::sandwich(sigma, Eigen::MatrixXcd::Identity(2, 2));
    const auto states = ev.states(seq);

    CorrelationSeries out;
    out.t_anchor = dt * static_cast<double>(anchor_step);
    out.tau.reserve(n_tau + 1);
    out.values.reserve(n_tau + 1);
    out.tau.push_back(0.0);
    out.values.push_back((sigma_dag * sigma * states[anchor_step]).trace());
    for (std::size_t m = 1; m <= n_tau; ++m) {
        out.tau.push_back(dt * static_cast<double>(m));
        out.values.push_back((sigma_dag * states[anchor_step + m]).trace());
    }
    const auto n = out.values.size();
    const auto tail = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(tail_fraction * static_cast<double>(n))));
    cplx acc = 0.0;
    for (std::size_t i = n - tail; i < n; ++i) {
        acc += out.values[i];
    }
    out.g1_infinity = acc / static_cast<double>(tail);
    return out;
}

SteadyState steady_state_anchor(std::span<const Eigen::MatrixXcd> trajectory, std::size_t window, double threshold) {
    const std::size_t n = trajectory.size();
    if (n < 10) {
        throw ConfigError("steady_state_anchor: trajectory needs at least 10 states");
    }
    const std::size_t w = std::min(window, n - 1);
    auto settled = [&](std::size_t s) {
        for (std::size_t j = s + 1; j <= s + w; ++j) {
            if ((trajectory[j] - trajectory[s]).cwiseAbs().maxCoeff() >= threshold) {
                return false;
            }
        }
        return true;
    };
    // Walk back from the last full window while windows stay settled.
    std::size_t s = n - 1 - w;
    if (!settled(s)) {
        return {n - 1, false};
    }
    while (s > 0 && settled(s - 1)) {
        --s;
    }
    return {s, true};
}

Spectrum emission_spectrum(const CorrelationSeries& series, std::span<const double> detunings, double window_rate) {
    const std::size_t n = series.values.size();
    if (n < 2 || series.tau.size() != n) {
        throw ConfigError("emission_spectrum: need at least two samples on a matching tau grid");
    }
    if (detunings.empty()) {
        throw ConfigError("emission_spectrum: empty detuning grid");
    }
    if (!(window_rate >= 0.0)) {
        throw ConfigError("emission_spectrum: apodization rate must be >= 0");
    }
    const double h = series.tau[1] - series.tau[0];
    for (std::size_t m = 1; m < n; ++m) {
        if (std::abs(series.tau[m] - series.tau[m - 1] - h) > 1e-9 * h) {
            throw ConfigError("emission_spectrum: tau grid is not uniform");
        }
    }
    std::vector<cplx> f(n);
    for (std::size_t m = 0; m < n; ++m) {
        const double wgt = (m == 0 || m + 1 == n) ? 0.5 * h : h;
        f[m] = wgt * (series.values[m] - series.g1_infinity) * std::exp(-window_rate * series.tau[m]);
    }
    Spectrum out;
    out.window_rate = window_rate;
    out.detunings.assign(detunings.begin(), detunings.end());
    out.values.reserve(detunings.size());
    for (double w : detunings) {
        cplx acc = 0.0;
        for (std::size_t m = 0; m < n; ++m) {
            acc += f[m] * std::polar(1.0, -w * series.tau[m]);
        }
        if (!std::isfinite(acc.real())) {
            throw NumericError("emission_spectrum: non-finite value");
        }
        out.values.push_back(acc.real());
    }
    return out;
}

std::vector<double> uniform_detunings(double lo, double hi, std::size_t n) {
    if (n < 2 || !(hi > lo)) {
        throw ConfigError("uniform_detunings: need n >= 2 and hi > lo");
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) {
        w[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    }
    return w;
}

namespace {

// Trapezoid integral of S restricted to detunings where keep(w) holds.
template <class Pred>
double integrate_where(const Spectrum& s, Pred keep) {
    double acc = 0.0;
    for (std::size_t i = 1; i < s.detunings.size(); ++i) {
        const double a = s.detunings[i - 1], b = s.detunings[i];
        if (keep(a) && keep(b)) {
            acc += 0.5 * (b - a) * (s.values[i - 1] + s.values[i]);
        }
    }
    return acc;
}

}  // namespace

double sideband_asymmetry(const Spectrum& s, double delta) {
    return integrate_where(s, [&](double w) { return w >= delta; }) -
           integrate_where(s, [&](double w) { return w <= -delta; });
}

double peak_weight_fraction(const Spectrum& s, double center, double half_width) {
    const double total = integrate_where(s, [](double) { return true; });
    if (total == 0.0) {
        throw NumericError("peak_weight_fraction: spectrum integrates to zero");
    }
    return integrate_where(s, [&](double w) { return std::abs(w - center) <= half_width; }) / total;
}

void write_g1_csv(std::ostream& os, const CorrelationSeries& series) {
    os << "tau,re_g1,im_g1\n" << std::setprecision(17);
    for (std::size_t m = 0; m < series.values.size(); ++m) {
        os << series.tau[m] << ',' << series.values[m].real() << ',' << series.values[m].imag() << '\n';
    }
}

void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum) {
    os << "detuning,S\n" << std::setprecision(17);
    for (std::size_t i = 0; i < spectrum.values.size(); ++i) {
        os << spectrum.detunings[i] << ',' << spectrum.values[i] << '\n';
    }
}

}  // namespace tempo::observables
