// observables.hpp: two-time correlation g1, steady-state detection and emission spectra.
#pragma once

#include "tempo/process.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace tempo::observables {

struct CorrelationSeries {
    double t_anchor = 0.0;
    std::vector<double> tau;   // 0, dt, 2 dt, ...
    std::vector<cplx> values;  // <sigma^dag(t + tau) sigma(t)>
    cplx g1_infinity{0.0, 0.0};
};

struct Spectrum {
    std::vector<double> detunings;
    std::vector<double> values;
    double window_rate = 0.0;  // exponential apodization exp(-rate tau)
};

/// Exact process, regression theorem (bath restarted at the anchor), or Markovian (restarted every step).
enum class SpectrumKind { exact, regression, markov };

std::string to_string(SpectrumKind kind);
SpectrumKind spectrum_kind_from_string(const std::string& name);
process::BreakPolicy policy_for(SpectrumKind kind, std::size_t anchor_step);

/// g1 with sigma = process::lowering() at anchor_step and sigma^dag at anchor_step + m, m = 0..n_tau.
/// g1_infinity is the mean over the final tail_fraction of samples (at least one).
CorrelationSeries g1_series(const network::InfluenceMPS& fmps, const process::SystemSpec& sys, double dt,
                            std::size_t anchor_step, std::size_t n_tau, const process::BreakPolicy& policy,
                            double tail_fraction = 0.1);

struct SteadyState {
    std::size_t step = 0;
    bool converged = false;
};

/// Earliest step s such that every window [s', s' + window] with s' >= s has all entries
/// within threshold of rho_{s'}. Falls back to the last step, unconverged.
SteadyState steady_state_anchor(std::span<const Eigen::MatrixXcd> trajectory, std::size_t window = 20,
                                double threshold = 1e-5);

/// S(w) = Re sum_m c_m (g1(tau_m) - g1_inf) exp(-(rate + i w) tau_m) dtau, trapezoid weights c_m.
Spectrum emission_spectrum(const CorrelationSeries& series, std::span<const double> detunings,
                           double window_rate = 0.0);

std::vector<double> uniform_detunings(double lo, double hi, std::size_t n);

/// Trapezoid integral of S over detunings above delta minus that below -delta.
double sideband_asymmetry(const Spectrum& s, double delta);
/// Fraction of the integrated spectrum within |w - center| <= half_width.
double peak_weight_fraction(const Spectrum& s, double center, double half_width);

void write_g1_csv(std::ostream& os, const CorrelationSeries& series);
void write_spectrum_csv(std::ostream& os, const Spectrum& spectrum);

}  // namespace tempo::observables
