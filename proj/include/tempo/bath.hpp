// bath.hpp: Gaussian bosonic bath, with its spectral density, auto-correlation function,
// discretized memory kernel and the influence tensors built from it.
//
// Units: frequencies in Omega, times in 1/Omega, hbar = k_B = 1.
#pragma once

#include "tempo/tensor.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace tempo::bath {

struct QuadratureControls {
    // Gauss-Legendre nodes per half cell for the memory-kernel time integrals.
    int gl_nodes = 24;
    // Sub-panels per cell (each gets gl_nodes nodes).
    int cell_panels = 1;
    // Relative tolerance for the frequency integral of C(t).
    double rel_tol = 1e-10;
    // Maximum bisection depth of the adaptive Gauss-Kronrod panels.
    unsigned max_depth = 12;
};

struct DiscreteMode {
    cplx g;         // coupling g_n
    double omega;   // mode frequency omega_n > 0
};

/// J(w) = (alpha w_c / 2) (w / w_c)^nu exp(-w / w_c), or a delta comb when discrete_modes is set.
struct BathSpec {
    double alpha = 0.0;
    double omega_c = 1.0;
    double nu = 1.0;
    double beta = std::numeric_limits<double>::infinity();
    std::vector<DiscreteMode> discrete_modes;
    QuadratureControls quad{};

    bool zero_temperature() const noexcept { return beta == std::numeric_limits<double>::infinity(); }
    bool is_discrete() const noexcept { return !discrete_modes.empty(); }
    void validate() const;
};

struct TimeGrid {
    double dt = 0.1;
    std::size_t k = 1;

    double t_max() const noexcept { return dt * static_cast<double>(k); }
    void validate() const;
};

/// eta[l], l = 0..k: double integrals of C over grid cells l steps apart.
struct MemoryKernel {
    double dt = 0.0;
    std::vector<cplx> eta;

    std::size_t size() const noexcept { return eta.size(); }
};

/// Influence tensors b_l as d^2 x d^2 matrices over compound indices (row: later leg, column: earlier leg).
struct InfluenceTensorSet {
    std::size_t d = 0;
    double dt = 0.0;
    std::vector<double> lambdas;
    std::vector<Eigen::MatrixXcd> b;
    // Largest separation whose tensor is not identically one; b_l for l > depth are all-ones.
    std::size_t depth = 0;

    std::size_t d2() const noexcept { return d * d; }
    std::size_t max_separation() const noexcept { return b.empty() ? 0 : b.size() - 1; }
};

double spectral_density(double omega, const BathSpec& spec);

/// (omega_n, |g_n|^2) pairs of a delta-comb bath; empty for the continuum form.
std::vector<std::pair<double, double>> spectral_weights(const BathSpec& spec);

/// C(t) = (1/pi) int_0^inf J(w) cosh(w(beta/2 - i t)) / sinh(beta w / 2) dw by adaptive quadrature.
/// A delta-comb bath collapses to sum_n |g_n|^2 [coth(beta w_n / 2) cos(w_n t) - i sin(w_n t)].
cplx correlation_quadrature(double t, const BathSpec& spec);

/// Closed-form Ohmic (nu = 1) correlation function at finite temperature.
cplx correlation_analytic_ohmic(double t, const BathSpec& spec);

/// Fastest exact route for the given spec: delta comb, Ohmic closed form, or quadrature.
cplx correlation(double t, const BathSpec& spec);

/// Trigamma function psi'(z) for complex z off the non-positive integers.
cplx polygamma1(cplx z);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussLegendreRule& gauss_legendre(int n);

MemoryKernel memory_kernel(const TimeGrid& grid, const BathSpec& spec);

/// Same cell integrals for an arbitrary correlation function.
MemoryKernel memory_kernel(const TimeGrid& grid, const std::function<cplx(double)>& corr,
                           const QuadratureControls& quad = {});

/// [b_l]^{a_i a_j} = exp(-(l_{s_i} - l_{r_i}) (eta_l l_{s_j} - conj(eta_l) l_{r_j})).
InfluenceTensorSet influence_tensors(const MemoryKernel& kernel, std::span<const double> lambdas);

void write_kernel_csv(std::ostream& os, const MemoryKernel& kernel);
void write_influence_csv(std::ostream& os, const InfluenceTensorSet& bset);

}  // namespace tempo::bath
