#include "tempo/bath.hpp"

#include "tempo/errors.hpp"
#include "tempo/liouville.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

namespace tempo::bath {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kOverflowGuard = 700.0;

double coth(double x) { return 1.0 / std::tanh(x); }

bool is_finite(double x) { return std::isfinite(x); }

}  // namespace

// ------------------------------- validation ----------------------------------

void BathSpec::validate() const {
    if (!(alpha >= 0.0) || !is_finite(alpha)) {
        throw ConfigError("bath: alpha must be finite and >= 0");
    }
    if (!(omega_c > 0.0) || !is_finite(omega_c)) {
        throw ConfigError("bath: omega_c must be finite and > 0");
    }
    if (!is_finite(nu) || nu <= 0.0) {
        throw ConfigError("bath: nu must be finite and > 0");
    }
    if (!(beta > 0.0)) {
        throw ConfigError("bath: beta must be > 0 (use infinity for zero temperature)");
    }
    for (const auto& m : discrete_modes) {
        if (!(m.omega > 0.0) || !is_finite(m.omega)) {
            throw ConfigError("bath: discrete mode frequencies must be > 0");
        }
    }
    if (quad.gl_nodes < 2 || quad.cell_panels < 1 || !(quad.rel_tol > 0.0)) {
        throw ConfigError("bath: invalid quadrature controls");
    }
}

void TimeGrid::validate() const {
    if (!(dt > 0.0) || !is_finite(dt)) {
        throw ConfigError("grid: dt must be finite and > 0");
    }
    if (k < 1) {
        throw ConfigError("grid: k must be >= 1");
    }
}

// ----------------------------- spectral density -------------------------------

double spectral_density(double omega, const BathSpec& spec) {
    if (!(omega >= 0.0)) {
        throw DomainError("spectral_density: omega must be >= 0");
    }
    if (spec.is_discrete()) {
        // A delta comb has no pointwise density; see spectral_weights().
        return 0.0;
    }
    if (omega == 0.0) {
        return 0.0;
    }
    const double x = omega / spec.omega_c;
    return 0.5 * spec.alpha * spec.omega_c * std::pow(x, spec.nu) * std::exp(-x);
}

std::vector<std::pair<double, double>> spectral_weights(const BathSpec& spec) {
    std::vector<std::pair<double, double>> out;
    out.reserve(spec.discrete_modes.size());
    for (const auto& m : spec.discrete_modes) {
        out.emplace_back(m.omega, std::norm(m.g));
    }
    return out;
}

// --------------------------- correlation function -----------------------------

namespace {

cplx discrete_correlation(double t, const BathSpec& spec) {
    cplx c{0.0, 0.0};
    for (const auto& m : spec.discrete_modes) {
        const double occ = spec.zero_temperature() ? 1.0 : coth(0.5 * spec.beta * m.omega);
        c += std::norm(m.g) * cplx(occ * std::cos(m.omega * t), -std::sin(m.omega * t));
    }
    return c;
}

}  // namespace

cplx correlation_quadrature(double t, const BathSpec& spec) {
    if (!is_finite(t)) {
        throw DomainError("correlation_quadrature: t must be finite");
    }
    spec.validate();
    if (spec.is_discrete()) {
        return discrete_correlation(t, spec);
    }
    if (spec.alpha == 0.0) {
        return {0.0, 0.0};
    }

    // Substitute x = w / w_c: C(t) = (alpha w_c^2 / 2 pi) int x^nu e^{-x} [coth(b x/2) cos(tau x) - i sin(tau x)] dx.
    const double b = spec.zero_temperature() ? std::numeric_limits<double>::infinity() : spec.beta * spec.omega_c;
    const double tau = spec.omega_c * t;
    const double nu = spec.nu;
    auto integrand = [&](double x) -> cplx {
        const double base = std::pow(x, nu) * std::exp(-x);
        const double thermal = std::isinf(b) ? base : base * coth(0.5 * b * x);
        return {thermal * std::cos(tau * x), -base * std::sin(tau * x)};
    };

    const double x_max = 40.0 + 4.0 * nu;
    // Panels never span more than one oscillation of the time factor.
    const double width = tau != 0.0 ? std::min(1.0, 2.0 * kPi / std::abs(tau)) : 1.0;
    std::vector<double> pts{0.0};
    if (!std::isinf(b) && 1.0 / b < width) {
        // Resolve the thermal scale 1/(beta w_c) with geometrically growing panels.
        for (double p = 1.0 / b; p < width; p *= 4.0) {
            pts.push_back(p);
        }
    }
    double x = pts.back();
    while (x + width < x_max) {
        x += width;
        pts.push_back(x);
    }
    pts.push_back(x_max);

    using boost::math::quadrature::gauss_kronrod;
    const std::size_t n_panels = pts.size() - 1;
    std::vector<cplx> vals(n_panels);
    std::vector<double> errs(n_panels), l1s(n_panels);
    const double panel_tol = std::min(1e-12, spec.quad.rel_tol * 1e-2);
    // First pass: one Kronrod rule per panel gives the scale of the result.
    for (std::size_t p = 0; p < n_panels; ++p) {
        const double a = pts[p], c = pts[p + 1];
        if (p == 0 && nu < 1.0 && !std::isinf(b)) {
            // x^{nu-1} endpoint singularity: double-exponential rule on each component.
            boost::math::quadrature::tanh_sinh<double> ts;
            double er = 0.0, ei = 0.0, lr = 0.0, li = 0.0;
            const double re = ts.integrate([&](double y) { return integrand(y).real(); }, a, c, panel_tol, &er, &lr);
            const double im = ts.integrate([&](double y) { return integrand(y).imag(); }, a, c, panel_tol, &ei, &li);
            vals[p] = {re, im};
            errs[p] = er * std::abs(re) + ei * std::abs(im);
            l1s[p] = lr + li;
        } else {
            vals[p] = gauss_kronrod<double, 31>::integrate(integrand, a, c, 0, 0.0, &errs[p], &l1s[p]);
        }
    }
    double l1_total = 0.0;
    cplx estimate{0.0, 0.0};
    for (std::size_t p = 0; p < n_panels; ++p) {
        l1_total += l1s[p];
        estimate += vals[p];
    }
    const double eps = std::numeric_limits<double>::epsilon();
    const double floor = 1e3 * eps * l1_total;
    // Second pass: refine the worst panels until the error budget is met.
    const double budget = std::max(0.1 * spec.quad.rel_tol * std::abs(estimate), floor);
    std::vector<std::size_t> order(n_panels);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return errs[i] > errs[j]; });
    double err_sum = std::accumulate(errs.begin(), errs.end(), 0.0);
    for (std::size_t p : order) {
        if (err_sum <= budget) {
            break;
        }
        if (p == 0 && nu < 1.0 && !std::isinf(b)) {
            continue;
        }
        const double tol = std::max(budget / (static_cast<double>(n_panels) * std::max(l1s[p], 1e-300)), 50.0 * eps);
        double err = 0.0, l1 = 0.0;
        const cplx v = gauss_kronrod<double, 31>::integrate(integrand, pts[p], pts[p + 1], spec.quad.max_depth, tol, &err, &l1);
        if (err < errs[p]) {
            err_sum -= errs[p] - err;
            vals[p] = v;
            errs[p] = err;
            l1s[p] = l1;
        }
    }
    cplx sum{0.0, 0.0};
    double err_total = 0.0;
    for (std::size_t p = 0; p < n_panels; ++p) {
        sum += vals[p];
        err_total += errs[p];
    }
    const double pref = spec.alpha * spec.omega_c * spec.omega_c / (2.0 * kPi);
    const cplx result = pref * sum;
    const double achieved = err_total;
    if (achieved > spec.quad.rel_tol * std::abs(sum) && achieved > floor) {
        std::ostringstream os;
        os << "correlation_quadrature: tolerance " << spec.quad.rel_tol << " not reached at t=" << t
           << " (achieved relative error " << achieved / std::max(std::abs(sum), 1e-300) << ")";
        throw NumericError(os.str());
    }
    return result;
}

cplx polygamma1(cplx z) {
    if (!is_finite(z.real()) || !is_finite(z.imag())) {
        throw DomainError("polygamma1: non-finite argument");
    }
    if (z.imag() == 0.0 && z.real() <= 0.0 && z.real() == std::floor(z.real())) {
        throw DomainError("polygamma1: pole at non-positive integer");
    }
    if (z.real() < 0.0) {
        // psi1(1 - z) + psi1(z) = pi^2 / sin^2(pi z)
        const cplx s = std::sin(kPi * z);
        return kPi * kPi / (s * s) - polygamma1(1.0 - z);
    }
    cplx acc{0.0, 0.0};
    while (std::abs(z) < 16.0) {
        acc += 1.0 / (z * z);
        z += 1.0;
    }
    // psi1(z) ~ 1/z + 1/(2 z^2) + sum_n B_{2n} / z^{2n+1}
    static constexpr double bern[] = {1.0 / 6.0,      -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                      5.0 / 66.0,     -691.0 / 2730.0, 7.0 / 6.0, -3617.0 / 510.0};
    const cplx inv = 1.0 / z;
    const cplx inv2 = inv * inv;
    cplx term = inv * inv2;  // 1/z^3
    cplx series{0.0, 0.0};
    for (double bn : bern) {
        series += bn * term;
        term *= inv2;
    }
    return acc + inv + 0.5 * inv2 + series;
}

cplx correlation_analytic_ohmic(double t, const BathSpec& spec) {
    if (spec.is_discrete() || spec.nu != 1.0) {
        throw UnsupportedModelError("correlation_analytic_ohmic: requires the continuum Ohmic model (nu = 1)");
    }
    if (spec.zero_temperature()) {
        throw UnsupportedModelError("correlation_analytic_ohmic: requires finite beta");
    }
    spec.validate();
    const double wc = spec.omega_c;
    const double bw = spec.beta * wc;
    const double x = wc * t;
    const double den = (x * x + 1.0) * (x * x + 1.0);
    const cplx psi = polygamma1(cplx(1.0, -x) / bw);
    const double re = (x * x - 1.0) / den + 2.0 / (bw * bw) * psi.real();
    const double im = -2.0 * x / den;
    return spec.alpha * wc * wc / (2.0 * kPi) * cplx(re, im);
}

cplx correlation(double t, const BathSpec& spec) {
    if (spec.is_discrete()) {
        return discrete_correlation(t, spec);
    }
    if (spec.alpha == 0.0) {
        return {0.0, 0.0};
    }
    if (spec.nu == 1.0 && !spec.zero_temperature()) {
        return correlation_analytic_ohmic(t, spec);
    }
    return correlation_quadrature(t, spec);
}

// ------------------------------- memory kernel --------------------------------

const GaussLegendreRule& gauss_legendre(int n) {
    if (n < 1) {
        throw DomainError("gauss_legendre: n must be >= 1");
    }
    static std::mutex mu;
    static std::map<int, GaussLegendreRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    GaussLegendreRule rule;
    const auto zeros = boost::math::legendre_p_zeros<double>(n);  // non-negative zeros, ascending
    for (double x0 : zeros) {
        const double dp = boost::math::legendre_p_prime(n, x0);
        const double w = 2.0 / ((1.0 - x0 * x0) * dp * dp);
        if (x0 == 0.0) {
            rule.nodes.push_back(0.0);
            rule.weights.push_back(w);
        } else {
            rule.nodes.push_back(x0);
            rule.weights.push_back(w);
            rule.nodes.push_back(-x0);
            rule.weights.push_back(w);
        }
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

MemoryKernel memory_kernel(const TimeGrid& grid, const std::function<cplx(double)>& corr,
                           const QuadratureControls& quad) {
    grid.validate();
    const auto& rule = gauss_legendre(quad.gl_nodes);
    const double dt = grid.dt;
    const double h = dt / quad.cell_panels;

    // Integrate g(u) over u in [0, dt] panel by panel.
    auto integrate = [&](const auto& g) {
        cplx s{0.0, 0.0};
        for (int p = 0; p < quad.cell_panels; ++p) {
            const double mid = (p + 0.5) * h;
            for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
                const double u = mid + 0.5 * h * rule.nodes[q];
                s += (0.5 * h * rule.weights[q]) * g(u);
            }
        }
        return s;
    };

    MemoryKernel out;
    out.dt = dt;
    out.eta.resize(grid.k + 1);
    // The double integral over a cell depends only on u = t' - t''; the cell measure
    // along u is the triangle weight (dt - |u|).
    out.eta[0] = integrate([&](double u) { return (dt - u) * corr(u); });
    for (std::size_t l = 1; l <= grid.k; ++l) {
        const double c = static_cast<double>(l) * dt;
        out.eta[l] = integrate([&](double u) { return (dt - u) * (corr(c + u) + corr(c - u)); });
    }
    for (const auto& e : out.eta) {
        if (!is_finite(e.real()) || !is_finite(e.imag())) {
            throw NumericError("memory_kernel: non-finite kernel value");
        }
    }
    return out;
}

MemoryKernel memory_kernel(const TimeGrid& grid, const BathSpec& spec) {
    spec.validate();
    if (!spec.is_discrete() && spec.alpha == 0.0) {
        grid.validate();
        MemoryKernel out;
        out.dt = grid.dt;
        out.eta.assign(grid.k + 1, cplx{0.0, 0.0});
        return out;
    }
    return memory_kernel(grid, [&spec](double t) { return correlation(t, spec); }, spec.quad);
}

// ----------------------------- influence tensors ------------------------------

InfluenceTensorSet influence_tensors(const MemoryKernel& kernel, std::span<const double> lambdas) {
    if (kernel.eta.empty()) {
        throw ConfigError("influence_tensors: empty memory kernel");
    }
    if (lambdas.empty()) {
        throw ConfigError("influence_tensors: no coupling eigenvalues");
    }
    const std::size_t d = lambdas.size();
    const std::size_t d2 = d * d;
    InfluenceTensorSet out;
    out.d = d;
    out.dt = kernel.dt;
    out.lambdas.assign(lambdas.begin(), lambdas.end());
    out.b.reserve(kernel.eta.size());
    out.depth = kernel.eta.size() - 1;

    for (std::size_t l = 0; l < kernel.eta.size(); ++l) {
        const double er = kernel.eta[l].real();
        const double ei = kernel.eta[l].imag();
        Eigen::MatrixXcd m(d2, d2);
        for (std::size_t ai = 0; ai < d2; ++ai) {
            const double diff = lambdas[ket_of(ai, d)] - lambdas[bra_of(ai, d)];
            for (std::size_t aj = 0; aj < d2; ++aj) {
                const double ls = lambdas[ket_of(aj, d)];
                const double lr = lambdas[bra_of(aj, d)];
                // eta ls - conj(eta) lr, written out so the ket/bra swap is an exact conjugation.
                const double inner_re = er * ls - er * lr;
                const double inner_im = ei * ls + ei * lr;
                const double ex_re = -diff * inner_re;
                const double ex_im = -diff * inner_im;
                if (ex_re > kOverflowGuard) {
                    std::ostringstream os;
                    os << "influence_tensors: exponent " << ex_re << " overflows at separation " << l;
                    throw NumericError(os.str());
                }
                m(static_cast<Eigen::Index>(ai), static_cast<Eigen::Index>(aj)) =
                    diff == 0.0 ? cplx(1.0, 0.0) : std::exp(cplx(ex_re, ex_im));
            }
        }
        out.b.push_back(std::move(m));
    }
    return out;
}

// ----------------------------------- CSV --------------------------------------

void write_kernel_csv(std::ostream& os, const MemoryKernel& kernel) {
    os.precision(17);
    os << "l,re_eta,im_eta\n";
    for (std::size_t l = 0; l < kernel.eta.size(); ++l) {
        os << l << ',' << kernel.eta[l].real() << ',' << kernel.eta[l].imag() << '\n';
    }
}

void write_influence_csv(std::ostream& os, const InfluenceTensorSet& bset) {
    os.precision(17);
    os << "l,a_later,a_earlier,re_b,im_b\n";
    for (std::size_t l = 0; l < bset.b.size(); ++l) {
        const auto& m = bset.b[l];
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                os << l << ',' << i << ',' << j << ',' << m(i, j).real() << ',' << m(i, j).imag() << '\n';
            }
        }
    }
}

}  // namespace tempo::bath
