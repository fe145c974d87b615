// Shared generators and reference helpers for the test binaries.
#pragma once

#include "tempo/bath.hpp"
#include "tempo/network.hpp"
#include "tempo/process.hpp"
#include "tempo/tensor.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <vector>

namespace tt {

using tempo::cplx;

inline std::mt19937_64& rng() {
    static std::mt19937_64 gen(20240611);
    return gen;
}

inline double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng()); }

inline cplx random_cplx(double scale = 1.0) { return {scale * uniform(-1, 1), scale * uniform(-1, 1)}; }

inline Eigen::MatrixXcd random_matrix(Eigen::Index r, Eigen::Index c) {
    Eigen::MatrixXcd m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m.data()[i] = random_cplx();
    }
    return m;
}

inline Eigen::MatrixXcd random_hermitian(Eigen::Index d) {
    const Eigen::MatrixXcd m = random_matrix(d, d);
    return 0.5 * (m + m.adjoint());
}

inline Eigen::MatrixXcd random_density(Eigen::Index d) {
    const Eigen::MatrixXcd m = random_matrix(d, d);
    Eigen::MatrixXcd rho = m * m.adjoint();
    return rho / rho.trace();
}

inline tempo::DenseTensor random_tensor(tempo::Shape shape) {
    tempo::DenseTensor t(std::move(shape));
    for (auto& v : t.data()) {
        v = random_cplx();
    }
    return t;
}

// Kernel with |eta_l| spread roughly uniformly up to `scale`, with a mild decay in l.
inline tempo::bath::MemoryKernel random_kernel(std::size_t k, double dt, double scale) {
    tempo::bath::MemoryKernel ker;
    ker.dt = dt;
    for (std::size_t l = 0; l <= k; ++l) {
        const double w = scale / (1.0 + 0.3 * static_cast<double>(l));
        ker.eta.push_back({w * uniform(0.1, 1.0), w * uniform(-1.0, 1.0)});
    }
    return ker;
}

inline std::vector<double> spin_half_lambdas() { return {0.5, -0.5}; }

inline tempo::bath::InfluenceTensorSet random_bset(std::size_t k, double dt, double scale,
                                                   std::vector<double> lambdas = spin_half_lambdas()) {
    return tempo::bath::influence_tensors(random_kernel(k, dt, scale), lambdas);
}

inline Eigen::MatrixXcd up_state() {
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(2, 2);
    rho(0, 0) = 1.0;
    return rho;
}

inline Eigen::MatrixXcd plus_state() { return Eigen::MatrixXcd::Constant(2, 2, 0.5); }

// Ohmic bath on the benchmark scales, weakened for desk-size checks.
inline tempo::bath::BathSpec ohmic(double alpha, double omega_c, double beta) {
    tempo::bath::BathSpec spec;
    spec.alpha = alpha;
    spec.omega_c = omega_c;
    spec.nu = 1.0;
    spec.beta = beta;
    return spec;
}

// Max |a - b| / max(|b|) over all entries.
inline double max_rel_diff(const tempo::DenseTensor& a, const tempo::DenseTensor& b) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        num = std::max(num, std::abs(a[i] - b[i]));
        den = std::max(den, std::abs(b[i]));
    }
    return num / den;
}

// Largest entrywise relative error |a_i - b_i| / |b_i|.
inline double max_entry_rel_diff(const tempo::DenseTensor& a, const tempo::DenseTensor& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < b.size(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]) / std::max(std::abs(b[i]), 1e-300));
    }
    return worst;
}

}  // namespace tt
