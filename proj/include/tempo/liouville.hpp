// liouville.hpp: compound (ket, bra) index convention shared by every module.
//
// Operators are vectorized by column stacking: vec(rho)[s + d*r] = rho(s, r).
// Under this convention the map rho -> A rho B^dagger is the matrix kron(conj(B), A).
#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace tempo {

inline constexpr std::size_t compound_index(std::size_t ket, std::size_t bra, std::size_t d) noexcept {
    return ket + d * bra;
}
inline constexpr std::size_t ket_of(std::size_t a, std::size_t d) noexcept { return a % d; }
inline constexpr std::size_t bra_of(std::size_t a, std::size_t d) noexcept { return a / d; }

inline Eigen::VectorXcd vectorize(const Eigen::MatrixXcd& rho) {
    return Eigen::Map<const Eigen::VectorXcd>(rho.data(), rho.size());
}

inline Eigen::MatrixXcd unvectorize(const Eigen::VectorXcd& v, Eigen::Index d) {
    return Eigen::Map<const Eigen::MatrixXcd>(v.data(), d, d);
}

// Superoperator of rho -> left * rho * right^dagger.
inline Eigen::MatrixXcd sandwich_superoperator(const Eigen::MatrixXcd& left, const Eigen::MatrixXcd& right) {
    const Eigen::Index d = left.rows();
    Eigen::MatrixXcd out(d * d, d * d);
    const Eigen::MatrixXcd rc = right.conjugate();
    for (Eigen::Index i = 0; i < d; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            out.block(i * d, j * d, d, d) = rc(i, j) * left;
        }
    }
    return out;
}

}  // namespace tempo
