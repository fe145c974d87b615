#include "doctest.h"
#include "support.hpp"

#include "tempo/errors.hpp"
#include "tempo/tensor.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

using namespace tempo;

TEST_CASE("contract: identity acting on a vector") {
    DenseTensor id({2, 2}, {1.0, 0.0, 0.0, 1.0});
    DenseTensor v({2}, {1.0, 2.0});
    const DenseTensor r = contract(id, v, {{1, 0}});
    REQUIRE(r.shape() == Shape{2});
    CHECK(r[0] == cplx(1.0));
    CHECK(r[1] == cplx(2.0));
}

TEST_CASE("contract: outer product against conjugate gives u |v|^2") {
    const DenseTensor u = tt::random_tensor({3});
    const DenseTensor v = tt::random_tensor({4});
    DenseTensor outer({3, 4});
    double vnorm2 = 0.0;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            outer[i * 4 + j] = u[i] * v[j];
        }
    }
    DenseTensor vc({4});
    for (std::size_t j = 0; j < 4; ++j) {
        vc[j] = std::conj(v[j]);
        vnorm2 += std::norm(v[j]);
    }
    const DenseTensor r = contract(outer, vc, {{1, 0}});
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::abs(r[i] - u[i] * vnorm2) < 1e-14);
    }
}

TEST_CASE("contract: 3x4x5 with 5x4 against a triple loop") {
    const DenseTensor a = tt::random_tensor({3, 4, 5});
    const DenseTensor b = tt::random_tensor({5, 4});
    const DenseTensor r = contract(a, b, {{2, 0}, {1, 1}});
    REQUIRE(r.shape() == Shape{3});
    for (std::size_t i = 0; i < 3; ++i) {
        cplx s = 0.0;
        for (std::size_t j = 0; j < 4; ++j) {
            for (std::size_t k = 0; k < 5; ++k) {
                s += a[(i * 4 + j) * 5 + k] * b[k * 4 + j];
            }
        }
        CHECK(std::abs(r[i] - s) < 1e-13);
    }
}

TEST_CASE("contract: operand order only permutes the result") {
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t p = 2 + trial % 3, q = 3, s = 2 + trial % 2;
        const DenseTensor a = tt::random_tensor({p, q, s});
        const DenseTensor b = tt::random_tensor({q, 3});
        const DenseTensor ab = contract(a, b, {{1, 0}});  // (p, s, 3)
        const DenseTensor ba = contract(b, a, {{0, 1}});  // (3, p, s)
        const std::size_t perm[] = {1, 2, 0};
        const DenseTensor ba_p = ba.permute(perm);
        REQUIRE(ba_p.shape() == ab.shape());
        CHECK(tt::max_rel_diff(ba_p, ab) < 1e-14);
    }
}

TEST_CASE("contract: extent mismatch is a dimension error") {
    const DenseTensor a = tt::random_tensor({2, 3});
    const DenseTensor b = tt::random_tensor({4});
    CHECK_THROWS_AS(contract(a, b, {{1, 0}}), DimensionError);
}

TEST_CASE("DenseTensor: shape checks, reshape and permute") {
    CHECK_THROWS_AS(DenseTensor({2, 3}, std::vector<cplx>(5)), DimensionError);
    CHECK_THROWS_AS(DenseTensor(Shape{2, 0}), DimensionError);
    const DenseTensor t = tt::random_tensor({2, 3, 4});
    const DenseTensor r = t.reshape({6, 4});
    CHECK(std::equal(t.data().begin(), t.data().end(), r.data().begin()));
    CHECK_THROWS_AS(t.reshape({5, 5}), DimensionError);
    const std::size_t perm[] = {2, 0, 1};
    const DenseTensor p = t.permute(perm);
    REQUIRE(p.shape() == Shape{4, 2, 3});
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            for (std::size_t k = 0; k < 4; ++k) {
                CHECK(p.at({k, i, j}) == t.at({i, j, k}));
            }
        }
    }
    CHECK_THROWS_AS(t.at({2, 0, 0}), DimensionError);
}

TEST_CASE("svd_truncate: diag(1, 1e-8) at 1e-6 keeps one value") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1e-8;
    const TruncatedSVD s = svd_truncate(m, 1e-6);
    CHECK(s.rank() == 1);
    CHECK(s.discarded_weight == doctest::Approx(1e-16).epsilon(1e-10));
}

TEST_CASE("svd_truncate: lambda_c = 0 is exact and isometric") {
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXcd m = tt::random_matrix(7 + trial, 5);
        const TruncatedSVD s = svd_truncate(m, 0.0);
        CHECK(s.rank() == 5);
        const Eigen::MatrixXcd rec = s.u * s.singular_values.asDiagonal() * s.v_dag;
        CHECK((rec - m).norm() <= 1e-12 * m.norm());
        const auto r = s.rank();
        CHECK((s.u.adjoint() * s.u - Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((s.v_dag * s.v_dag.adjoint() - Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff() < 1e-12);
        for (Eigen::Index i = 1; i < r; ++i) {
            CHECK(s.singular_values(i) <= s.singular_values(i - 1));
        }
        CHECK(s.singular_values.minCoeff() >= 0.0);
    }
}

TEST_CASE("svd_truncate: kept rank matches an independent criterion") {
    for (int trial = 0; trial < 5; ++trial) {
        // Graded spectrum so the cutoff lands inside it.
        Eigen::MatrixXcd m = tt::random_matrix(20, 20);
        Eigen::JacobiSVD<Eigen::MatrixXcd> ref(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
        Eigen::VectorXd sv = ref.singularValues();
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            sv(i) *= std::pow(10.0, -0.3 * static_cast<double>(i));
        }
        m = ref.matrixU() * sv.cast<cplx>().asDiagonal() * ref.matrixV().adjoint();

        std::vector<double> sq(sv.data(), sv.data() + sv.size());
        for (auto& x : sq) {
            x *= x;
        }
        std::sort(sq.rbegin(), sq.rend());
        const double total = std::accumulate(sq.begin(), sq.end(), 0.0);
        const double lc = 1e-3;
        std::size_t expect = sq.size();
        for (std::size_t r = 1; r <= sq.size(); ++r) {
            const double tail = std::accumulate(sq.begin() + static_cast<long>(r), sq.end(), 0.0);
            if (std::sqrt(tail / total) <= lc) {
                expect = r;
                break;
            }
        }
        const TruncatedSVD s = svd_truncate(m, lc);
        CHECK(static_cast<std::size_t>(s.rank()) == expect);
        const Eigen::MatrixXcd rec = s.u * s.singular_values.asDiagonal() * s.v_dag;
        CHECK((rec - m).norm() == doctest::Approx(std::sqrt(s.discarded_weight)).epsilon(1e-6));
    }
}

TEST_CASE("svd_truncate: discarded weight is monotone in lambda_c") {
    for (int trial = 0; trial < 5; ++trial) {
        const Eigen::MatrixXcd m = tt::random_matrix(12, 9) * tt::random_matrix(9, 12) * 0.1 + tt::random_matrix(12, 12) * 1e-3;
        double prev = -1.0;
        for (double lc : {0.0, 1e-6, 1e-4, 1e-3, 1e-2, 0.1, 0.5, 1.0}) {
            const TruncatedSVD s = svd_truncate(m, lc);
            CHECK(s.discarded_weight >= prev);
            CHECK(s.rank() >= 1);
            prev = s.discarded_weight;
        }
    }
}

TEST_CASE("svd_truncate: error reporting") {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3);
    CHECK_THROWS_AS(svd_truncate(m, -1e-3), DomainError);
    m(1, 2) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(svd_truncate(m, 0.0), NumericError);
}

TEST_CASE("truncation_rank: inclusive inequality at the threshold") {
    // Dropping the three ones leaves sqrt(3 / 12) = 0.5 exactly.
    const double sv[] = {3.0, 1.0, 1.0, 1.0};
    CHECK(truncation_rank(sv, 0.5) == 1);
    CHECK(truncation_rank(sv, 0.0) == 4);
    const double distinct[] = {3.0, 2.0, 1.0};
    CHECK(truncation_rank(distinct, 0.3) == 2);
    CHECK(truncation_rank(distinct, 0.6) == 1);
}

TEST_CASE("truncation_rank: degenerate values are kept or dropped together") {
    const double sv[] = {3.0, 1.0, 1.0, 1.0};
    // The smallest rank meeting 0.4999 would be 2, which splits the multiplet.
    CHECK(truncation_rank(sv, 0.4999) == 4);
    const double near[] = {1.0, 0.5, 0.5 * (1.0 - 1e-8)};
    CHECK(truncation_rank(near, 0.41) == 3);
    const double apart[] = {1.0, 0.5, 0.5 * (1.0 - 1e-3)};
    CHECK(truncation_rank(apart, 0.41) == 2);
}

TEST_CASE("truncation_rank: zero cutoff keeps the numerical rank") {
    const double sv[] = {1.0, 1e-3, 1e-20, 0.0};
    CHECK(truncation_rank(sv, 0.0) == 2);
    Eigen::MatrixXcd m = tt::random_matrix(6, 2) * tt::random_matrix(2, 5);
    const auto s = svd_truncate(m, 0.0);
    CHECK(s.rank() == 2);
    CHECK((s.u * s.singular_values.asDiagonal() * s.v_dag - m).norm() <= 1e-12 * m.norm());
}
