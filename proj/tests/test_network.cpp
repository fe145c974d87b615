#include "doctest.h"
#include "support.hpp"

#include "tempo/errors.hpp"
#include "tempo/liouville.hpp"
#include "tempo/network.hpp"
#include "tempo/oracle.hpp"

#include <sstream>

using namespace tempo;
using namespace tempo::network;
using bath::TimeGrid;

namespace {

// Multiply a dense F over legs 1..k by the diagonal of one materialized row.
void apply_row_dense(DenseTensor& f, const MpoRow& row, std::size_t k, std::size_t d2) {
    // Chain the (thread_in, out, in, thread_out) tensors along the thread bond.
    DenseTensor op;
    for (std::size_t n = 0; n < row.sites.size(); ++n) {
        const bool tin = n > 0;
        const bool tout = n + 1 < row.sites.size();
        DenseTensor w = row.sites[n].to_dense(tin, tout);
        if (n == 0) {
            op = w.reshape({w.extent(1), w.extent(2), w.extent(3)});
        } else {
            op = contract(op, w, {{op.rank() - 1, 0}});
        }
    }
    // op axes: (out_1, in_1, out_2, in_2, ..., [thread=1]); take the diagonal per leg.
    const std::size_t len = row.sites.size();
    std::vector<std::size_t> legs(k);
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        std::size_t rem = flat;
        for (std::size_t n = k; n-- > 0;) {
            legs[n] = rem % d2;
            rem /= d2;
        }
        std::size_t idx = 0;
        for (std::size_t n = 0; n < len; ++n) {
            const std::size_t a = legs[row.sites[n].leg - 1];
            idx = (idx * d2 + a) * d2 + a;
        }
        f[flat] *= op[idx];
    }
}

DenseTensor ones_dense(std::size_t k, std::size_t d2) {
    DenseTensor f(Shape(k, d2));
    for (auto& v : f.data()) {
        v = 1.0;
    }
    return f;
}

BoundaryMPS random_chain(std::size_t len, std::size_t chi, std::size_t p) {
    BoundaryMPS m;
    for (std::size_t n = 0; n < len; ++n) {
        const std::size_t l = n == 0 ? 1 : chi;
        const std::size_t r = n + 1 == len ? 1 : chi;
        m.sites.push_back(tt::random_tensor({l, p, r}));
    }
    return m;
}

DenseTensor chain_dense(const std::vector<DenseTensor>& sites) {
    InfluenceMPS tmp;
    tmp.d = 2;
    tmp.sites = sites;
    return tmp.dense();
}

// QR sweep left to right so every site but the last is an isometry.
void left_canonicalize(BoundaryMPS& m) {
    for (std::size_t n = 0; n + 1 < m.sites.size(); ++n) {
        DenseTensor& a = m.sites[n];
        const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
        const Eigen::MatrixXcd mat = a.as_matrix(l * p, r);
        Eigen::HouseholderQR<Eigen::MatrixXcd> qr(mat);
        const std::size_t k = std::min(l * p, r);
        const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(l * p, k);
        const Eigen::MatrixXcd rr = q.adjoint() * mat;
        DenseTensor na({l, p, k});
        na.as_matrix(l * p, k) = q;
        a = na;
        DenseTensor& b = m.sites[n + 1];
        const std::size_t p2 = b.extent(1), r2 = b.extent(2);
        DenseTensor nb({k, p2, r2});
        nb.as_matrix(k, p2 * r2) = rr * b.as_matrix(r, p2 * r2);
        b = nb;
    }
}

}  // namespace

TEST_CASE("rows: lengths, legs and base cases") {
    const auto bset = tt::random_bset(5, 0.1, 0.5);
    const MpoRow r1 = build_nonlocal_row(1, bset);
    REQUIRE(r1.sites.size() == 1);
    CHECK(r1.threads == 1);
    CHECK((r1.sites[0].factor.transpose() - bset.b[0].diagonal()).norm() == 0.0);
    const MpoRow r4 = build_nonlocal_row(4, bset);
    CHECK(r4.sites.size() == 4);
    CHECK(r4.first_leg() == 1);
    CHECK(r4.last_leg() == 4);
    CHECK(r4.sites.front().separation == 3);

    const MpoRow lk = build_local_row(5, 5, bset);
    REQUIRE(lk.sites.size() == 1);
    CHECK(lk.sites[0].leg == 5);
    const MpoRow l2 = build_local_row(2, 5, bset);
    CHECK(l2.sites.size() == 4);
    CHECK(l2.first_leg() == 2);
    CHECK(l2.sites.back().separation == 3);

    CHECK_THROWS_AS(build_nonlocal_row(0, bset), ConfigError);
    CHECK_THROWS_AS(build_nonlocal_row(7, bset), ConfigError);
    CHECK_THROWS_AS(build_local_row(6, 5, bset), ConfigError);
}

TEST_CASE("rows: materialized rows contract to the brute-force influence functional") {
    for (const Scheme scheme : {Scheme::nonlocal, Scheme::local}) {
        for (std::size_t k : {1u, 2u, 3u, 4u}) {
            const auto bset = tt::random_bset(k, 0.1, 0.9);
            DenseTensor f = ones_dense(k, 4);
            for (std::size_t i = 1; i <= k; ++i) {
                const MpoRow row = scheme == Scheme::local ? build_local_row(i, k, bset) : build_nonlocal_row(i, bset);
                apply_row_dense(f, row, k, 4);
            }
            CHECK(tt::max_entry_rel_diff(f, oracle::brute_force_influence(bset, k)) < 1e-12);
        }
    }
}

TEST_CASE("rows: three eigenvalues use the same threading") {
    const std::vector<double> lam{1.0, 0.0, -1.0};
    const auto bset = tt::random_bset(3, 0.1, 0.3, lam);
    DenseTensor f = ones_dense(3, 9);
    for (std::size_t i = 1; i <= 3; ++i) {
        apply_row_dense(f, build_nonlocal_row(i, bset), 3, 9);
    }
    CHECK(tt::max_entry_rel_diff(f, oracle::brute_force_influence(bset, 3)) < 1e-12);
    // Differences lambda_s - lambda_r take five values.
    CHECK(build_nonlocal_row(2, bset).threads == 5);
}

TEST_CASE("contract: zero coupling keeps unit bonds and all-ones F") {
    bath::MemoryKernel ker{0.1, std::vector<cplx>(7, 0.0)};
    const auto bset = bath::influence_tensors(ker, tt::spin_half_lambdas());
    for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
        const InfluenceMPS m = contract(s, bset, {0.1, 6}, {1e-8, {}});
        CHECK(m.max_bond() == 1);
        for (std::size_t b : m.stats.max_bond) {
            CHECK(b == 1);
        }
        const DenseTensor f = m.dense();
        for (const auto& v : f.data()) {
            CHECK(std::abs(v - 1.0) < 1e-13);
        }
    }
}

TEST_CASE("contract: lossless contractions equal brute force for both schemes") {
    for (std::size_t k = 1; k <= 6; ++k) {
        const auto bset = tt::random_bset(k, 0.1, 0.6);
        const DenseTensor ref = oracle::brute_force_influence(bset, k);
        const InfluenceMPS nl = contract_nonlocal(bset, {0.1, k}, 0.0);
        const InfluenceMPS lo = contract_local(bset, {0.1, k}, 0.0);
        CHECK(nl.k() == k);
        CHECK(lo.k() == k);
        CHECK(tt::max_entry_rel_diff(nl.dense(), ref) < 1e-10);
        CHECK(tt::max_entry_rel_diff(lo.dense(), ref) < 1e-10);
        CHECK(nl.stats.max_bond.size() == k);
        CHECK(lo.stats.iteration_seconds.size() == k);
    }
}

TEST_CASE("contract: k = 1 is the diagonal of b_0") {
    const auto bset = tt::random_bset(1, 0.1, 0.6);
    const InfluenceMPS m = contract_local(bset, {0.1, 1}, 0.0);
    const DenseTensor f = m.dense();
    for (std::size_t a = 0; a < 4; ++a) {
        CHECK(std::abs(f[a] - bset.b[0](a, a)) < 1e-14);
    }
}

TEST_CASE("contract: grid mismatches are configuration errors") {
    const auto bset = tt::random_bset(4, 0.1, 0.6);
    CHECK_THROWS_AS(contract_nonlocal(bset, {0.1, 7}, 0.0), ConfigError);
    CHECK_THROWS_AS(contract_local(bset, {0.2, 3}, 0.0), ConfigError);
}

TEST_CASE("sweep_compress: lossless and product-state behaviour") {
    BoundaryMPS m = random_chain(5, 3, 4);
    const DenseTensor before = chain_dense(m.sites);
    const BoundaryMPS out = sweep_compress(m, 0.0);
    CHECK(tt::max_rel_diff(chain_dense(out.sites), before) < 1e-12);
    for (std::size_t n = 0; n < out.sites.size(); ++n) {
        CHECK(out.sites[n].extent(2) <= m.sites[n].extent(2));
    }

    BoundaryMPS prod = random_chain(4, 1, 4);
    const BoundaryMPS pout = sweep_compress(prod, 1e-3);
    CHECK(tt::max_rel_diff(chain_dense(pout.sites), chain_dense(prod.sites)) < 1e-14);
    CHECK(pout.max_bond() == 1);
}

TEST_CASE("sweep_compress: truncation error bounded by the discarded weight") {
    double discarded_any = 0.0;
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t len = 3 + trial % 4;
        BoundaryMPS m = random_chain(len, 8, 4);
        // Scale bonds so the spectrum decays and the cutoff bites.
        for (std::size_t n = 0; n + 1 < len; ++n) {
            DenseTensor& s = m.sites[n];
            const std::size_t r = s.extent(2);
            for (std::size_t i = 0; i < s.size(); ++i) {
                s[i] *= std::pow(0.3, static_cast<double>(i % r));
            }
        }
        left_canonicalize(m);
        const DenseTensor before = chain_dense(m.sites);
        const BoundaryMPS out = sweep_compress(m, 1e-3);
        double num = 0.0, den = 0.0;
        const DenseTensor after = chain_dense(out.sites);
        for (std::size_t i = 0; i < before.size(); ++i) {
            num += std::norm(after[i] - before[i]);
            den += std::norm(before[i]);
        }
        CHECK(std::sqrt(num / den) <= std::sqrt(out.stats.cumulative_discarded) * (1.0 + 1e-9) + 1e-14);
        discarded_any += out.stats.cumulative_discarded;
    }
    CHECK(discarded_any > 0.0);
}

TEST_CASE("InfluenceMPS: diagonal unity, conjugation and monotone compression") {
    const auto bset = bath::influence_tensors(bath::memory_kernel({0.05, 24}, tt::ohmic(0.5, 5.0, 2.0)),
                                              tt::spin_half_lambdas());
    std::size_t prev_bond = 1u << 30;
    for (double lc : {1e-10, 1e-8, 1e-6, 1e-4, 1e-2, 1e-1}) {
        for (const Scheme s : {Scheme::nonlocal, Scheme::local}) {
            const InfluenceMPS m = contract(s, bset, {0.05, 24}, {lc, {}});
            const double tol = 10.0 * std::sqrt(m.stats.cumulative_discarded) + 1e-11;
            for (int trial = 0; trial < 20; ++trial) {
                std::vector<std::size_t> diag(24), legs(24), swapped(24);
                for (std::size_t n = 0; n < 24; ++n) {
                    const std::size_t q = tt::rng()() % 2;
                    diag[n] = compound_index(q, q, 2);
                    const std::size_t sa = tt::rng()() % 2, ra = tt::rng()() % 2;
                    legs[n] = compound_index(sa, ra, 2);
                    swapped[n] = compound_index(ra, sa, 2);
                }
                CHECK(std::abs(m.element(diag) - 1.0) <= tol);
                CHECK(std::abs(m.element(swapped) - std::conj(m.element(legs))) <= tol);
            }
            if (s == Scheme::nonlocal) {
                CHECK(m.max_bond() <= prev_bond);
                prev_bond = m.max_bond();
            }
        }
    }
}

TEST_CASE("local scheme: finalized sites are never touched again") {
    const auto bset = bath::influence_tensors(bath::memory_kernel({0.05, 20}, tt::ohmic(0.5, 5.0, 2.0)),
                                              tt::spin_half_lambdas());
    std::vector<DenseTensor> snapshot;
    std::vector<std::size_t> fixed_at;
    ContractionOptions opts{1e-6, [&](std::size_t i, const BoundaryMPS& b) {
                                CHECK(b.finalized == i);
                                snapshot.push_back(b.sites[i - 1]);
                                fixed_at.push_back(i);
                            }};
    const InfluenceMPS m = contract_local(bset, {0.05, 20}, opts);
    REQUIRE(snapshot.size() == 20);
    for (std::size_t n = 0; n < 20; ++n) {
        const auto a = snapshot[n].data();
        const auto b = m.sites[n].data();
        REQUIRE(snapshot[n].shape() == m.sites[n].shape());
        CHECK(std::equal(a.begin(), a.end(), b.begin()));
    }
}

TEST_CASE("memory_truncate: identity at full depth, product form at zero depth") {
    const auto bset = tt::random_bset(5, 0.1, 0.6);
    const auto same = memory_truncate(bset, 5);
    for (std::size_t l = 0; l < bset.b.size(); ++l) {
        CHECK((same.b[l] - bset.b[l]).norm() == 0.0);
    }
    const auto cut = memory_truncate(bset, 0);
    CHECK(cut.depth == 0);
    const DenseTensor f = contract_local(cut, {0.1, 5}, 0.0).dense();
    const DenseTensor g = contract_nonlocal(cut, {0.1, 5}, 0.0).dense();
    for (std::size_t flat = 0; flat < f.size(); ++flat) {
        cplx expect = 1.0;
        std::size_t rem = flat;
        for (int n = 0; n < 5; ++n) {
            const std::size_t a = rem % 4;
            rem /= 4;
            expect *= bset.b[0](a, a);
        }
        CHECK(std::abs(f[flat] - expect) < 1e-12);
        CHECK(std::abs(g[flat] - expect) < 1e-12);
    }
    CHECK_THROWS_AS(memory_truncate(bset, 6), ConfigError);

    const auto mid = memory_truncate(bset, 2);
    const DenseTensor ref = oracle::brute_force_influence(mid, 5);
    CHECK(tt::max_entry_rel_diff(contract_local(mid, {0.1, 5}, 0.0).dense(), ref) < 1e-10);
    CHECK(tt::max_entry_rel_diff(contract_nonlocal(mid, {0.1, 5}, 0.0).dense(), ref) < 1e-10);
}

TEST_CASE("InfluenceMPS: binary round trip") {
    const auto bset = tt::random_bset(6, 0.1, 0.6);
    const InfluenceMPS m = contract_local(bset, {0.1, 6}, 1e-8);
    std::stringstream ss;
    write_influence_mps(ss, m);
    const InfluenceMPS r = read_influence_mps(ss);
    CHECK(r.scheme == m.scheme);
    CHECK(r.d == 2);
    CHECK(r.dt == m.dt);
    CHECK(r.lambda_c == m.lambda_c);
    CHECK(r.lambdas == m.lambdas);
    CHECK(r.stats.max_bond == m.stats.max_bond);
    CHECK(r.stats.cumulative_discarded == m.stats.cumulative_discarded);
    REQUIRE(r.k() == m.k());
    for (std::size_t n = 0; n < m.k(); ++n) {
        CHECK(r.sites[n].shape() == m.sites[n].shape());
        CHECK(std::equal(r.sites[n].data().begin(), r.sites[n].data().end(), m.sites[n].data().begin()));
    }
    std::stringstream bad("not a file at all");
    CHECK_THROWS_AS(read_influence_mps(bad), ConfigError);
    std::string trunc = ss.str().substr(0, 60);
    std::stringstream tr(trunc);
    CHECK_THROWS_AS(read_influence_mps(tr), ConfigError);
}

TEST_CASE("scheme names") {
    CHECK(scheme_from_string("local") == Scheme::local);
    CHECK(scheme_from_string("nonlocal") == Scheme::nonlocal);
    CHECK(to_string(Scheme::local) == "local");
    CHECK_THROWS_AS(scheme_from_string("diagonal"), ConfigError);
}

TEST_CASE("contract: long chains keep finite sites and unit diagonal") {
    // Chain norms near 2^k: past double range for the non-local length, squared weights overflow well before.
    for (const auto& [scheme, k] : {std::pair{Scheme::local, std::size_t{1200}}, std::pair{Scheme::nonlocal, std::size_t{560}}}) {
        const TimeGrid grid{0.05, k};
        const auto bset = memory_truncate(
            bath::influence_tensors(bath::memory_kernel(grid, tt::ohmic(0.3, 5.0, 1.0)), tt::spin_half_lambdas()), 2);
        const InfluenceMPS m = contract(scheme, bset, grid, {1e-6, {}});
        bool finite = true;
        for (const auto& s : m.sites) {
            for (const auto& v : s.data()) {
                finite = finite && std::isfinite(v.real()) && std::isfinite(v.imag());
            }
        }
        CHECK(finite);
        CHECK(m.max_bond() <= 64);
        // Truncation error accumulates roughly linearly in the number of iterations.
        const double tol = static_cast<double>(k) * 1e-6;
        for (int trial = 0; trial < 5; ++trial) {
            std::vector<std::size_t> diag(k);
            for (auto& a : diag) {
                const std::size_t q = tt::rng()() % 2;
                a = compound_index(q, q, 2);
            }
            CHECK(std::abs(m.element(diag) - 1.0) <= tol);
        }
    }
}
