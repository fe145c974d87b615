#include "tempo/network.hpp"

#include "tempo/errors.hpp"
#include "tempo/liouville.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <map>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

namespace tempo::network {

namespace {

using Clock = std::chrono::steady_clock;

// Compound indices grouped by how they enter b_l. As the later (row) leg an index
// matters only through lambda_s - lambda_r; as the earlier (column) leg through the
// pair (lambda_s, lambda_r).
struct ThreadClasses {
    bool by_column = false;
    std::vector<std::size_t> class_of;        // compound index -> class
    std::vector<std::size_t> representative;  // class -> one compound index
};

ThreadClasses thread_classes(const bath::InfluenceTensorSet& bset, bool by_column) {
    ThreadClasses tc;
    tc.by_column = by_column;
    const std::size_t d = bset.d;
    std::map<std::pair<double, double>, std::size_t> seen;
    tc.class_of.resize(d * d);
    for (std::size_t a = 0; a < d * d; ++a) {
        const double ls = bset.lambdas[ket_of(a, d)];
        const double lr = bset.lambdas[bra_of(a, d)];
        const auto key = by_column ? std::make_pair(ls, lr) : std::make_pair(ls - lr, 0.0);
        auto [it, inserted] = seen.emplace(key, tc.representative.size());
        if (inserted) {
            tc.representative.push_back(a);
        }
        tc.class_of[a] = it->second;
    }
    return tc;
}

void check_bset(const bath::InfluenceTensorSet& bset) {
    if (bset.d == 0 || bset.lambdas.size() != bset.d || bset.b.empty()) {
        throw ConfigError("influence tensor set is empty or inconsistent");
    }
    for (const auto& m : bset.b) {
        if (m.rows() != static_cast<Eigen::Index>(bset.d2()) || m.cols() != static_cast<Eigen::Index>(bset.d2())) {
            throw DimensionError("influence tensor has wrong shape");
        }
    }
}

// Factor of the site holding the row's open leg: b_0 on the diagonal, thread set to the leg's class.
Eigen::MatrixXcd source_factor(const bath::InfluenceTensorSet& bset, const ThreadClasses& tc) {
    const auto d2 = static_cast<Eigen::Index>(bset.d2());
    Eigen::MatrixXcd f = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(tc.representative.size()), d2);
    for (Eigen::Index p = 0; p < d2; ++p) {
        f(static_cast<Eigen::Index>(tc.class_of[static_cast<std::size_t>(p)]), p) = bset.b[0](p, p);
    }
    return f;
}

Eigen::MatrixXcd pass_factor(const bath::InfluenceTensorSet& bset, const ThreadClasses& tc, std::size_t l) {
    const auto d2 = static_cast<Eigen::Index>(bset.d2());
    Eigen::MatrixXcd f(static_cast<Eigen::Index>(tc.representative.size()), d2);
    for (std::size_t t = 0; t < tc.representative.size(); ++t) {
        const auto rep = static_cast<Eigen::Index>(tc.representative[t]);
        if (tc.by_column) {
            f.row(static_cast<Eigen::Index>(t)) = bset.b[l].col(rep).transpose();
        } else {
            f.row(static_cast<Eigen::Index>(t)) = bset.b[l].row(rep);
        }
    }
    return f;
}

DenseTensor ones_site(std::size_t d2) {
    DenseTensor s({1, d2, 1});
    for (auto& v : s.data()) {
        v = 1.0;
    }
    return s;
}

void check_grid(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid) {
    grid.validate();
    check_bset(bset);
    if (bset.max_separation() + 1 < grid.k) {
        throw ConfigError("influence tensors cover separations up to " + std::to_string(bset.max_separation()) +
                          " but the grid needs " + std::to_string(grid.k - 1));
    }
    if (bset.dt > 0.0 && std::abs(bset.dt - grid.dt) > 1e-12 * grid.dt) {
        throw ConfigError("influence tensors were built on a different time step");
    }
}

// Divides v by its norm and adds the log of that norm to log_scale; zero vectors are left alone.
template <class V>
void normalize_into(V& v, double& log_scale) {
    const double nrm = v.norm();
    if (nrm > 0.0 && std::isfinite(nrm)) {
        v /= nrm;
        log_scale += std::log(nrm);
    }
}

// Left sweep step: SVD site n as (left) x (phys, right), keep V^dagger, push U S into site n-1.
// The pushed singular values are normalized; their norm is accumulated in log_scale.
double left_step(std::vector<DenseTensor>& sites, std::size_t n, double lambda_c, double& log_scale) {
    DenseTensor& a = sites[n];
    const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
    const Eigen::MatrixXcd m = a.as_matrix(l, p * r);
    TruncatedSVD svd = svd_truncate(m, lambda_c);
    const auto rank = static_cast<std::size_t>(svd.rank());
    const double discarded = svd.relative_discarded();
    normalize_into(svd.singular_values, log_scale);

    DenseTensor site({rank, p, r});
    site.as_matrix(rank, p * r) = svd.v_dag;
    a = std::move(site);

    DenseTensor& prev = sites[n - 1];
    const std::size_t l2 = prev.extent(0), p2 = prev.extent(1);
    DenseTensor merged({l2, p2, rank});
    merged.as_matrix(l2 * p2, rank).noalias() =
        prev.as_matrix(l2 * p2, l) * (svd.u * svd.singular_values.asDiagonal());
    prev = std::move(merged);
    return discarded;
}

// Right sweep step: SVD site n as (left, phys) x (right), keep U, push S V^dagger into site n+1.
double right_step(std::vector<DenseTensor>& sites, std::size_t n, double lambda_c, double& log_scale) {
    DenseTensor& a = sites[n];
    const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
    const Eigen::MatrixXcd m = a.as_matrix(l * p, r);
    TruncatedSVD svd = svd_truncate(m, lambda_c);
    const auto rank = static_cast<std::size_t>(svd.rank());
    const double discarded = svd.relative_discarded();
    normalize_into(svd.singular_values, log_scale);

    DenseTensor site({l, p, rank});
    site.as_matrix(l * p, rank) = svd.u;
    a = std::move(site);

    DenseTensor& next = sites[n + 1];
    const std::size_t p3 = next.extent(1), r3 = next.extent(2);
    DenseTensor merged({rank, p3, r3});
    merged.as_matrix(rank, p3 * r3).noalias() =
        (svd.singular_values.asDiagonal() * svd.v_dag) * next.as_matrix(r, p3 * r3);
    next = std::move(merged);
    return discarded;
}

// Lossless QR pass over [lo, hi): sites become left isometries, the remainder moves to hi.
void orthogonalize_range(std::vector<DenseTensor>& sites, std::size_t lo, std::size_t hi, double& log_scale) {
    for (std::size_t n = lo; n < hi; ++n) {
        DenseTensor& a = sites[n];
        const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
        const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a.as_matrix(l * p, r));
        const std::size_t rank = std::min(l * p, r);
        const auto rk = static_cast<Eigen::Index>(rank);
        DenseTensor site({l, p, rank});
        site.as_matrix(l * p, rank) =
            qr.householderQ() * Eigen::MatrixXcd::Identity(static_cast<Eigen::Index>(l * p), rk);
        a = std::move(site);

        Eigen::MatrixXcd rmat = qr.matrixQR().topRows(rk).triangularView<Eigen::Upper>();
        normalize_into(rmat, log_scale);
        DenseTensor& next = sites[n + 1];
        const std::size_t p3 = next.extent(1), r3 = next.extent(2);
        DenseTensor merged({rank, p3, r3});
        merged.as_matrix(rank, p3 * r3).noalias() = rmat * next.as_matrix(r, p3 * r3);
        next = std::move(merged);
    }
}

// Sweeps restricted to sites [lo, hi]; the bond to the left of lo is never truncated.
// Factors pushed along a sweep are kept at unit norm; the accumulated scale is shared evenly among the
// swept sites at the end.
double sweep_range(std::vector<DenseTensor>& sites, std::size_t lo, std::size_t hi, double lambda_c,
                   bool orthogonalize) {
    double log_scale = 0.0;
    if (orthogonalize) {
        orthogonalize_range(sites, lo, hi, log_scale);
    }
    double discarded = 0.0;
    for (std::size_t n = hi; n > lo; --n) {
        discarded += left_step(sites, n, lambda_c, log_scale);
    }
    for (std::size_t n = lo; n < hi; ++n) {
        discarded += right_step(sites, n, lambda_c, log_scale);
    }
    if (log_scale != 0.0) {
        const double share = std::exp(log_scale / static_cast<double>(hi - lo + 1));
        for (std::size_t n = lo; n <= hi; ++n) {
            for (auto& v : sites[n].data()) {
                v *= share;
            }
        }
    }
    return discarded;
}

std::size_t chain_max_bond(const std::vector<DenseTensor>& sites) {
    std::size_t m = 1;
    for (const auto& s : sites) {
        m = std::max({m, s.extent(0), s.extent(2)});
    }
    return m;
}

void record_iteration(BoundaryMPS& mps, Clock::time_point start, double discarded) {
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    mps.stats.iteration_seconds.push_back(secs);
    mps.stats.max_bond.push_back(mps.max_bond());
    mps.stats.discarded_per_iteration.push_back(discarded);
    mps.stats.cumulative_discarded += discarded;
    mps.stats.total_seconds += secs;
}

InfluenceMPS finish(BoundaryMPS&& mps, Scheme scheme, const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                    double lambda_c) {
    InfluenceMPS out;
    out.scheme = scheme;
    out.d = bset.d;
    out.lambdas = bset.lambdas;
    out.dt = grid.dt;
    out.lambda_c = lambda_c;
    out.sites = std::move(mps.sites);
    out.stats = std::move(mps.stats);
    return out;
}

std::string iteration_context(std::size_t i, const std::exception& e) {
    std::ostringstream os;
    os << "iteration " << i << ": " << e.what();
    return os.str();
}

}  // namespace

std::string to_string(Scheme s) { return s == Scheme::local ? "local" : "nonlocal"; }

Scheme scheme_from_string(const std::string& s) {
    if (s == "local") {
        return Scheme::local;
    }
    if (s == "nonlocal" || s == "non-local") {
        return Scheme::nonlocal;
    }
    throw ConfigError("unknown scheme '" + s + "' (expected local or nonlocal)");
}

// ---------------------------------- rows --------------------------------------

DenseTensor MpoSite::to_dense(bool thread_in, bool thread_out) const {
    const std::size_t t = static_cast<std::size_t>(factor.rows());
    const std::size_t d2 = static_cast<std::size_t>(factor.cols());
    const std::size_t ti = thread_in ? t : 1;
    const std::size_t to = thread_out ? t : 1;
    DenseTensor w({ti, d2, d2, to});
    for (std::size_t th = 0; th < t; ++th) {
        for (std::size_t p = 0; p < d2; ++p) {
            const std::size_t a = thread_in ? th : 0;
            const std::size_t b = thread_out ? th : 0;
            // Without a thread on either side the factor collapses onto its summed rows.
            w[((a * d2 + p) * d2 + p) * to + b] += factor(static_cast<Eigen::Index>(th), static_cast<Eigen::Index>(p));
        }
    }
    return w;
}

MpoRow build_nonlocal_row(std::size_t i, const bath::InfluenceTensorSet& bset) {
    check_bset(bset);
    if (i < 1 || i > bset.max_separation() + 1) {
        throw ConfigError("build_nonlocal_row: row index out of range");
    }
    const ThreadClasses tc = thread_classes(bset, false);
    MpoRow row;
    row.scheme = Scheme::nonlocal;
    row.row_index = i;
    const std::size_t reach = std::min(i - 1, bset.depth);
    if (reach == 0) {
        row.threads = 1;
        row.sites.push_back({i, 0, bset.b[0].diagonal().transpose()});
        return row;
    }
    row.threads = tc.representative.size();
    for (std::size_t l = reach; l >= 1; --l) {
        row.sites.push_back({i - l, l, pass_factor(bset, tc, l)});
    }
    row.sites.push_back({i, 0, source_factor(bset, tc)});
    return row;
}

MpoRow build_local_row(std::size_t i, std::size_t k, const bath::InfluenceTensorSet& bset) {
    check_bset(bset);
    if (i < 1 || i > k || k > bset.max_separation() + 1) {
        throw ConfigError("build_local_row: row index out of range");
    }
    const ThreadClasses tc = thread_classes(bset, true);
    MpoRow row;
    row.scheme = Scheme::local;
    row.row_index = i;
    const std::size_t reach = std::min(k - i, bset.depth);
    if (reach == 0) {
        row.threads = 1;
        row.sites.push_back({i, 0, bset.b[0].diagonal().transpose()});
        return row;
    }
    row.threads = tc.representative.size();
    row.sites.push_back({i, 0, source_factor(bset, tc)});
    for (std::size_t l = 1; l <= reach; ++l) {
        row.sites.push_back({i + l, l, pass_factor(bset, tc, l)});
    }
    return row;
}

// ------------------------------- boundary MPS ---------------------------------

std::size_t BoundaryMPS::max_bond() const { return chain_max_bond(sites); }

void BoundaryMPS::validate() const {
    if (sites.empty()) {
        return;
    }
    if (sites.front().extent(0) != 1 || sites.back().extent(2) != 1) {
        throw DimensionError("BoundaryMPS: outer bonds must have extent 1");
    }
    for (std::size_t n = 0; n + 1 < sites.size(); ++n) {
        if (sites[n].rank() != 3 || sites[n].extent(2) != sites[n + 1].extent(0)) {
            throw DimensionError("BoundaryMPS: bond mismatch between sites " + std::to_string(n) + " and " +
                                 std::to_string(n + 1));
        }
    }
    if (finalized > sites.size()) {
        throw DimensionError("BoundaryMPS: finalized prefix longer than chain");
    }
}

void apply_row(BoundaryMPS& mps, const MpoRow& row) {
    if (row.sites.empty()) {
        return;
    }
    const std::size_t lo = row.first_leg() - 1;
    const std::size_t hi = row.last_leg() - 1;
    if (hi >= mps.sites.size() || hi - lo + 1 != row.sites.size()) {
        throw DimensionError("apply_row: row does not fit the chain");
    }
    const std::size_t t = row.threads;
    for (std::size_t n = lo; n <= hi; ++n) {
        const Eigen::MatrixXcd& f = row.sites[n - lo].factor;
        const DenseTensor& a = mps.sites[n];
        const std::size_t l = a.extent(0), p = a.extent(1), r = a.extent(2);
        if (static_cast<std::size_t>(f.cols()) != p || static_cast<std::size_t>(f.rows()) != t) {
            throw DimensionError("apply_row: factor shape mismatch");
        }
        const std::size_t tl = n > lo ? t : 1;
        const std::size_t tr = n < hi ? t : 1;
        DenseTensor out({l * tl, p, r * tr});
        auto src = a.data();
        auto dst = out.data();
        const std::size_t rr = r * tr;
        for (std::size_t th = 0; th < t; ++th) {
            const std::size_t ol = tl > 1 ? th : 0;
            const std::size_t or_ = tr > 1 ? th : 0;
            for (std::size_t cl = 0; cl < l; ++cl) {
                const std::size_t row_base = (cl * tl + ol) * p;
                for (std::size_t q = 0; q < p; ++q) {
                    const cplx w = f(static_cast<Eigen::Index>(th), static_cast<Eigen::Index>(q));
                    const cplx* in = &src[(cl * p + q) * r];
                    cplx* o = &dst[(row_base + q) * rr];
                    for (std::size_t cr = 0; cr < r; ++cr) {
                        // Length-one rows have no thread: all classes land on the same entry.
                        o[cr * tr + or_] += w * in[cr];
                    }
                }
            }
        }
        mps.sites[n] = std::move(out);
    }
}

void sweep_compress_inplace(BoundaryMPS& mps, double lambda_c, bool orthogonalize) {
    if (!(lambda_c >= 0.0)) {
        throw DomainError("sweep_compress: lambda_c must be >= 0");
    }
    if (mps.finalized >= mps.sites.size()) {
        return;
    }
    mps.stats.cumulative_discarded +=
        sweep_range(mps.sites, mps.finalized, mps.sites.size() - 1, lambda_c, orthogonalize);
}

BoundaryMPS sweep_compress(BoundaryMPS mps, double lambda_c, bool orthogonalize) {
    mps.validate();
    sweep_compress_inplace(mps, lambda_c, orthogonalize);
    return mps;
}

// ------------------------------ influence MPS ---------------------------------

std::size_t InfluenceMPS::max_bond() const { return chain_max_bond(sites); }

cplx InfluenceMPS::element(std::span<const std::size_t> legs) const {
    if (legs.size() != sites.size()) {
        throw DimensionError("InfluenceMPS::element: expected " + std::to_string(sites.size()) + " legs");
    }
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    for (std::size_t n = 0; n < sites.size(); ++n) {
        const DenseTensor& s = sites[n];
        const std::size_t l = s.extent(0), p = s.extent(1), r = s.extent(2);
        if (legs[n] >= p) {
            throw DimensionError("InfluenceMPS::element: leg index out of range");
        }
        Eigen::MatrixXcd slice(l, r);
        for (std::size_t a = 0; a < l; ++a) {
            for (std::size_t b = 0; b < r; ++b) {
                slice(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = s[(a * p + legs[n]) * r + b];
            }
        }
        v = v * slice;
    }
    return v(0);
}

DenseTensor InfluenceMPS::dense() const {
    const std::size_t k = sites.size();
    if (k == 0) {
        return DenseTensor::scalar(1.0);
    }
    double entries = std::pow(static_cast<double>(d2()), static_cast<double>(k));
    if (entries > static_cast<double>(1u << 20)) {
        throw ConfigError("InfluenceMPS::dense: more than 2^20 entries");
    }
    // Row-major accumulation keeps leg k as the fastest index.
    RowMatrixXcd acc = RowMatrixXcd::Ones(1, 1);
    for (const auto& s : sites) {
        const std::size_t l = s.extent(0), p = s.extent(1), r = s.extent(2);
        RowMatrixXcd next = acc * s.as_matrix(l, p * r);
        acc = Eigen::Map<RowMatrixXcd>(next.data(), next.rows() * static_cast<Eigen::Index>(p),
                                       static_cast<Eigen::Index>(r));
    }
    return DenseTensor(Shape(k, d2()), std::vector<cplx>(acc.data(), acc.data() + acc.size()));
}

// -------------------------------- contraction ---------------------------------

InfluenceMPS contract_nonlocal(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                               const ContractionOptions& opts) {
    check_grid(bset, grid);
    BoundaryMPS mps;
    for (std::size_t i = 1; i <= grid.k; ++i) {
        const auto start = Clock::now();
        double discarded = 0.0;
        try {
            mps.sites.push_back(ones_site(bset.d2()));
            apply_row(mps, build_nonlocal_row(i, bset));
            discarded = sweep_range(mps.sites, 0, mps.sites.size() - 1, opts.lambda_c, opts.orthogonalize);
        } catch (const NumericError& e) {
            throw NumericError(iteration_context(i, e));
        }
        record_iteration(mps, start, discarded);
        if (opts.on_iteration) {
            opts.on_iteration(i, mps);
        }
    }
    return finish(std::move(mps), Scheme::nonlocal, bset, grid, opts.lambda_c);
}

InfluenceMPS contract_local(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                            const ContractionOptions& opts) {
    check_grid(bset, grid);
    BoundaryMPS mps;
    mps.sites.assign(grid.k, ones_site(bset.d2()));
    for (std::size_t i = 1; i <= grid.k; ++i) {
        const auto start = Clock::now();
        double discarded = 0.0;
        try {
            const MpoRow row = build_local_row(i, grid.k, bset);
            apply_row(mps, row);
            // Sites past the row's reach are still untouched ones with unit bonds.
            discarded = sweep_range(mps.sites, i - 1, row.last_leg() - 1, opts.lambda_c, false);
        } catch (const NumericError& e) {
            throw NumericError(iteration_context(i, e));
        }
        mps.finalized = i;
        record_iteration(mps, start, discarded);
        if (opts.on_iteration) {
            opts.on_iteration(i, mps);
        }
    }
    return finish(std::move(mps), Scheme::local, bset, grid, opts.lambda_c);
}

InfluenceMPS contract_nonlocal(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid, double lambda_c) {
    return contract_nonlocal(bset, grid, ContractionOptions{lambda_c, {}});
}

InfluenceMPS contract_local(const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid, double lambda_c) {
    return contract_local(bset, grid, ContractionOptions{lambda_c, {}});
}

InfluenceMPS contract(Scheme scheme, const bath::InfluenceTensorSet& bset, const bath::TimeGrid& grid,
                      const ContractionOptions& opts) {
    return scheme == Scheme::local ? contract_local(bset, grid, opts) : contract_nonlocal(bset, grid, opts);
}

bath::InfluenceTensorSet memory_truncate(const bath::InfluenceTensorSet& bset, std::size_t m) {
    check_bset(bset);
    if (m > bset.max_separation()) {
        throw ConfigError("memory_truncate: depth " + std::to_string(m) + " exceeds the available separations");
    }
    bath::InfluenceTensorSet out = bset;
    for (std::size_t l = m + 1; l < out.b.size(); ++l) {
        out.b[l].setOnes();
    }
    out.depth = std::min(bset.depth, m);
    return out;
}

}  // namespace tempo::network

// ------------------------------- serialization --------------------------------

namespace tempo::network {

namespace {

constexpr char kMagic[8] = {'T', 'E', 'M', 'P', 'O', 'M', 'P', 'S'};
constexpr std::uint32_t kVersion = 1;
static_assert(std::endian::native == std::endian::little, "the influence MPS format is little-endian");

template <class T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) {
        throw ConfigError("influence MPS file is truncated");
    }
    return v;
}

}  // namespace

void write_influence_mps(std::ostream& os, const InfluenceMPS& mps) {
    os.write(kMagic, sizeof kMagic);
    put<std::uint32_t>(os, kVersion);
    put<std::uint32_t>(os, mps.scheme == Scheme::local ? 1u : 0u);
    put<std::uint64_t>(os, mps.d);
    put<std::uint64_t>(os, mps.sites.size());
    put<double>(os, mps.dt);
    put<double>(os, mps.lambda_c);
    for (double l : mps.lambdas) {
        put<double>(os, l);
    }
    for (const auto& s : mps.sites) {
        for (std::size_t r = 0; r < 3; ++r) {
            put<std::uint64_t>(os, s.extent(r));
        }
        for (const cplx& v : s.data()) {
            put<double>(os, v.real());
            put<double>(os, v.imag());
        }
    }
    const auto& st = mps.stats;
    put<std::uint64_t>(os, st.max_bond.size());
    for (std::size_t i = 0; i < st.max_bond.size(); ++i) {
        put<std::uint64_t>(os, st.max_bond[i]);
        put<double>(os, i < st.iteration_seconds.size() ? st.iteration_seconds[i] : 0.0);
        put<double>(os, i < st.discarded_per_iteration.size() ? st.discarded_per_iteration[i] : 0.0);
    }
    put<double>(os, st.cumulative_discarded);
    put<double>(os, st.total_seconds);
    if (!os) {
        throw ConfigError("failed to write influence MPS");
    }
}

InfluenceMPS read_influence_mps(std::istream& is) {
    char magic[8];
    is.read(magic, sizeof magic);
    if (!is || !std::equal(magic, magic + 8, kMagic)) {
        throw ConfigError("not an influence MPS file");
    }
    const auto version = get<std::uint32_t>(is);
    if (version != kVersion) {
        throw ConfigError("unsupported influence MPS version " + std::to_string(version));
    }
    InfluenceMPS mps;
    mps.scheme = get<std::uint32_t>(is) == 1u ? Scheme::local : Scheme::nonlocal;
    mps.d = get<std::uint64_t>(is);
    const auto k = get<std::uint64_t>(is);
    if (mps.d == 0 || mps.d > 64 || k > (1u << 24)) {
        throw ConfigError("influence MPS header is implausible");
    }
    mps.dt = get<double>(is);
    mps.lambda_c = get<double>(is);
    mps.lambdas.resize(mps.d);
    for (auto& l : mps.lambdas) {
        l = get<double>(is);
    }
    mps.sites.reserve(k);
    for (std::uint64_t n = 0; n < k; ++n) {
        Shape shape(3);
        for (auto& e : shape) {
            e = get<std::uint64_t>(is);
            if (e == 0 || e > (1u << 16)) {
                throw ConfigError("influence MPS site has an implausible extent");
            }
        }
        if (shape[1] != mps.d2()) {
            throw DimensionError("influence MPS site has the wrong physical dimension");
        }
        std::vector<cplx> data(shape_volume(shape));
        for (auto& v : data) {
            const double re = get<double>(is);
            const double im = get<double>(is);
            v = {re, im};
        }
        mps.sites.emplace_back(shape, std::move(data));
    }
    const auto n_iter = get<std::uint64_t>(is);
    if (n_iter > (1u << 24)) {
        throw ConfigError("influence MPS stats block is implausible");
    }
    for (std::uint64_t i = 0; i < n_iter; ++i) {
        mps.stats.max_bond.push_back(get<std::uint64_t>(is));
        mps.stats.iteration_seconds.push_back(get<double>(is));
        mps.stats.discarded_per_iteration.push_back(get<double>(is));
    }
    mps.stats.cumulative_discarded = get<double>(is);
    mps.stats.total_seconds = get<double>(is);
    BoundaryMPS check{mps.sites, 0, {}};
    check.validate();
    return mps;
}

}  // namespace tempo::network
