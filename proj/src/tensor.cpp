#include "tempo/tensor.hpp"

#include "tempo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

namespace tempo {

namespace {

constexpr double kTieTolerance = 1e-6;

std::string shape_string(const Shape& s) {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < s.size(); ++i) {
        os << (i ? "," : "") << s[i];
    }
    os << ')';
    return os.str();
}

std::vector<std::size_t> strides_of(const Shape& s) {
    std::vector<std::size_t> st(s.size(), 1);
    for (std::size_t i = s.size(); i-- > 1;) {
        st[i - 1] = st[i] * s[i];
    }
    return st;
}

}  // namespace

std::size_t shape_volume(const Shape& shape) noexcept {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

DenseTensor::DenseTensor(Shape shape) : shape_(std::move(shape)) {
    for (auto e : shape_) {
        if (e == 0) {
            throw DimensionError("DenseTensor: extents must be positive, got " + shape_string(shape_));
        }
    }
    data_.assign(shape_volume(shape_), cplx{0.0, 0.0});
}

DenseTensor::DenseTensor(Shape shape, std::vector<cplx> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    for (auto e : shape_) {
        if (e == 0) {
            throw DimensionError("DenseTensor: extents must be positive, got " + shape_string(shape_));
        }
    }
    if (shape_volume(shape_) != data_.size()) {
        throw DimensionError("DenseTensor: shape " + shape_string(shape_) + " does not hold " +
                             std::to_string(data_.size()) + " values");
    }
}

DenseTensor DenseTensor::scalar(cplx value) { return DenseTensor({}, {value}); }

std::size_t DenseTensor::flat_index(std::span<const std::size_t> index) const {
    if (index.size() != shape_.size()) {
        throw DimensionError("DenseTensor::at: rank mismatch");
    }
    std::size_t flat = 0;
    for (std::size_t i = 0; i < index.size(); ++i) {
        if (index[i] >= shape_[i]) {
            throw DimensionError("DenseTensor::at: index out of range on axis " + std::to_string(i));
        }
        flat = flat * shape_[i] + index[i];
    }
    return flat;
}

cplx DenseTensor::at(std::span<const std::size_t> index) const { return data_[flat_index(index)]; }

DenseTensor& DenseTensor::set_labels(std::vector<std::string> labels) {
    if (!labels.empty() && labels.size() != shape_.size()) {
        throw DimensionError("DenseTensor: label count differs from rank");
    }
    labels_ = std::move(labels);
    return *this;
}

DenseTensor DenseTensor::reshape(Shape shape) const {
    if (shape_volume(shape) != data_.size()) {
        throw DimensionError("DenseTensor::reshape: " + shape_string(shape_) + " -> " + shape_string(shape));
    }
    return DenseTensor(std::move(shape), data_);
}

DenseTensor DenseTensor::permute(std::span<const std::size_t> perm) const {
    const std::size_t n = shape_.size();
    if (perm.size() != n) {
        throw DimensionError("DenseTensor::permute: permutation length differs from rank");
    }
    std::vector<bool> seen(n, false);
    for (auto p : perm) {
        if (p >= n || seen[p]) {
            throw DimensionError("DenseTensor::permute: not a permutation");
        }
        seen[p] = true;
    }
    Shape out_shape(n);
    for (std::size_t i = 0; i < n; ++i) {
        out_shape[i] = shape_[perm[i]];
    }
    const auto in_strides = strides_of(shape_);
    std::vector<std::size_t> step(n);
    for (std::size_t i = 0; i < n; ++i) {
        step[i] = in_strides[perm[i]];
    }
    DenseTensor out(out_shape);
    if (!labels_.empty()) {
        std::vector<std::string> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            l[i] = labels_[perm[i]];
        }
        out.labels_ = std::move(l);
    }
    // Odometer over the output index, tracking the matching input offset.
    std::vector<std::size_t> idx(n, 0);
    std::size_t src = 0;
    for (std::size_t flat = 0; flat < out.data_.size(); ++flat) {
        out.data_[flat] = data_[src];
        for (std::size_t ax = n; ax-- > 0;) {
            if (++idx[ax] < out_shape[ax]) {
                src += step[ax];
                break;
            }
            src -= step[ax] * (out_shape[ax] - 1);
            idx[ax] = 0;
        }
    }
    return out;
}

Eigen::Map<const RowMatrixXcd> DenseTensor::as_matrix(std::size_t rows, std::size_t cols) const {
    if (rows * cols != data_.size()) {
        throw DimensionError("DenseTensor::as_matrix: size mismatch");
    }
    return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Eigen::Map<RowMatrixXcd> DenseTensor::as_matrix(std::size_t rows, std::size_t cols) {
    if (rows * cols != data_.size()) {
        throw DimensionError("DenseTensor::as_matrix: size mismatch");
    }
    return {data_.data(), static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

double DenseTensor::frobenius_norm() const noexcept {
    double s = 0.0;
    for (const auto& v : data_) {
        s += std::norm(v);
    }
    return std::sqrt(s);
}

// ------------------------------- contraction ---------------------------------

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs) {
    const std::size_t ra = a.rank();
    const std::size_t rb = b.rank();
    std::vector<bool> a_used(ra, false), b_used(rb, false);
    std::size_t k = 1;
    for (const auto& [ia, ib] : pairs) {
        if (ia >= ra || ib >= rb) {
            throw DimensionError("contract: axis out of range");
        }
        if (a_used[ia] || b_used[ib]) {
            throw DimensionError("contract: axis paired twice");
        }
        if (a.extent(ia) != b.extent(ib)) {
            throw DimensionError("contract: extent mismatch " + std::to_string(a.extent(ia)) + " vs " +
                                 std::to_string(b.extent(ib)));
        }
        a_used[ia] = b_used[ib] = true;
        k *= a.extent(ia);
    }

    // a -> (free_a, paired) and b -> (paired, free_b), then one GEMM.
    std::vector<std::size_t> perm_a, perm_b;
    Shape out_shape;
    std::size_t m = 1, n = 1;
    for (std::size_t i = 0; i < ra; ++i) {
        if (!a_used[i]) {
            perm_a.push_back(i);
            out_shape.push_back(a.extent(i));
            m *= a.extent(i);
        }
    }
    for (const auto& pr : pairs) {
        perm_a.push_back(pr.first);
        perm_b.push_back(pr.second);
    }
    for (std::size_t i = 0; i < rb; ++i) {
        if (!b_used[i]) {
            perm_b.push_back(i);
            out_shape.push_back(b.extent(i));
            n *= b.extent(i);
        }
    }
    const DenseTensor ap = a.permute(perm_a);
    const DenseTensor bp = b.permute(perm_b);
    DenseTensor out = out_shape.empty() ? DenseTensor::scalar(0.0) : DenseTensor(out_shape);
    out.as_matrix(m, n).noalias() = ap.as_matrix(m, k) * bp.as_matrix(k, n);
    return out;
}

DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    return contract(a, b, std::span<const std::pair<std::size_t, std::size_t>>(pairs.begin(), pairs.size()));
}

// ---------------------------------- SVD ---------------------------------------

Eigen::Index truncation_rank(std::span<const double> sv, double lambda_c) {
    const auto n = static_cast<Eigen::Index>(sv.size());
    if (n == 0) {
        return 0;
    }
    if (sv[0] == 0.0) {
        return 1;
    }
    if (lambda_c <= 0.0) {
        // Numerical rank: values at rounding level carry no information.
        const double floor = sv[0] * static_cast<double>(n) * std::numeric_limits<double>::epsilon();
        Eigen::Index rank = 1;
        while (rank < n && sv[static_cast<std::size_t>(rank)] > floor) {
            ++rank;
        }
        return rank;
    }
    double total = 0.0;
    for (auto it = sv.rbegin(); it != sv.rend(); ++it) {
        total += (*it) * (*it);
    }
    // Walk from the smallest value upward while the tail still satisfies the cutoff.
    Eigen::Index rank = n;
    double tail = 0.0;
    for (Eigen::Index r = n - 1; r >= 1; --r) {
        const double next = tail + sv[static_cast<std::size_t>(r)] * sv[static_cast<std::size_t>(r)];
        if (std::sqrt(next / total) <= lambda_c) {
            tail = next;
            rank = r;
        } else {
            break;
        }
    }
    // A degenerate multiplet straddling the cut is kept whole.
    while (rank < n && sv[static_cast<std::size_t>(rank)] >= sv[static_cast<std::size_t>(rank - 1)] * (1.0 - kTieTolerance)) {
        ++rank;
    }
    return rank;
}

TruncatedSVD svd_truncate(const Eigen::Ref<const Eigen::MatrixXcd>& m, double lambda_c) {
    if (!(lambda_c >= 0.0)) {
        throw DomainError("svd_truncate: lambda_c must be >= 0");
    }
    if (!m.allFinite()) {
        throw NumericError("svd_truncate: matrix has non-finite entries");
    }
    const auto rows = static_cast<lapack_int>(m.rows());
    const auto cols = static_cast<lapack_int>(m.cols());
    const lapack_int mn = std::min(rows, cols);
    Eigen::VectorXd s(mn);
    Eigen::MatrixXcd u(rows, mn);
    Eigen::MatrixXcd vt(mn, cols);
    Eigen::MatrixXcd work = m;
    lapack_int info = LAPACKE_zgesdd(LAPACK_COL_MAJOR, 'S', rows, cols, work.data(), rows, s.data(), u.data(), rows,
                                     vt.data(), mn);
    if (info > 0) {
        // Divide and conquer failed to converge; the QR-iteration driver is slower but more robust.
        work = m;
        std::vector<double> superb(static_cast<std::size_t>(std::max<lapack_int>(mn, 1)));
        info = LAPACKE_zgesvd(LAPACK_COL_MAJOR, 'S', 'S', rows, cols, work.data(), rows, s.data(), u.data(), rows,
                              vt.data(), mn, superb.data());
    }
    if (info != 0) {
        throw NumericError("svd_truncate: SVD did not converge (info " + std::to_string(info) + ")");
    }
    const Eigen::Index rank = truncation_rank(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                                              lambda_c);
    TruncatedSVD out;
    out.total_weight = s.squaredNorm();
    out.discarded_weight = s.tail(s.size() - rank).squaredNorm();
    out.singular_values = s.head(rank);
    out.u = u.leftCols(rank);
    out.v_dag = vt.topRows(rank);
    return out;
}

}  // namespace tempo
