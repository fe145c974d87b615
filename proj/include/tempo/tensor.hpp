// tensor.hpp: dense complex tensors, pairwise contraction and truncated SVD.
#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tempo {

using cplx = std::complex<double>;
using Shape = std::vector<std::size_t>;
using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Dense row-major tensor of complex doubles. The last index runs fastest.
class DenseTensor {
public:
    DenseTensor() = default;
    explicit DenseTensor(Shape shape);
    DenseTensor(Shape shape, std::vector<cplx> data);

    static DenseTensor scalar(cplx value);

    std::size_t rank() const noexcept { return shape_.size(); }
    const Shape& shape() const noexcept { return shape_; }
    std::size_t extent(std::size_t axis) const { return shape_.at(axis); }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<const cplx> data() const noexcept { return data_; }
    std::span<cplx> data() noexcept { return data_; }

    cplx& operator[](std::size_t flat) noexcept { return data_[flat]; }
    const cplx& operator[](std::size_t flat) const noexcept { return data_[flat]; }

    // Multi-index access; throws DimensionError on rank or bound violations.
    cplx at(std::span<const std::size_t> index) const;
    cplx at(std::initializer_list<std::size_t> index) const {
        return at(std::span<const std::size_t>(index.begin(), index.size()));
    }
    std::size_t flat_index(std::span<const std::size_t> index) const;

    const std::vector<std::string>& labels() const noexcept { return labels_; }
    DenseTensor& set_labels(std::vector<std::string> labels);

    // Same data in the same linear order under a new shape.
    DenseTensor reshape(Shape shape) const;
    // result.shape[i] = shape[perm[i]].
    DenseTensor permute(std::span<const std::size_t> perm) const;

    // View of the data as a (rows x cols) row-major matrix; rows * cols must equal size().
    Eigen::Map<const RowMatrixXcd> as_matrix(std::size_t rows, std::size_t cols) const;
    Eigen::Map<RowMatrixXcd> as_matrix(std::size_t rows, std::size_t cols);

    double frobenius_norm() const noexcept;

private:
    Shape shape_;
    std::vector<cplx> data_;
    std::vector<std::string> labels_;
};

std::size_t shape_volume(const Shape& shape) noexcept;

/// Sum over the paired axes (axis of a, axis of b). The result carries the free
/// axes of a followed by the free axes of b, each in their original order.
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::span<const std::pair<std::size_t, std::size_t>> pairs);
DenseTensor contract(const DenseTensor& a, const DenseTensor& b,
                     std::initializer_list<std::pair<std::size_t, std::size_t>> pairs);

/// Largest-first singular triplets kept after relative-weight truncation.
struct TruncatedSVD {
    Eigen::MatrixXcd u;                // rows x rank, orthonormal columns
    Eigen::VectorXd singular_values;   // descending, >= 0
    Eigen::MatrixXcd v_dag;            // rank x cols, orthonormal rows
    double discarded_weight = 0.0;     // sum of dropped sigma^2
    double total_weight = 0.0;         // sum of all sigma^2

    Eigen::Index rank() const noexcept { return singular_values.size(); }
    double relative_discarded() const noexcept {
        return total_weight > 0.0 ? discarded_weight / total_weight : 0.0;
    }
};

/// Number of singular values to keep for a descending spectrum under the cutoff
/// sqrt((sum_all - sum_kept) / sum_all) <= lambda_c. The smallest rank meeting the
/// inequality wins, widened so that values equal to the last kept one (relative
/// 1e-6) are kept too. lambda_c == 0 keeps the numerical rank (values above
/// n * eps * sigma_max). Never returns 0 for a non-empty spectrum.
Eigen::Index truncation_rank(std::span<const double> singular_values, double lambda_c);

TruncatedSVD svd_truncate(const Eigen::Ref<const Eigen::MatrixXcd>& m, double lambda_c);

}  // namespace tempo
