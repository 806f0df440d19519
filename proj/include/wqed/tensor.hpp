#pragma once

#include <complex>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "wqed/errors.hpp"

namespace wqed {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Dense complex tensor of arbitrary rank.
///
/// Element order is row-major over the listed axes: the last axis runs
/// fastest. This order is fixed for the whole project; every reshape is a
/// pure metadata change and never moves data.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<long> shape);
    Tensor(std::vector<long> shape, std::vector<Complex> data);

    static Tensor from_matrix(const Matrix& m);

    long rank() const { return static_cast<long>(shape_.size()); }
    long extent(long axis) const { return shape_.at(static_cast<size_t>(axis)); }
    long size() const { return static_cast<long>(data_.size()); }
    const std::vector<long>& shape() const { return shape_; }

    Complex& operator[](long i) { return data_[static_cast<size_t>(i)]; }
    const Complex& operator[](long i) const { return data_[static_cast<size_t>(i)]; }
    Complex& at(std::initializer_list<long> idx);
    const Complex& at(std::initializer_list<long> idx) const;

    std::span<Complex> data() { return data_; }
    std::span<const Complex> data() const { return data_; }

    /// Metadata-only reshape; product of extents must match.
    Tensor reshaped(std::vector<long> new_shape) const;

    /// Rearranges data so that new axis k is old axis `order[k]`.
    Tensor permuted(const std::vector<long>& order) const;

    Tensor conjugated() const;
    Tensor scaled(Complex factor) const;

    /// Copies a rank-2 tensor into an Eigen matrix.
    Matrix to_matrix() const;
    /// Copies into an Eigen matrix of the given shape (size must match).
    Matrix to_matrix(long rows, long cols) const;

    double frobenius_norm() const;
    bool all_finite() const;

private:
    std::vector<long> shape_;
    std::vector<Complex> data_;
};

/// Sums over the paired axes; result shape is the concatenation of the
/// uncontracted axes of `a` (in order) then those of `b`. An empty pair
/// list yields the outer product.
Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::pair<long, long>> axis_pairs);
Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::pair<long, long>> axis_pairs);

/// Kronecker product of two rank-2 tensors (vectors as n x 1 are fine).
Tensor tensor_kron(const Tensor& a, const Tensor& b);

struct SvdResult {
    Tensor left;                          // (rows, kept), isometric columns
    std::vector<double> singular_values;  // descending, >= 0
    Tensor right;                         // (kept, cols), isometric rows
    double discarded_weight = 0.0;        // sum of squared dropped values
};

/// Truncated SVD of a rank-2 tensor. Keeps at most `bond_max` singular
/// values and drops any with relative squared weight below `cutoff`
/// (lambda^2 / sum lambda^2 < cutoff). At least one value is always kept.
/// With `preserve_norm` the retained values are rescaled so that their
/// squared sum equals the pre-truncation total; pass false to keep the
/// raw values (then the squared reconstruction error equals
/// discarded_weight).
SvdResult svd_truncate(const Tensor& m, long bond_max, double cutoff,
                       bool preserve_norm = true);

/// exp(-i h) for a Hermitian rank-2 tensor, via eigendecomposition.
/// Rejects inputs with ||h - h^dag|| / ||h|| above 1e-10.
Tensor matrix_exponential_unitary(const Tensor& h);

Tensor tensor_identity(long n);

double max_abs_diff(const Tensor& a, const Tensor& b);

} // namespace wqed
