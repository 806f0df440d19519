#include "wqed/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace wqed {

namespace {

long shape_product(const std::vector<long>& shape) {
    long n = 1;
    for (long e : shape) {
        if (e <= 0) throw DimensionError("tensor axis extent must be positive");
        n *= e;
    }
    return n;
}

std::vector<long> row_major_strides(const std::vector<long>& shape) {
    std::vector<long> strides(shape.size(), 1);
    for (long k = static_cast<long>(shape.size()) - 2; k >= 0; --k)
        strides[k] = strides[k + 1] * shape[k + 1];
    return strides;
}

std::string shape_string(const std::vector<long>& shape) {
    std::ostringstream os;
    os << "(";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << ")";
    return os.str();
}

} // namespace

Tensor::Tensor(std::vector<long> shape)
    : shape_(std::move(shape)), data_(static_cast<size_t>(shape_product(shape_))) {}

Tensor::Tensor(std::vector<long> shape, std::vector<Complex> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (shape_product(shape_) != static_cast<long>(data_.size()))
        throw DimensionError("tensor data length does not match shape " + shape_string(shape_));
}

Tensor Tensor::from_matrix(const Matrix& m) {
    Tensor t({m.rows(), m.cols()});
    for (long i = 0; i < m.rows(); ++i)
        for (long j = 0; j < m.cols(); ++j)
            t.data_[static_cast<size_t>(i * m.cols() + j)] = m(i, j);
    return t;
}

Complex& Tensor::at(std::initializer_list<long> idx) {
    return const_cast<Complex&>(std::as_const(*this).at(idx));
}

const Complex& Tensor::at(std::initializer_list<long> idx) const {
    if (static_cast<long>(idx.size()) != rank())
        throw DimensionError("index rank mismatch");
    const auto strides = row_major_strides(shape_);
    long lin = 0;
    long k = 0;
    for (long i : idx) {
        if (i < 0 || i >= shape_[static_cast<size_t>(k)])
            throw DimensionError("tensor index out of range");
        lin += i * strides[static_cast<size_t>(k)];
        ++k;
    }
    return data_[static_cast<size_t>(lin)];
}

Tensor Tensor::reshaped(std::vector<long> new_shape) const {
    if (shape_product(new_shape) != size())
        throw DimensionError("reshape size mismatch: " + shape_string(shape_) + " -> " +
                             shape_string(new_shape));
    Tensor t;
    t.shape_ = std::move(new_shape);
    t.data_ = data_;
    return t;
}

Tensor Tensor::permuted(const std::vector<long>& order) const {
    if (static_cast<long>(order.size()) != rank())
        throw DimensionError("permutation rank mismatch");
    std::vector<long> seen(order.size(), 0);
    std::vector<long> new_shape(order.size());
    for (size_t k = 0; k < order.size(); ++k) {
        if (order[k] < 0 || order[k] >= rank() || seen[static_cast<size_t>(order[k])]++)
            throw DimensionError("invalid axis permutation");
        new_shape[k] = shape_[static_cast<size_t>(order[k])];
    }
    Tensor out(new_shape);
    const auto in_strides = row_major_strides(shape_);
    const auto out_strides = row_major_strides(new_shape);
    const long n = size();
    std::vector<long> idx(order.size(), 0);
    for (long lin = 0; lin < n; ++lin) {
        long rem = lin;
        long src = 0;
        for (size_t k = 0; k < order.size(); ++k) {
            const long i = rem / out_strides[k];
            rem -= i * out_strides[k];
            src += i * in_strides[static_cast<size_t>(order[k])];
        }
        out.data_[static_cast<size_t>(lin)] = data_[static_cast<size_t>(src)];
    }
    return out;
}

Tensor Tensor::conjugated() const {
    Tensor t = *this;
    for (auto& v : t.data_) v = std::conj(v);
    return t;
}

Tensor Tensor::scaled(Complex factor) const {
    Tensor t = *this;
    for (auto& v : t.data_) v *= factor;
    return t;
}

Matrix Tensor::to_matrix() const {
    if (rank() != 2) throw DimensionError("to_matrix requires a rank-2 tensor");
    return to_matrix(shape_[0], shape_[1]);
}

Matrix Tensor::to_matrix(long rows, long cols) const {
    if (rows * cols != size())
        throw DimensionError("to_matrix size mismatch");
    Matrix m(rows, cols);
    for (long i = 0; i < rows; ++i)
        for (long j = 0; j < cols; ++j)
            m(i, j) = data_[static_cast<size_t>(i * cols + j)];
    return m;
}

double Tensor::frobenius_norm() const {
    double s = 0.0;
    for (const auto& v : data_) s += std::norm(v);
    return std::sqrt(s);
}

bool Tensor::all_finite() const {
    for (const auto& v : data_)
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    return true;
}

Tensor contract(const Tensor& a, const Tensor& b,
                std::span<const std::pair<long, long>> axis_pairs) {
    std::vector<bool> a_used(static_cast<size_t>(a.rank()), false);
    std::vector<bool> b_used(static_cast<size_t>(b.rank()), false);
    for (const auto& [ia, ib] : axis_pairs) {
        if (ia < 0 || ia >= a.rank() || ib < 0 || ib >= b.rank())
            throw DimensionError("contract: axis out of range");
        if (a_used[static_cast<size_t>(ia)] || b_used[static_cast<size_t>(ib)])
            throw DimensionError("contract: axis paired twice");
        if (a.extent(ia) != b.extent(ib))
            throw DimensionError("contract: paired axes have extents " +
                                 std::to_string(a.extent(ia)) + " and " +
                                 std::to_string(b.extent(ib)));
        a_used[static_cast<size_t>(ia)] = true;
        b_used[static_cast<size_t>(ib)] = true;
    }

    std::vector<long> a_free, b_free, a_perm, b_perm, out_shape;
    for (long k = 0; k < a.rank(); ++k)
        if (!a_used[static_cast<size_t>(k)]) {
            a_free.push_back(k);
            out_shape.push_back(a.extent(k));
        }
    for (long k = 0; k < b.rank(); ++k)
        if (!b_used[static_cast<size_t>(k)]) {
            b_free.push_back(k);
        }

    a_perm = a_free;
    for (const auto& [ia, ib] : axis_pairs) { (void)ib; a_perm.push_back(ia); }
    for (const auto& [ia, ib] : axis_pairs) { (void)ia; b_perm.push_back(ib); }
    for (long k : b_free) {
        b_perm.push_back(k);
        out_shape.push_back(b.extent(k));
    }

    long m = 1, n = 1, kk = 1;
    for (long ax : a_free) m *= a.extent(ax);
    for (long ax : b_free) n *= b.extent(ax);
    for (const auto& [ia, ib] : axis_pairs) { (void)ib; kk *= a.extent(ia); }

    const Tensor ap = a.permuted(a_perm);
    const Tensor bp = b.permuted(b_perm);
    const Matrix prod = ap.to_matrix(m, kk) * bp.to_matrix(kk, n);

    if (out_shape.empty()) {
        // full contraction to a scalar: keep it as a rank-0-like 1-element tensor
        return Tensor({1}, {prod(0, 0)});
    }
    Tensor out = Tensor::from_matrix(prod).reshaped(out_shape);
    return out;
}

Tensor contract(const Tensor& a, const Tensor& b,
                std::initializer_list<std::pair<long, long>> axis_pairs) {
    std::vector<std::pair<long, long>> v(axis_pairs);
    return contract(a, b, std::span<const std::pair<long, long>>(v));
}

Tensor tensor_kron(const Tensor& a, const Tensor& b) {
    if (a.rank() != 2 || b.rank() != 2)
        throw DimensionError("tensor_kron requires rank-2 tensors");
    if (!a.all_finite() || !b.all_finite())
        throw NumericError("tensor_kron: non-finite input");
    const long ar = a.extent(0), ac = a.extent(1);
    const long br = b.extent(0), bc = b.extent(1);
    Tensor out({ar * br, ac * bc});
    for (long i = 0; i < ar; ++i)
        for (long j = 0; j < ac; ++j) {
            const Complex av = a[i * ac + j];
            for (long k = 0; k < br; ++k)
                for (long l = 0; l < bc; ++l)
                    out[(i * br + k) * (ac * bc) + (j * bc + l)] = av * b[k * bc + l];
        }
    return out;
}

SvdResult svd_truncate(const Tensor& m, long bond_max, double cutoff,
                       bool preserve_norm) {
    if (m.rank() != 2) throw DimensionError("svd_truncate requires a rank-2 tensor");
    if (bond_max < 1) throw ContractViolation("svd_truncate: bond_max must be >= 1");
    if (cutoff < 0.0) throw ContractViolation("svd_truncate: cutoff must be >= 0");
    if (!m.all_finite())
        throw NumericError("svd_truncate: non-finite input of shape " +
                           std::to_string(m.extent(0)) + "x" + std::to_string(m.extent(1)));

    const Matrix mat = m.to_matrix();
    const long rows = mat.rows(), cols = mat.cols();
    const long mind = std::min(rows, cols);
    Matrix u_full, v_full;
    Eigen::VectorXd sv;
    if (mind >= 16 && mind > 2 * bond_max) {
        // Blocks much larger than the bond cap usually carry far fewer
        // significant directions than their shape allows; a pivoted QR
        // reveals that rank and shrinks the SVD to it. Pivoting keeps
        // |R_ii| non-increasing.
        Eigen::ColPivHouseholderQR<Matrix> qr(mat);
        const Matrix r_mat =
            qr.matrixR().topRows(mind).template triangularView<Eigen::Upper>();
        const double head = std::abs(r_mat(0, 0));
        long rank = 0;
        while (rank < mind && std::abs(r_mat(rank, rank)) > 1e-14 * head) ++rank;
        rank = std::max<long>(1, rank);

        const Matrix reduced =
            r_mat.topRows(rank) * qr.colsPermutation().transpose();  // (rank, cols)
        if (rank < 16) {
            Eigen::JacobiSVD<Matrix> svd(reduced,
                                         Eigen::ComputeThinU | Eigen::ComputeThinV);
            u_full = (qr.householderQ() * Matrix::Identity(rows, rank)) * svd.matrixU();
            v_full = svd.matrixV();
            sv = svd.singularValues();
        } else {
            Eigen::BDCSVD<Matrix> svd(reduced,
                                      Eigen::ComputeThinU | Eigen::ComputeThinV);
            u_full = (qr.householderQ() * Matrix::Identity(rows, rank)) * svd.matrixU();
            v_full = svd.matrixV();
            sv = svd.singularValues();
        }
    } else if (mind >= 16) {
        Eigen::BDCSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u_full = svd.matrixU();
        v_full = svd.matrixV();
        sv = svd.singularValues();
    } else {
        Eigen::JacobiSVD<Matrix> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
        u_full = svd.matrixU();
        v_full = svd.matrixV();
        sv = svd.singularValues();
    }
    const long full = sv.size();

    double total = 0.0;
    for (long i = 0; i < full; ++i) total += sv(i) * sv(i);

    long kept = std::min(bond_max, full);
    if (total > 0.0) {
        long significant = 0;
        for (long i = 0; i < full; ++i)
            if (sv(i) * sv(i) >= cutoff * total) ++significant;
        kept = std::min(kept, std::max<long>(1, significant));
    } else {
        kept = 1;
    }

    double kept_sq = 0.0;
    for (long i = 0; i < kept; ++i) kept_sq += sv(i) * sv(i);
    const double discarded = std::max(0.0, total - kept_sq);

    double scale = 1.0;
    if (preserve_norm && kept_sq > 0.0) scale = std::sqrt(total / kept_sq);

    SvdResult r;
    r.left = Tensor::from_matrix(u_full.leftCols(kept));
    r.right = Tensor::from_matrix(v_full.leftCols(kept).adjoint());
    r.singular_values.resize(static_cast<size_t>(kept));
    for (long i = 0; i < kept; ++i)
        r.singular_values[static_cast<size_t>(i)] = sv(i) * scale;
    r.discarded_weight = discarded;

    if (!r.left.all_finite() || !r.right.all_finite())
        throw NumericError("svd_truncate: factorization produced non-finite output for " +
                           std::to_string(m.extent(0)) + "x" + std::to_string(m.extent(1)));
    return r;
}

Tensor matrix_exponential_unitary(const Tensor& h) {
    if (h.rank() != 2 || h.extent(0) != h.extent(1))
        throw DimensionError("matrix_exponential_unitary requires a square rank-2 tensor");
    if (!h.all_finite()) throw NumericError("matrix_exponential_unitary: non-finite input");

    const Matrix hm = h.to_matrix();
    const double nrm = hm.norm();
    const double dev = (hm - hm.adjoint()).norm();
    if (dev > 1e-10 * std::max(1.0, nrm))
        throw ContractViolation("matrix_exponential_unitary: input is not Hermitian (deviation " +
                                std::to_string(dev) + ")");

    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hm + hm.adjoint()));
    if (es.info() != Eigen::Success)
        throw NumericError("matrix_exponential_unitary: eigendecomposition failed for " +
                           std::to_string(h.extent(0)) + "x" + std::to_string(h.extent(1)));
    const Eigen::VectorXd ev = es.eigenvalues();
    Vector phases(ev.size());
    for (long i = 0; i < ev.size(); ++i)
        phases(i) = std::polar(1.0, -ev(i));
    const Matrix u = es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
    return Tensor::from_matrix(u);
}

Tensor tensor_identity(long n) {
    Tensor t({n, n});
    for (long i = 0; i < n; ++i) t[i * n + i] = 1.0;
    return t;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape()) throw DimensionError("max_abs_diff: shape mismatch");
    double d = 0.0;
    for (long i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

} // namespace wqed
