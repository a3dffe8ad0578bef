#include "trustfs/tensor.hpp"

#include <cmath>

#include "trustfs/error.hpp"

namespace trustfs {

Tensor3::Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3) : dims_{n1, n2, n3} {
  if (n1 < 1 || n2 < 1 || n3 < 1) {
    throw Error(ErrorKind::kInvalidArgument, "tensor dimensions must be >= 1");
  }
  values_.assign(static_cast<std::size_t>(n1 * n2 * n3), 0.0);
}

Matrix Tensor3::slice(Eigen::Index k) const {
  Matrix m(dims_[0], dims_[1]);
  for (Eigen::Index j = 0; j < dims_[1]; ++j) {
    for (Eigen::Index i = 0; i < dims_[0]; ++i) m(i, j) = (*this)(i, j, k);
  }
  return m;
}

void Tensor3::set_slice(Eigen::Index k, const Matrix& m) {
  if (m.rows() != dims_[0] || m.cols() != dims_[1]) {
    throw Error(ErrorKind::kShapeMismatch, "slice shape does not match tensor");
  }
  for (Eigen::Index j = 0; j < dims_[1]; ++j) {
    for (Eigen::Index i = 0; i < dims_[0]; ++i) (*this)(i, j, k) = m(i, j);
  }
}

double Tensor3::frobenius_norm() const {
  double sum = 0.0;
  for (double x : values_) sum += x * x;
  return std::sqrt(sum);
}

Matrix khatri_rao(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "khatri_rao: column counts differ");
  }
  Matrix out(a.rows() * b.rows(), a.cols());
  for (Eigen::Index t = 0; t < a.cols(); ++t) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      out.col(t).segment(i * b.rows(), b.rows()) = a(i, t) * b.col(t);
    }
  }
  return out;
}

namespace {

void check_mode(int mode) {
  if (mode < 1 || mode > 3) throw Error(ErrorKind::kInvalidArgument, "mode must be 1, 2 or 3");
}

// (row, col) of element (i, j, k) in the mode-m unfolding.
std::pair<Eigen::Index, Eigen::Index> unfold_index(int mode, const std::array<Eigen::Index, 3>& d,
                                                   Eigen::Index i, Eigen::Index j, Eigen::Index k) {
  switch (mode) {
    case 1: return {i, j + d[1] * k};
    case 2: return {j, i + d[0] * k};
    default: return {k, i + d[0] * j};
  }
}

}  // namespace

Matrix unfold(const Tensor3& z, int mode) {
  check_mode(mode);
  const auto& d = z.dims();
  const Eigen::Index rows = d[static_cast<std::size_t>(mode - 1)];
  Matrix out(rows, z.size() / rows);
  for (Eigen::Index k = 0; k < d[2]; ++k) {
    for (Eigen::Index j = 0; j < d[1]; ++j) {
      for (Eigen::Index i = 0; i < d[0]; ++i) {
        auto [r, c] = unfold_index(mode, d, i, j, k);
        out(r, c) = z(i, j, k);
      }
    }
  }
  return out;
}

Tensor3 fold(const Matrix& m, int mode, const std::array<Eigen::Index, 3>& dims) {
  check_mode(mode);
  Tensor3 z(dims[0], dims[1], dims[2]);
  if (m.rows() != dims[static_cast<std::size_t>(mode - 1)] || m.size() != z.size()) {
    throw Error(ErrorKind::kShapeMismatch, "fold: matrix shape does not match dims");
  }
  for (Eigen::Index k = 0; k < dims[2]; ++k) {
    for (Eigen::Index j = 0; j < dims[1]; ++j) {
      for (Eigen::Index i = 0; i < dims[0]; ++i) {
        auto [r, c] = unfold_index(mode, dims, i, j, k);
        z(i, j, k) = m(r, c);
      }
    }
  }
  return z;
}

Tensor3 cp_reconstruct(const Matrix& a, const Matrix& h, const Matrix& p) {
  if (a.cols() != h.cols() || a.cols() != p.cols()) {
    throw Error(ErrorKind::kShapeMismatch, "cp_reconstruct: factor ranks differ");
  }
  Tensor3 z(a.rows(), h.rows(), p.rows());
  for (Eigen::Index k = 0; k < p.rows(); ++k) {
    // Slice k is A diag(P_k.) H^T.
    z.set_slice(k, a * p.row(k).asDiagonal() * h.transpose());
  }
  return z;
}

Tensor3 stack(std::span<const Matrix> slices) {
  if (slices.empty()) throw Error(ErrorKind::kInvalidArgument, "stack: no slices");
  Tensor3 z(slices.front().rows(), slices.front().cols(), static_cast<Eigen::Index>(slices.size()));
  for (std::size_t v = 0; v < slices.size(); ++v) {
    z.set_slice(static_cast<Eigen::Index>(v), slices[v]);
  }
  return z;
}

Tensor3 stack_weighted(std::span<const Matrix> slices, const Vector& weights, double gamma) {
  if (static_cast<Eigen::Index>(slices.size()) != weights.size()) {
    throw Error(ErrorKind::kShapeMismatch, "stack_weighted: one weight per slice required");
  }
  if ((weights.array() < 0.0).any() || std::abs(weights.sum() - 1.0) > 1e-9) {
    throw Error(ErrorKind::kInvalidArgument, "stack_weighted: weights are off the simplex");
  }
  Tensor3 z = stack(slices);
  for (Eigen::Index k = 0; k < weights.size(); ++k) {
    z.set_slice(k, std::pow(weights(k), gamma / 2.0) * slices[static_cast<std::size_t>(k)]);
  }
  return z;
}

}  // namespace trustfs
