#pragma once

#include <array>
#include <span>
#include <vector>

#include "trustfs/types.hpp"

namespace trustfs {

// Dense third-order tensor. Values are stored with the first index varying
// fastest: offset(i, j, k) = i + n1 * (j + n2 * k).
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(Eigen::Index n1, Eigen::Index n2, Eigen::Index n3);

  Eigen::Index dim(int mode) const { return dims_[mode]; }
  const std::array<Eigen::Index, 3>& dims() const { return dims_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(values_.size()); }

  double& operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) {
    return values_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }
  double operator()(Eigen::Index i, Eigen::Index j, Eigen::Index k) const {
    return values_[static_cast<std::size_t>(i + dims_[0] * (j + dims_[1] * k))];
  }

  std::span<const double> values() const { return values_; }

  // Frontal slice k as an n1 x n2 matrix.
  Matrix slice(Eigen::Index k) const;
  void set_slice(Eigen::Index k, const Matrix& m);

  double frobenius_norm() const;

 private:
  std::array<Eigen::Index, 3> dims_{0, 0, 0};
  std::vector<double> values_;
};

// Column-wise Kronecker product; row index is i_a * rows(b) + i_b.
Matrix khatri_rao(const Matrix& a, const Matrix& b);

// Kolda-Bader unfolding; `mode` is 1, 2 or 3. Among the remaining modes the
// smaller index varies fastest along the columns.
Matrix unfold(const Tensor3& z, int mode);
Tensor3 fold(const Matrix& m, int mode, const std::array<Eigen::Index, 3>& dims);

// Z_ijk = sum_t a_it * h_jt * p_kt, shape rows(a) x rows(h) x rows(p).
Tensor3 cp_reconstruct(const Matrix& a, const Matrix& h, const Matrix& p);

// Frontal slice v is weights_v^(gamma/2) * slices[v].
Tensor3 stack_weighted(std::span<const Matrix> slices, const Vector& weights, double gamma);

// Frontal slice v is slices[v].
Tensor3 stack(std::span<const Matrix> slices);

}  // namespace trustfs
