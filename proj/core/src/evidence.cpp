#include "trustfs/evidence.hpp"

#include <cmath>

#include "trustfs/error.hpp"

namespace trustfs {

Matrix view_similarity(const Matrix& p) {
  if (p.cols() < 1) throw Error(ErrorKind::kInvalidArgument, "view_similarity: rank must be >= 1");
  Matrix e = (p * p.transpose()) / std::sqrt(static_cast<double>(p.cols()));
  e.diagonal().setZero();
  return e;
}

BeliefState belief_update(const Matrix& evidence) {
  const Eigen::Index num_views = evidence.rows();
  if (num_views < 2 || evidence.cols() != num_views) {
    throw Error(ErrorKind::kShapeMismatch, "belief_update: evidence must be V x V with V >= 2");
  }
  BeliefState out;
  out.evidence = evidence.cwiseMax(0.0);
  out.evidence.diagonal().setZero();
  out.alpha = out.evidence.array() + 1.0;
  out.alpha.diagonal().setZero();
  out.belief = Matrix::Zero(num_views, num_views);
  out.uncertainty = Vector(num_views);
  for (Eigen::Index v = 0; v < num_views; ++v) {
    const double strength = out.alpha.row(v).sum();  // Dirichlet strength T_v
    out.belief.row(v) = out.evidence.row(v) / strength;
    out.uncertainty(v) = static_cast<double>(num_views - 1) / strength;
  }
  return out;
}

}  // namespace trustfs
