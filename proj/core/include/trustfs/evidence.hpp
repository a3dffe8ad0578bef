#pragma once

#include "trustfs/types.hpp"

namespace trustfs {

// Subjective-logic opinion of each view about every other view. Off-diagonal
// rows satisfy sum_{k != v} belief(v, k) + uncertainty(v) = 1.
//
// The uncertainty mass is diagnostic only; no objective term consumes it.
struct BeliefState {
  Matrix belief;       // V x V, zero diagonal
  Vector uncertainty;  // length V, in (0, 1]
  Matrix evidence;     // V x V, zero diagonal, >= 0
  Matrix alpha;        // evidence + 1 off the diagonal, 0 on it
};

// e_vk = <P_v., P_k.> / sqrt(r) for v != k.
Matrix view_similarity(const Matrix& p);

// Negative evidence (numerical noise) is clamped to zero first.
BeliefState belief_update(const Matrix& evidence);

}  // namespace trustfs
