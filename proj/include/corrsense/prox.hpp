#pragma once

// Norms, proximal operators and norm-ball projections for the four
// structure-inducing norms. Matrices for the trace norm are stored
// flattened row-major when they travel as vectors.

#include <cstdint>
#include <variant>

#include <Eigen/Dense>

namespace corrsense {

/// Contiguous equal-sized blocks covering [0, m k).
struct BlockPartition {
  std::int64_t m = 0;
  std::int64_t k = 0;

  std::int64_t dim() const { return m * k; }
  std::int64_t block_of(std::int64_t i) const { return i / k; }
};

struct L1Norm {};
struct GroupNorm {
  BlockPartition partition;
};
struct LinfNorm {};
struct TraceNorm {
  std::int64_t m1 = 0;
  std::int64_t m2 = 0;
};

using NormKind = std::variant<L1Norm, GroupNorm, LinfNorm, TraceNorm>;

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorCRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixCRef = Eigen::Ref<const Eigen::MatrixXd>;

/// Fixed ambient dimension of the norm, or -1 when any length is accepted.
std::int64_t required_dim(const NormKind& kind);
const char* norm_name(const NormKind& kind);

double norm_eval(const NormKind& kind, const VectorCRef& x);

Vector prox_l1(const VectorCRef& x, double theta);
Vector prox_l1l2(const VectorCRef& x, const BlockPartition& partition, double theta);
Matrix prox_trace(const MatrixCRef& a, double theta);

Vector project_l2_ball(const VectorCRef& x, const VectorCRef& center, double radius);
Vector project_l1_ball(const VectorCRef& x, double radius);
Vector project_l1l2_ball(const VectorCRef& x, const BlockPartition& partition, double radius);
Vector project_linf_ball(const VectorCRef& x, double radius);
Matrix project_trace_ball(const MatrixCRef& a, double radius);

/// prox of theta * ||.|| for the given kind (trace norm acts on the row-major reshape).
Vector prox_norm(const NormKind& kind, const VectorCRef& x, double theta);
/// Euclidean projection onto {u : ||u|| <= radius} for the given kind.
Vector project_norm_ball(const NormKind& kind, const VectorCRef& x, double radius);

/// Row-major reshape helpers for trace-norm signals.
Matrix unflatten(const VectorCRef& x, std::int64_t rows, std::int64_t cols);
Vector flatten(const MatrixCRef& a);

}  // namespace corrsense
