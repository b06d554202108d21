#include "corrsense/prox.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

void require_theta(double theta) {
  if (!(theta >= 0.0)) throw DomainError("prox threshold must be nonnegative");
}

void require_radius(double radius) {
  if (!(radius >= 0.0)) throw DomainError("ball radius must be nonnegative");
}

void require_partition(const VectorCRef& x, const BlockPartition& partition) {
  if (partition.m < 1 || partition.k < 1 || x.size() != partition.dim())
    throw DomainError("vector length " + std::to_string(x.size()) + " does not match block partition " +
                      std::to_string(partition.m) + "x" + std::to_string(partition.k));
}

// Threshold theta >= 0 with sum_i (a_i - theta)_+ = radius for nonnegative a
// whose sum exceeds radius (sort-based selection).
double simplex_threshold(std::vector<double> a, double radius) {
  std::sort(a.begin(), a.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    cumulative += a[j];
    const double candidate = (cumulative - radius) / static_cast<double>(j + 1);
    // The largest entry is always active; at radius 0 its test is a tie.
    if (j == 0 || a[j] - candidate > 0.0) theta = candidate;
    else break;
  }
  return std::max(theta, 0.0);
}

Vector block_norms(const VectorCRef& x, const BlockPartition& partition) {
  Vector norms(partition.m);
  for (std::int64_t b = 0; b < partition.m; ++b) norms(b) = x.segment(b * partition.k, partition.k).norm();
  return norms;
}

Vector scale_blocks(const VectorCRef& x, const BlockPartition& partition, const Vector& target_norms,
                    const Vector& norms) {
  Vector out = Vector::Zero(x.size());
  for (std::int64_t b = 0; b < partition.m; ++b) {
    if (norms(b) > 0.0 && target_norms(b) > 0.0)
      out.segment(b * partition.k, partition.k) = x.segment(b * partition.k, partition.k) * (target_norms(b) / norms(b));
  }
  return out;
}

Eigen::BDCSVD<Matrix> full_svd(const MatrixCRef& a) {
  Eigen::BDCSVD<Matrix> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("SVD failed to converge");
  return svd;
}

Matrix trace_reshape(const NormKind& kind, const VectorCRef& x) {
  const auto& tn = std::get<TraceNorm>(kind);
  if (tn.m1 < 1 || tn.m2 < 1 || x.size() != tn.m1 * tn.m2)
    throw DomainError("vector length does not match trace-norm shape");
  return unflatten(x, tn.m1, tn.m2);
}

}  // namespace

std::int64_t required_dim(const NormKind& kind) {
  if (const auto* g = std::get_if<GroupNorm>(&kind)) return g->partition.dim();
  if (const auto* t = std::get_if<TraceNorm>(&kind)) return t->m1 * t->m2;
  return -1;
}

const char* norm_name(const NormKind& kind) {
  switch (kind.index()) {
    case 0: return "l1";
    case 1: return "l1l2";
    case 2: return "linf";
    default: return "trace";
  }
}

Matrix unflatten(const VectorCRef& x, std::int64_t rows, std::int64_t cols) {
  Matrix a(rows, cols);
  for (std::int64_t i = 0; i < rows; ++i)
    for (std::int64_t j = 0; j < cols; ++j) a(i, j) = x(i * cols + j);
  return a;
}

Vector flatten(const MatrixCRef& a) {
  Vector x(a.size());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) x(i * a.cols() + j) = a(i, j);
  return x;
}

double norm_eval(const NormKind& kind, const VectorCRef& x) {
  const auto dim = required_dim(kind);
  if (dim >= 0 && x.size() != dim)
    throw DomainError(std::string(norm_name(kind)) + " norm expects length " + std::to_string(dim) + ", got " +
                      std::to_string(x.size()));
  switch (kind.index()) {
    case 0: return x.lpNorm<1>();
    case 1: return block_norms(x, std::get<GroupNorm>(kind).partition).sum();
    case 2: return x.size() == 0 ? 0.0 : x.lpNorm<Eigen::Infinity>();
    default: return full_svd(trace_reshape(kind, x)).singularValues().sum();
  }
}

Vector prox_l1(const VectorCRef& x, double theta) {
  require_theta(theta);
  return x.unaryExpr([theta](double v) { return std::copysign(std::max(std::abs(v) - theta, 0.0), v); });
}

Vector prox_l1l2(const VectorCRef& x, const BlockPartition& partition, double theta) {
  require_theta(theta);
  require_partition(x, partition);
  const Vector norms = block_norms(x, partition);
  const Vector shrunk = (norms.array() - theta).max(0.0).matrix();
  return scale_blocks(x, partition, shrunk, norms);
}

Matrix prox_trace(const MatrixCRef& a, double theta) {
  require_theta(theta);
  const auto svd = full_svd(a);
  const Vector sv = (svd.singularValues().array() - theta).max(0.0).matrix();
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().transpose();
}

Vector project_l2_ball(const VectorCRef& x, const VectorCRef& center, double radius) {
  require_radius(radius);
  if (x.size() != center.size()) throw DomainError("ball center has the wrong length");
  const Vector offset = x - center;
  const double dist = offset.norm();
  if (dist <= radius) return x;
  return center + offset * (radius / dist);
}

Vector project_l1_ball(const VectorCRef& x, double radius) {
  require_radius(radius);
  if (x.lpNorm<1>() <= radius) return x;
  std::vector<double> magnitudes(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) magnitudes[static_cast<std::size_t>(i)] = std::abs(x(i));
  return prox_l1(x, simplex_threshold(std::move(magnitudes), radius));
}

Vector project_l1l2_ball(const VectorCRef& x, const BlockPartition& partition, double radius) {
  require_radius(radius);
  require_partition(x, partition);
  const Vector norms = block_norms(x, partition);
  if (norms.sum() <= radius) return x;
  const double theta = simplex_threshold(std::vector<double>(norms.data(), norms.data() + norms.size()), radius);
  const Vector shrunk = (norms.array() - theta).max(0.0).matrix();
  return scale_blocks(x, partition, shrunk, norms);
}

Vector project_linf_ball(const VectorCRef& x, double radius) {
  require_radius(radius);
  return x.cwiseMax(-radius).cwiseMin(radius);
}

Matrix project_trace_ball(const MatrixCRef& a, double radius) {
  require_radius(radius);
  const auto svd = full_svd(a);
  const Vector& sv = svd.singularValues();
  if (sv.sum() <= radius) return a;
  const double theta = simplex_threshold(std::vector<double>(sv.data(), sv.data() + sv.size()), radius);
  const Vector shrunk = (sv.array() - theta).max(0.0).matrix();
  return svd.matrixU() * shrunk.asDiagonal() * svd.matrixV().transpose();
}

Vector prox_norm(const NormKind& kind, const VectorCRef& x, double theta) {
  switch (kind.index()) {
    case 0: return prox_l1(x, theta);
    case 1: return prox_l1l2(x, std::get<GroupNorm>(kind).partition, theta);
    case 2: {
      // Moreau: prox_{theta ||.||_inf}(x) = x - theta * P_{l1 ball}(x / theta)
      require_theta(theta);
      if (theta == 0.0) return x;
      return x - theta * project_l1_ball(x / theta, 1.0);
    }
    default: {
      return flatten(prox_trace(trace_reshape(kind, x), theta));
    }
  }
}

Vector project_norm_ball(const NormKind& kind, const VectorCRef& x, double radius) {
  switch (kind.index()) {
    case 0: return project_l1_ball(x, radius);
    case 1: return project_l1l2_ball(x, std::get<GroupNorm>(kind).partition, radius);
    case 2: return project_linf_ball(x, radius);
    default: return flatten(project_trace_ball(trace_reshape(kind, x), radius));
  }
}

}  // namespace corrsense
