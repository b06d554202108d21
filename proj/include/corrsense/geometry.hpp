#pragma once

// Gaussian complexity and Gaussian distance of the descent cones of the
// four structure-inducing norms, recovery thresholds built from them, and
// penalty-parameter rules for the penalized program.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>

namespace corrsense {

/// s-sparse vector in R^p under the l1 norm.
struct Sparse {
  std::int64_t p = 0;
  std::int64_t s = 0;
};

/// Vector in R^{m k} supported on s of m contiguous blocks of size k,
/// under the l1/l2 (group) norm.
struct BlockSparse {
  std::int64_t m = 0;
  std::int64_t k = 0;
  std::int64_t s = 0;
};

/// Rank-r m1 x m2 matrix (m1 >= m2) under the trace norm.
struct LowRank {
  std::int64_t m1 = 0;
  std::int64_t m2 = 0;
  std::int64_t r = 0;
};

/// Sign vector in {-1, +1}^p under the l-infinity norm.
struct Binary {
  std::int64_t p = 0;
};

using StructureSpec = std::variant<Sparse, BlockSparse, LowRank, Binary>;

/// Throws DomainError when the dimensions violate the class invariants.
void validate(const StructureSpec& structure);
std::int64_t ambient_dim(const StructureSpec& structure);
std::string describe(const StructureSpec& structure);

enum class EstimateMethod { closed_form_prior, closed_form_new, exact_optimized, monte_carlo };
const char* to_string(EstimateMethod method);

/// A Gaussian squared complexity or squared distance.
struct ComplexityEstimate {
  double value_sq = 0.0;
  std::optional<double> scale_t;  // subdifferential scaling that achieves the value
  EstimateMethod method = EstimateMethod::closed_form_prior;
  double std_error = 0.0;         // monte_carlo only
  std::int64_t samples = 0;       // monte_carlo only
};

/// Closed-form bounds with a log(p/s) term are undefined at s = 0. Passing
/// Empty::allowed returns value_sq = 0 for the empty structure instead of
/// throwing.
enum class Empty { rejected, allowed };

/// Mean of the chi distribution with n degrees of freedom,
/// sqrt(2) Gamma((n+1)/2) / Gamma(n/2).
double chi_mean(std::int64_t n);

ComplexityEstimate sparse_bound_prior(std::int64_t s, std::int64_t p, Empty empty = Empty::rejected);
ComplexityEstimate sparse_bound_new(std::int64_t s, std::int64_t p);

/// E dist^2(g, t * subdiff ||x||_1) for an s-sparse x in R^p.
double sparse_dist_exact(std::int64_t s, std::int64_t p, double t);
/// sparse_dist_exact minimized over t >= 0.
ComplexityEstimate sparse_dist_optimal(std::int64_t s, std::int64_t p);

ComplexityEstimate block_bound_prior(std::int64_t s, std::int64_t m, std::int64_t k,
                                     Empty empty = Empty::rejected);
ComplexityEstimate block_bound_new(std::int64_t s, std::int64_t m, std::int64_t k);

/// E dist^2(g, t * subdiff ||x||_{l1/l2}) = s (t^2 + k) + (m - s) E[(xi - t)_+^2],
/// xi ~ chi_k, with the expectation computed by adaptive Gauss-Kronrod quadrature.
double block_dist_exact(std::int64_t s, std::int64_t m, std::int64_t k, double t);
ComplexityEstimate block_dist_optimal(std::int64_t s, std::int64_t m, std::int64_t k);

struct LowRankBounds {
  ComplexityEstimate prior;
  ComplexityEstimate next;
};
LowRankBounds lowrank_bounds(std::int64_t r, std::int64_t m1, std::int64_t m2);

/// Tangent-cone bound p/2 for sign vectors.
ComplexityEstimate binary_bound(std::int64_t p);

/// Monte-Carlo estimate of eta^2(T cap B) = E min_t dist^2(g, t * subdiff ||x||)
/// for a representative x of the class. Samples are evaluated in parallel
/// (OpenMP) and reduced in index order, so the result is independent of the
/// thread count.
ComplexityEstimate mc_complexity(const StructureSpec& structure, std::uint64_t exemplar_seed,
                                 std::int64_t samples, std::uint64_t seed);

/// Sample mean and standard error of a scalar Monte-Carlo statistic.
struct McMoments {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// Nuclear norm of an m1 x m2 matrix with iid N(0, 1) entries.
McMoments mc_gaussian_nuclear_norm(std::int64_t m1, std::int64_t m2, std::int64_t samples,
                                   std::uint64_t seed);

namespace reference {
/// Serial evaluation of the same per-sample kernel as corrsense::mc_complexity.
ComplexityEstimate mc_complexity(const StructureSpec& structure, std::uint64_t exemplar_seed,
                                 std::int64_t samples, std::uint64_t seed);
}  // namespace reference

/// Additive slack 2 sup_{w in subdiff} ||w||_2 / (||x|| / ||x||_2) for
/// unit-magnitude sparse or block-sparse representatives.
double prop2_gap(const StructureSpec& structure);

/// tau = sqrt(eta_sig^2 + eta_cor^2) + 1/sqrt(2) + 1/sqrt(2 pi).
double constrained_threshold(double eta_sq_sig, double eta_sq_cor);
/// tau = 2 dist_sig + dist_cor + 3 sqrt(2 pi) + 1/sqrt(2) + 1/sqrt(2 pi), unsquared distances.
double penalized_threshold(double dist_sig, double dist_cor);
/// 1 - exp(-(mu_n - tau - eps sqrt(n))^2 / 2) above threshold, 0 otherwise.
double success_probability(std::int64_t n, double tau, double epsilon);

struct RecoveryThreshold {
  double tau = 0.0;
  std::int64_t n = 0;
  double epsilon = 0.0;
  double mu_n = 0.0;
  double success_prob = 0.0;
};
RecoveryThreshold recovery_threshold(std::int64_t n, double tau, double epsilon);

enum class PenaltyRule { sparse, dense, opt, constant, block, cor4 };
const char* to_string(PenaltyRule rule);
PenaltyRule parse_penalty_rule(const std::string& name);

struct PenaltyInputs {
  std::int64_t p = 0;            // signal dimension
  std::int64_t n = 0;            // measurement (corruption) dimension
  std::int64_t s_sig = 0;        // signal sparsity
  std::int64_t s_cor = 0;        // corruption sparsity; nonzero blocks when block_size > 1
  std::int64_t block_size = 1;   // corruption block size k
  std::optional<double> gamma;   // corruption fraction; derived from s_cor when absent
  double epsilon = 0.0;          // cor4 slack
  std::optional<double> t_sig;   // block rule: signal scaling, optimal scaling when absent
};

struct PenaltyPlan {
  PenaltyRule rule = PenaltyRule::constant;
  double lambda = 1.0;
  double t_sig = 0.0;
  double t_cor = 0.0;
  std::map<std::string, double> extras;
  /// cor4 with s_gamma = 0: lambda is 0 and the signal is taken to be empty.
  bool degenerate = false;
};

PenaltyPlan penalty_plan(PenaltyRule rule, const PenaltyInputs& inputs);

}  // namespace corrsense
