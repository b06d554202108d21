#pragma once

// Operator-splitting solver for the three corrupted-sensing programs
//
//   penalized:              min ||x||_sig + lambda ||v||_cor
//   signal-constrained:     min ||v||_cor  s.t. ||x||_sig <= bound
//   corruption-constrained: min ||x||_sig  s.t. ||v||_cor <= bound
//
// each subject to ||y - (Phi x + v)||_2 <= delta.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "corrsense/prox.hpp"

namespace corrsense {

/// Observation y = Phi x* + v* + z with ||z||_2 <= delta. The ground-truth
/// parts are optional; a blind solve needs only phi, y and delta.
struct ProblemInstance {
  Matrix phi;
  std::optional<Vector> x_star;
  std::optional<Vector> v_star;
  std::optional<Vector> z;
  Vector y;
  double delta = 0.0;

  std::int64_t n() const { return phi.rows(); }
  std::int64_t p() const { return phi.cols(); }

  /// Throws DomainError on inconsistent dimensions, negative delta, or,
  /// when all truth parts are present, a y that does not reproduce them.
  void validate() const;
};

struct Penalized {
  double lambda = 1.0;
};
struct SignalConstrained {
  double bound = 0.0;
};
struct CorruptionConstrained {
  double bound = 0.0;
};
using Program = std::variant<Penalized, SignalConstrained, CorruptionConstrained>;

struct ProgramSpec {
  Program program = Penalized{};
  NormKind signal_norm = L1Norm{};
  NormKind corruption_norm = L1Norm{};
};

/// Which linear system backs the projection onto {Phi x + v + r = y}.
/// direct inverts Phi Phi^T + 2I (n x n); woodbury inverts 2I + Phi^T Phi (p x p).
/// automatic takes woodbury when it is cheaper per iteration, n > (1 + sqrt 2) p.
enum class FactorRoute { automatic, direct, woodbury };

struct SolverConfig {
  double rho = 1.0;  // initial step when adaptive_rho is set
  double tol_abs = 1e-7;
  double tol_rel = 1e-7;
  std::int64_t max_iter = 20000;
  FactorRoute route = FactorRoute::automatic;
  /// Residual balancing: double rho when the primal residual exceeds ten times
  /// the dual one, halve it in the opposite case. The projection does not
  /// depend on rho, so a change costs nothing.
  bool adaptive_rho = true;
};

enum class SolverStatus { converged, max_iter };
const char* to_string(SolverStatus status);

struct SolverResult {
  Vector x_hat;
  Vector v_hat;
  Vector r_hat;  // residual slot of the affine copy, y - Phi x_hat - v_hat
  std::int64_t iterations = 0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double objective = 0.0;
  SolverStatus status = SolverStatus::max_iter;
};

/// Projection onto the affine set {(x, v, r) : Phi x + v + r = y}, factored once.
class AffineProjector {
 public:
  AffineProjector(const Matrix& phi, FactorRoute route);

  /// Replaces (x, v, r) by its Euclidean projection onto the affine set.
  void project(const Vector& y, Vector& x, Vector& v, Vector& r) const;
  bool uses_woodbury() const { return woodbury_; }

 private:
  const Matrix& phi_;
  bool woodbury_ = false;
  // Inverse of the factored system. Its eigenvalues lie in (0, 1/2], and one
  // matrix-vector product beats two triangular solves per iteration.
  Matrix inverse_;
  // scratch
  mutable Vector residual_;
  mutable Vector multiplier_;
  mutable Vector small_;
  mutable Vector small_solved_;
};

/// Called after every iteration with the affine copy (x, v, r).
using IterateObserver = std::function<void(std::int64_t, const Vector&, const Vector&, const Vector&)>;

/// Throws DomainError for lambda <= 0, negative or non-finite bounds, norm
/// shapes that do not fit the instance, or non-positive solver settings.
void validate(const ProgramSpec& spec, const ProblemInstance& instance);
void validate(const SolverConfig& config);

SolverResult solve(const ProblemInstance& instance, const ProgramSpec& spec, const SolverConfig& config = {},
                   const IterateObserver& observer = {});

struct FeasibilityReport {
  double residual_norm = 0.0;  // ||y - Phi x_hat - v_hat||_2
  double data_slack = 0.0;     // residual_norm - delta
  std::optional<double> constraint_slack;  // norm - bound for constrained programs
  double objective = 0.0;      // program objective evaluated at (x_hat, v_hat)
};

FeasibilityReport check_feasibility(const SolverResult& result, const ProblemInstance& instance);
FeasibilityReport check_feasibility(const SolverResult& result, const ProblemInstance& instance,
                                    const ProgramSpec& spec);

/// Objective of the program at (x, v), ignoring feasibility.
double program_objective(const ProgramSpec& spec, const VectorCRef& x, const VectorCRef& v);

}  // namespace corrsense
