#include "corrsense/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

constexpr std::int64_t kRhoPeriod = 50;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_norm_fits(const NormKind& kind, std::int64_t length, const char* role) {
  const auto dim = required_dim(kind);
  if (dim >= 0 && dim != length)
    throw DomainError(std::string(role) + " norm " + norm_name(kind) + " expects length " + std::to_string(dim) +
                      ", instance has " + std::to_string(length));
}

void require_bound(double bound) {
  if (!(bound >= 0.0) || !std::isfinite(bound)) throw DomainError("constraint bound must be finite and nonnegative");
}

}  // namespace

const char* to_string(SolverStatus status) {
  return status == SolverStatus::converged ? "converged" : "max_iter";
}

void ProblemInstance::validate() const {
  if (phi.rows() < 1 || phi.cols() < 1) throw DomainError("measurement matrix must be nonempty");
  if (y.size() != phi.rows()) throw DomainError("y length does not match the rows of phi");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and nonnegative");
  if (x_star && x_star->size() != phi.cols()) throw DomainError("x_star length does not match the columns of phi");
  if (v_star && v_star->size() != phi.rows()) throw DomainError("v_star length does not match the rows of phi");
  if (z && z->size() != phi.rows()) throw DomainError("z length does not match the rows of phi");
  if (z && z->norm() > delta * (1.0 + 1e-12)) throw DomainError("noise norm exceeds delta");
  if (x_star && v_star && z) {
    const double mismatch = (y - (phi * *x_star + *v_star + *z)).norm();
    if (mismatch > 1e-12 * (1.0 + y.norm())) throw DomainError("y does not equal phi x_star + v_star + z");
  }
}

void validate(const ProgramSpec& spec, const ProblemInstance& instance) {
  std::visit(overloaded{[](const Penalized& pen) {
                          if (!(pen.lambda > 0.0) || !std::isfinite(pen.lambda))
                            throw DomainError("penalty lambda must be positive and finite");
                        },
                        [](const SignalConstrained& sc) { require_bound(sc.bound); },
                        [](const CorruptionConstrained& cc) { require_bound(cc.bound); }},
             spec.program);
  require_norm_fits(spec.signal_norm, instance.p(), "signal");
  require_norm_fits(spec.corruption_norm, instance.n(), "corruption");
}

void validate(const SolverConfig& config) {
  if (!(config.rho > 0.0) || !(config.tol_abs > 0.0) || !(config.tol_rel > 0.0) || config.max_iter < 1)
    throw DomainError("solver settings rho, tolerances and max_iter must be positive");
}

AffineProjector::AffineProjector(const Matrix& phi, FactorRoute route) : phi_(phi) {
  const auto n = phi.rows();
  const auto p = phi.cols();
  woodbury_ = route == FactorRoute::woodbury ||
              (route == FactorRoute::automatic && static_cast<double>(n) > (1.0 + std::numbers::sqrt2) * static_cast<double>(p));
  const auto dim = woodbury_ ? p : n;
  Matrix gram = Matrix::Identity(dim, dim) * 2.0;
  if (woodbury_) gram.selfadjointView<Eigen::Lower>().rankUpdate(phi.transpose());
  else gram.selfadjointView<Eigen::Lower>().rankUpdate(phi);
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success) throw NumericError("Cholesky factorization of the projection system failed");
  inverse_ = llt.solve(Matrix::Identity(dim, dim));
  residual_.resize(n);
  multiplier_.resize(n);
  small_.resize(p);
  small_solved_.resize(p);
}

void AffineProjector::project(const Vector& y, Vector& x, Vector& v, Vector& r) const {
  // (x, v, r) + (Phi^T l, l, l) with (Phi Phi^T + 2 I) l = y - Phi x - v - r
  residual_.noalias() = y - v - r;
  residual_.noalias() -= phi_ * x;
  if (woodbury_) {
    // (Phi Phi^T + 2I)^{-1} = (I - Phi (2I + Phi^T Phi)^{-1} Phi^T) / 2
    small_.noalias() = phi_.transpose() * residual_;
    small_solved_.noalias() = inverse_ * small_;
    multiplier_ = residual_;
    multiplier_.noalias() -= phi_ * small_solved_;
    multiplier_ *= 0.5;
  } else {
    multiplier_.noalias() = inverse_ * residual_;
  }
  x.noalias() += phi_.transpose() * multiplier_;
  v += multiplier_;
  r += multiplier_;
}

double program_objective(const ProgramSpec& spec, const VectorCRef& x, const VectorCRef& v) {
  return std::visit(
      overloaded{[&](const Penalized& pen) {
                   return norm_eval(spec.signal_norm, x) + pen.lambda * norm_eval(spec.corruption_norm, v);
                 },
                 [&](const SignalConstrained&) { return norm_eval(spec.corruption_norm, v); },
                 [&](const CorruptionConstrained&) { return norm_eval(spec.signal_norm, x); }},
      spec.program);
}

SolverResult solve(const ProblemInstance& instance, const ProgramSpec& spec, const SolverConfig& config,
                   const IterateObserver& observer) {
  instance.validate();
  validate(spec, instance);
  validate(config);

  const auto n = instance.n();
  const auto p = instance.p();
  double rho = config.rho;
  const AffineProjector projector(instance.phi, config.route);

  // Prox copy (x, v, r), affine copy (xa, va, ra), scaled duals (wx, wv, wr).
  Vector x = Vector::Zero(p), v = Vector::Zero(n), r = Vector::Zero(n);
  Vector xa = Vector::Zero(p), va = Vector::Zero(n), ra = Vector::Zero(n);
  Vector wx = Vector::Zero(p), wv = Vector::Zero(n), wr = Vector::Zero(n);
  Vector xa_old(p), va_old(n), ra_old(n);
  const Vector origin = Vector::Zero(n);

  const auto prox_x = [&](const Vector& in) -> Vector {
    if (const auto* sc = std::get_if<SignalConstrained>(&spec.program))
      return project_norm_ball(spec.signal_norm, in, sc->bound);
    return prox_norm(spec.signal_norm, in, 1.0 / rho);
  };
  const auto prox_v = [&](const Vector& in) -> Vector {
    if (const auto* cc = std::get_if<CorruptionConstrained>(&spec.program))
      return project_norm_ball(spec.corruption_norm, in, cc->bound);
    const double weight = std::holds_alternative<Penalized>(spec.program) ? std::get<Penalized>(spec.program).lambda : 1.0;
    return prox_norm(spec.corruption_norm, in, weight / rho);
  };

  const double abs_scale = config.tol_abs * std::sqrt(static_cast<double>(p + 2 * n));
  SolverResult result;
  result.status = SolverStatus::max_iter;
  std::int64_t iter = 0;
  for (iter = 1; iter <= config.max_iter; ++iter) {
    x = prox_x(xa - wx);
    v = prox_v(va - wv);
    r = project_l2_ball(ra - wr, origin, instance.delta);

    xa_old = xa;
    va_old = va;
    ra_old = ra;
    xa = x + wx;
    va = v + wv;
    ra = r + wr;
    projector.project(instance.y, xa, va, ra);

    wx += x - xa;
    wv += v - va;
    wr += r - ra;

    if (observer) observer(iter, xa, va, ra);

    const double primal =
        std::sqrt((x - xa).squaredNorm() + (v - va).squaredNorm() + (r - ra).squaredNorm());
    const double dual =
        rho * std::sqrt((xa - xa_old).squaredNorm() + (va - va_old).squaredNorm() + (ra - ra_old).squaredNorm());
    const double u_norm = std::sqrt(x.squaredNorm() + v.squaredNorm() + r.squaredNorm());
    const double ua_norm = std::sqrt(xa.squaredNorm() + va.squaredNorm() + ra.squaredNorm());
    const double w_norm = rho * std::sqrt(wx.squaredNorm() + wv.squaredNorm() + wr.squaredNorm());
    result.primal_residual = primal;
    result.dual_residual = dual;
    // The returned affine copy misses the data constraint by at most ||r - ra||,
    // which the stacked residual test alone lets grow with sqrt(p + 2n).
    if (primal <= abs_scale + config.tol_rel * std::max(u_norm, ua_norm) &&
        dual <= abs_scale + config.tol_rel * w_norm && (r - ra).norm() <= config.tol_abs * (1.0 + instance.delta)) {
      result.status = SolverStatus::converged;
      break;
    }
    if (config.adaptive_rho && iter % kRhoPeriod == 0 && (primal > 10.0 * dual || dual > 10.0 * primal)) {
      const double factor = primal > dual ? 2.0 : 0.5;
      rho *= factor;
      wx /= factor;
      wv /= factor;
      wr /= factor;
    }
  }
  result.iterations = std::min(iter, config.max_iter);
  result.objective = program_objective(spec, x, v);
  result.x_hat = std::move(xa);
  result.v_hat = std::move(va);
  result.r_hat = std::move(ra);
  return result;
}

FeasibilityReport check_feasibility(const SolverResult& result, const ProblemInstance& instance) {
  FeasibilityReport report;
  report.residual_norm = (instance.y - instance.phi * result.x_hat - result.v_hat).norm();
  report.data_slack = report.residual_norm - instance.delta;
  report.objective = result.objective;
  return report;
}

FeasibilityReport check_feasibility(const SolverResult& result, const ProblemInstance& instance,
                                    const ProgramSpec& spec) {
  FeasibilityReport report = check_feasibility(result, instance);
  report.objective = program_objective(spec, result.x_hat, result.v_hat);
  if (const auto* sc = std::get_if<SignalConstrained>(&spec.program))
    report.constraint_slack = norm_eval(spec.signal_norm, result.x_hat) - sc->bound;
  else if (const auto* cc = std::get_if<CorruptionConstrained>(&spec.program))
    report.constraint_slack = norm_eval(spec.corruption_norm, result.v_hat) - cc->bound;
  return report;
}

}  // namespace corrsense
