#include "corrsense/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "corrsense/errors.hpp"
#include "corrsense/minimize.hpp"

namespace corrsense {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoOverPi = 2.0 / std::numbers::pi;
constexpr double kScaleTol = 1e-8;

void require(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

void check_sparse(std::int64_t s, std::int64_t p) {
  require(p >= 1, "sparse structure needs p >= 1");
  require(s >= 0 && s <= p, "sparse structure needs 0 <= s <= p");
}

void check_block(std::int64_t s, std::int64_t m, std::int64_t k) {
  require(m >= 1 && k >= 1, "block structure needs m >= 1 and k >= 1");
  require(s >= 0 && s <= m, "block structure needs 0 <= s <= m");
}

// E[(xi - t)_+^2] for xi ~ chi_k, by adaptive Gauss-Kronrod quadrature of
// 2^{1-k/2} / Gamma(k/2) * int_t^inf (c - t)^2 c^{k-1} exp(-c^2/2) dc.
double chi_excess_second_moment(std::int64_t k, double t) {
  const double kk = static_cast<double>(k);
  const double log_norm = (1.0 - kk / 2.0) * std::log(2.0) - std::lgamma(kk / 2.0);
  auto integrand = [&](double c) {
    if (c <= 0.0) return k == 1 ? (c - t) * (c - t) * std::exp(log_norm) : 0.0;
    const double log_density = (k == 1 ? 0.0 : (kk - 1.0) * std::log(c)) - 0.5 * c * c + log_norm;
    return (c - t) * (c - t) * std::exp(log_density);
  };
  const double mode = std::sqrt(std::max(kk - 1.0, 0.0));
  const double upper = std::max(t, mode) + 40.0;
  double error = 0.0;
  double value = 0.0;
  if (t < mode) {
    // Split at the mode so both panels see a monotone tail or a single bump.
    value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, t, mode, 20, 1e-13,
                                                                          &error);
    value += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, mode, upper, 20,
                                                                           1e-13, &error);
  } else {
    value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, t, upper, 20, 1e-13,
                                                                          &error);
  }
  if (!std::isfinite(value)) throw NumericError("chi tail quadrature did not converge");
  return value;
}

}  // namespace

void validate(const StructureSpec& structure) {
  std::visit(
      [](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Sparse>) {
          check_sparse(st.s, st.p);
        } else if constexpr (std::is_same_v<T, BlockSparse>) {
          check_block(st.s, st.m, st.k);
        } else if constexpr (std::is_same_v<T, LowRank>) {
          require(st.m1 >= 1 && st.m2 >= 1, "low-rank structure needs m1, m2 >= 1");
          require(st.m1 >= st.m2 && st.m2 >= st.r && st.r >= 0, "low-rank structure needs m1 >= m2 >= r >= 0");
        } else {
          require(st.p >= 1, "binary structure needs p >= 1");
        }
      },
      structure);
}

std::int64_t ambient_dim(const StructureSpec& structure) {
  return std::visit(
      [](const auto& st) -> std::int64_t {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Sparse>) return st.p;
        else if constexpr (std::is_same_v<T, BlockSparse>) return st.m * st.k;
        else if constexpr (std::is_same_v<T, LowRank>) return st.m1 * st.m2;
        else return st.p;
      },
      structure);
}

std::string describe(const StructureSpec& structure) {
  std::ostringstream os;
  std::visit(
      [&](const auto& st) {
        using T = std::decay_t<decltype(st)>;
        if constexpr (std::is_same_v<T, Sparse>) os << "Sparse(p=" << st.p << ", s=" << st.s << ")";
        else if constexpr (std::is_same_v<T, BlockSparse>)
          os << "BlockSparse(m=" << st.m << ", k=" << st.k << ", s=" << st.s << ")";
        else if constexpr (std::is_same_v<T, LowRank>)
          os << "LowRank(m1=" << st.m1 << ", m2=" << st.m2 << ", r=" << st.r << ")";
        else os << "Binary(p=" << st.p << ")";
      },
      structure);
  return os.str();
}

const char* to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::closed_form_prior: return "closed_form_prior";
    case EstimateMethod::closed_form_new: return "closed_form_new";
    case EstimateMethod::exact_optimized: return "exact_optimized";
    case EstimateMethod::monte_carlo: return "monte_carlo";
  }
  return "unknown";
}

double chi_mean(std::int64_t n) {
  require(n >= 1, "chi_mean needs n >= 1");
  // exp(lgamma - lgamma) loses ~1e-12 relative accuracy by n = 1e4. Small n use
  // mu_{n+2} = mu_n (n + 1) / n; large n the series of Gamma(x + 1/2) / Gamma(x).
  if (n <= 2000) {
    double mu = n % 2 ? std::sqrt(2.0 / std::numbers::pi) : std::sqrt(std::numbers::pi / 2.0);
    for (std::int64_t j = n % 2 ? 1 : 2; j < n; j += 2) mu *= static_cast<double>(j + 1) / static_cast<double>(j);
    return mu;
  }
  const double u = 2.0 / static_cast<double>(n);  // 1 / x with x = n / 2
  const double series =
      1.0 + u * (-1.0 / 8 + u * (1.0 / 128 + u * (5.0 / 1024 + u * (-21.0 / 32768 + u * (-399.0 / 262144 +
                                                                                        u * 869.0 / 4194304)))));
  return std::sqrt(static_cast<double>(n)) * series;
}

ComplexityEstimate sparse_bound_prior(std::int64_t s, std::int64_t p, Empty empty) {
  check_sparse(s, p);
  if (s == 0) {
    require(empty == Empty::allowed,
            "sparse_bound_prior is undefined at s = 0 (log(p/s)); pass Empty::allowed for the empty signal");
    return {0.0, std::nullopt, EstimateMethod::closed_form_prior};
  }
  const double ratio = static_cast<double>(p) / static_cast<double>(s);
  const double sd = static_cast<double>(s);
  return {2.0 * sd * std::log(ratio) + 1.5 * sd, std::sqrt(2.0 * std::log(ratio)),
          EstimateMethod::closed_form_prior};
}

ComplexityEstimate sparse_bound_new(std::int64_t s, std::int64_t p) {
  check_sparse(s, p);
  const double dense = 1.0 - static_cast<double>(s) / static_cast<double>(p);
  return {static_cast<double>(p) * (1.0 - kTwoOverPi * dense * dense), std::sqrt(kTwoOverPi) * dense,
          EstimateMethod::closed_form_new};
}

double sparse_dist_exact(std::int64_t s, std::int64_t p, double t) {
  check_sparse(s, p);
  require(t >= 0.0, "sparse_dist_exact needs t >= 0");
  const double t2 = t * t;
  // int_t^inf exp(-c^2/2) dc = sqrt(pi/2) erfc(t / sqrt 2)
  const double tail = std::sqrt(kPi / 2.0) * std::erfc(t / std::sqrt(2.0));
  const double off = (2.0 * static_cast<double>(p - s) / std::sqrt(2.0 * kPi)) *
                     ((1.0 + t2) * tail - t * std::exp(-t2 / 2.0));
  return static_cast<double>(s) * (1.0 + t2) + off;
}

ComplexityEstimate sparse_dist_optimal(std::int64_t s, std::int64_t p) {
  check_sparse(s, p);
  const double ratio = std::max(static_cast<double>(p) / static_cast<double>(std::max<std::int64_t>(s, 1)),
                                std::numbers::e);
  const double t_max = std::max(10.0, 2.0 * std::sqrt(2.0 * std::log(ratio)));
  const auto best = golden_section([&](double t) { return sparse_dist_exact(s, p, t); }, 0.0, t_max, kScaleTol);
  // For s = 0 the distance decreases to 0 as t grows: no finite minimizing scale.
  if (s == 0) return {best.value, std::nullopt, EstimateMethod::exact_optimized};
  return {best.value, best.argmin, EstimateMethod::exact_optimized};
}

ComplexityEstimate block_bound_prior(std::int64_t s, std::int64_t m, std::int64_t k, Empty empty) {
  check_block(s, m, k);
  if (s == 0) {
    require(empty == Empty::allowed,
            "block_bound_prior is undefined at s = 0 (log(m/s)); pass Empty::allowed for the empty signal");
    return {0.0, std::nullopt, EstimateMethod::closed_form_prior};
  }
  const double ratio = static_cast<double>(m) / static_cast<double>(s);
  const double sd = static_cast<double>(s);
  const double kd = static_cast<double>(k);
  return {4.0 * sd * std::log(ratio) + (0.5 + 3.0 * kd) * sd, std::sqrt(2.0 * std::log(ratio)) + std::sqrt(kd),
          EstimateMethod::closed_form_prior};
}

ComplexityEstimate block_bound_new(std::int64_t s, std::int64_t m, std::int64_t k) {
  check_block(s, m, k);
  const double mu = chi_mean(k);
  const double dense = 1.0 - static_cast<double>(s) / static_cast<double>(m);
  const double p = static_cast<double>(m * k);
  return {p * (1.0 - (mu * mu / static_cast<double>(k)) * dense * dense), mu * dense,
          EstimateMethod::closed_form_new};
}

double block_dist_exact(std::int64_t s, std::int64_t m, std::int64_t k, double t) {
  check_block(s, m, k);
  require(t >= 0.0, "block_dist_exact needs t >= 0");
  const double on = static_cast<double>(s) * (t * t + static_cast<double>(k));
  if (s == m) return on;
  return on + static_cast<double>(m - s) * chi_excess_second_moment(k, t);
}

ComplexityEstimate block_dist_optimal(std::int64_t s, std::int64_t m, std::int64_t k) {
  check_block(s, m, k);
  const double ratio = std::max(static_cast<double>(m) / static_cast<double>(std::max<std::int64_t>(s, 1)),
                                std::numbers::e);
  const double t_max = std::max(10.0, 2.0 * (std::sqrt(2.0 * std::log(ratio)) + std::sqrt(static_cast<double>(k))));
  const auto best =
      golden_section([&](double t) { return block_dist_exact(s, m, k, t); }, 0.0, t_max, kScaleTol);
  if (s == 0) return {best.value, std::nullopt, EstimateMethod::exact_optimized};
  return {best.value, best.argmin, EstimateMethod::exact_optimized};
}

LowRankBounds lowrank_bounds(std::int64_t r, std::int64_t m1, std::int64_t m2) {
  validate(LowRank{m1, m2, r});
  const double rd = static_cast<double>(r);
  const double a = static_cast<double>(m1);
  const double b = static_cast<double>(m2);
  const double c = 4.0 / 27.0;
  LowRankBounds out;
  out.prior = {3.0 * rd * (a + b - rd), std::nullopt, EstimateMethod::closed_form_prior};
  const double col = 1.0 - rd / b;
  out.next = {a * b * (1.0 - c * c * (1.0 - rd / a) * col * col), c * (b - rd) * std::sqrt(a - rd) / b,
              EstimateMethod::closed_form_new};
  return out;
}

ComplexityEstimate binary_bound(std::int64_t p) {
  require(p >= 1, "binary_bound needs p >= 1");
  return {static_cast<double>(p) / 2.0, std::nullopt, EstimateMethod::closed_form_prior};
}

double prop2_gap(const StructureSpec& structure) {
  validate(structure);
  if (const auto* sp = std::get_if<Sparse>(&structure)) {
    require(sp->s >= 1, "prop2_gap needs s >= 1");
    return 2.0 * std::sqrt(static_cast<double>(sp->p)) / std::sqrt(static_cast<double>(sp->s));
  }
  if (const auto* bs = std::get_if<BlockSparse>(&structure)) {
    require(bs->s >= 1, "prop2_gap needs s >= 1");
    return 2.0 * std::sqrt(static_cast<double>(bs->m)) / std::sqrt(static_cast<double>(bs->s));
  }
  throw DomainError("prop2_gap is defined for sparse and block-sparse structures only");
}

double constrained_threshold(double eta_sq_sig, double eta_sq_cor) {
  require(eta_sq_sig >= 0.0 && eta_sq_cor >= 0.0, "squared complexities must be nonnegative");
  return std::sqrt(eta_sq_sig + eta_sq_cor) + 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(2.0 * kPi);
}

double penalized_threshold(double dist_sig, double dist_cor) {
  require(dist_sig >= 0.0 && dist_cor >= 0.0, "Gaussian distances must be nonnegative");
  return 2.0 * dist_sig + dist_cor + 3.0 * std::sqrt(2.0 * kPi) + 1.0 / std::sqrt(2.0) +
         1.0 / std::sqrt(2.0 * kPi);
}

double success_probability(std::int64_t n, double tau, double epsilon) {
  require(tau >= 0.0 && epsilon >= 0.0, "success_probability needs tau, epsilon >= 0");
  const double margin = chi_mean(n) - epsilon * std::sqrt(static_cast<double>(n)) - tau;
  if (!(margin > 0.0)) return 0.0;
  return -std::expm1(-margin * margin / 2.0);
}

RecoveryThreshold recovery_threshold(std::int64_t n, double tau, double epsilon) {
  return {tau, n, epsilon, chi_mean(n), success_probability(n, tau, epsilon)};
}

const char* to_string(PenaltyRule rule) {
  switch (rule) {
    case PenaltyRule::sparse: return "sparse";
    case PenaltyRule::dense: return "dense";
    case PenaltyRule::opt: return "opt";
    case PenaltyRule::constant: return "const";
    case PenaltyRule::block: return "block";
    case PenaltyRule::cor4: return "cor4";
  }
  return "unknown";
}

PenaltyRule parse_penalty_rule(const std::string& name) {
  for (auto rule : {PenaltyRule::sparse, PenaltyRule::dense, PenaltyRule::opt, PenaltyRule::constant,
                    PenaltyRule::block, PenaltyRule::cor4}) {
    if (name == to_string(rule)) return rule;
  }
  throw ConfigError("unknown penalty rule '" + name + "' (expected sparse|dense|opt|const|block|cor4)");
}

PenaltyPlan penalty_plan(PenaltyRule rule, const PenaltyInputs& in) {
  require(in.p >= 1 && in.n >= 1, "penalty_plan needs p, n >= 1");
  require(in.block_size >= 1 && in.n % in.block_size == 0, "block size must divide n");
  const std::int64_t m_cor = in.n / in.block_size;
  const double p = static_cast<double>(in.p);
  const double n = static_cast<double>(in.n);

  auto positive_log = [](double ratio, const char* what) {
    const double value = std::log(ratio);
    if (!(value > 0.0) || !std::isfinite(value)) throw DomainError(std::string("log of ratio <= 1 in ") + what);
    return value;
  };

  PenaltyPlan plan;
  plan.rule = rule;
  switch (rule) {
    case PenaltyRule::sparse: {
      check_sparse(in.s_sig, in.p);
      check_sparse(in.s_cor, in.n);
      require(in.s_sig >= 1 && in.s_cor >= 1, "sparse rule needs s_sig, s_cor >= 1");
      plan.t_sig = std::sqrt(2.0 * positive_log(p / static_cast<double>(in.s_sig), "p/s_sig"));
      plan.t_cor = std::sqrt(2.0 * positive_log(n / static_cast<double>(in.s_cor), "n/s_cor"));
      plan.lambda = plan.t_cor / plan.t_sig;
      break;
    }
    case PenaltyRule::dense: {
      check_sparse(in.s_sig, in.p);
      check_sparse(in.s_cor, in.n);
      require(in.s_sig < in.p && in.s_cor < in.n, "dense rule needs s_sig < p and s_cor < n");
      plan.t_sig = std::sqrt(kTwoOverPi) * (1.0 - static_cast<double>(in.s_sig) / p);
      plan.t_cor = std::sqrt(kTwoOverPi) * (1.0 - static_cast<double>(in.s_cor) / n);
      plan.lambda = plan.t_cor / plan.t_sig;
      break;
    }
    case PenaltyRule::opt: {
      const auto sig = sparse_dist_optimal(in.s_sig, in.p);
      const auto cor = in.block_size == 1 ? sparse_dist_optimal(in.s_cor, in.n)
                                          : block_dist_optimal(in.s_cor, m_cor, in.block_size);
      plan.t_sig = sig.scale_t.value_or(0.0);
      plan.t_cor = cor.scale_t.value_or(0.0);
      require(plan.t_sig > 0.0 && plan.t_cor > 0.0, "opt rule needs both optimal scalings positive");
      plan.lambda = plan.t_cor / plan.t_sig;
      plan.extras["eta_sq_sig"] = sig.value_sq;
      plan.extras["eta_sq_cor"] = cor.value_sq;
      break;
    }
    case PenaltyRule::constant: {
      check_sparse(in.s_sig, in.p);
      check_sparse(in.s_cor, in.n);
      const double total = static_cast<double>(in.s_sig + in.s_cor);
      require(total >= 1.0, "const rule scaling needs s_sig + s_cor >= 1");
      const double t = std::sqrt(2.0 * std::log((p + n) / total));
      plan.t_sig = t;
      plan.t_cor = t;
      plan.lambda = 1.0;
      break;
    }
    case PenaltyRule::block: {
      check_block(in.s_cor, m_cor, in.block_size);
      const double gamma = in.gamma.value_or(static_cast<double>(in.s_cor) / static_cast<double>(m_cor));
      require(gamma >= 0.0 && gamma < 1.0, "block rule needs 0 <= gamma < 1");
      const double mu_k = chi_mean(in.block_size);
      plan.t_sig = in.t_sig ? *in.t_sig : sparse_dist_optimal(in.s_sig, in.p).scale_t.value_or(0.0);
      require(plan.t_sig > 0.0, "block rule needs t_sig > 0");
      plan.t_cor = mu_k * (1.0 - gamma);
      plan.lambda = plan.t_cor / plan.t_sig;
      plan.extras["gamma"] = gamma;
      plan.extras["alpha_k"] = 1.0 - std::sqrt(1.0 - mu_k * mu_k / static_cast<double>(in.block_size));
      break;
    }
    case PenaltyRule::cor4: {
      const double gamma = in.gamma.value_or(static_cast<double>(in.s_cor) / n);
      require(gamma >= 0.0 && gamma < 1.0, "cor4 rule needs 0 <= gamma < 1");
      require(in.epsilon >= 0.0, "cor4 rule needs epsilon >= 0");
      const double alpha1 = 1.0 - std::sqrt(1.0 - kTwoOverPi);
      const double slack = std::max(alpha1 * (1.0 - gamma) * (1.0 - gamma) - in.epsilon, 0.0);
      const double a_gamma = slack * slack / 144.0;
      double s_gamma = 0.0;
      if (a_gamma * n > 0.0) {
        const double denom = 2.0 * std::log(p / (a_gamma * n)) + 1.5;
        if (!(denom > 0.0)) throw DomainError("cor4 rule: log of nonpositive ratio p/(A_gamma n)");
        s_gamma = std::floor(a_gamma * n / denom);
      }
      plan.extras["gamma"] = gamma;
      plan.extras["alpha_1"] = alpha1;
      plan.extras["A_gamma"] = a_gamma;
      plan.extras["s_gamma"] = s_gamma;
      plan.t_cor = std::sqrt(kTwoOverPi) * (1.0 - gamma);
      if (s_gamma < 1.0) {
        plan.lambda = 0.0;
        plan.degenerate = true;
        break;
      }
      plan.t_sig = std::sqrt(2.0 * positive_log(p / s_gamma, "p/s_gamma"));
      plan.lambda = (1.0 - gamma) / std::sqrt(kPi * std::log(p / s_gamma));
      break;
    }
  }
  if (!plan.degenerate && !(plan.lambda > 0.0 && std::isfinite(plan.lambda)))
    throw DomainError("penalty rule produced a non-positive lambda");
  return plan;
}

}  // namespace corrsense
