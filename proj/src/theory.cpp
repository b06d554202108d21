#include <algorithm>
#include <cmath>

#include <omp.h>

#include "corrsense/errors.hpp"
#include "corrsense/experiments.hpp"

namespace corrsense {
namespace {

// Largest s in [lo, hi] with fits(s), for fits monotone nonincreasing in s;
// empty when fits(lo) fails or fits(hi) holds (no crossing inside the range).
template <class Fits>
std::optional<std::int64_t> last_fitting(std::int64_t lo, std::int64_t hi, Fits fits) {
  if (!fits(lo) || fits(hi)) return std::nullopt;
  while (hi - lo > 1) {
    const auto mid = lo + (hi - lo) / 2;
    if (fits(mid)) lo = mid;
    else hi = mid;
  }
  return lo;
}

std::int64_t stable_sparsity(std::int64_t dim, double gamma) {
  return std::lround(static_cast<double>(dim) * gamma);
}

Seed stable_seed(std::uint64_t master, std::int64_t p, std::int64_t n, std::int64_t rep) {
  return Seed(master)
      .child("stable")
      .child("p", static_cast<std::uint64_t>(p))
      .child("n", static_cast<std::uint64_t>(n))
      .child("rep", static_cast<std::uint64_t>(rep));
}

struct StableUnit {
  std::int64_t p;
  std::int64_t n;
  std::int64_t rep;
};

StableErrorRecord run_stable_unit(const StableSpec& spec, const StableUnit& unit) {
  const Seed seed = stable_seed(spec.seed, unit.p, unit.n, unit.rep);
  const auto s_sig = stable_sparsity(unit.p, spec.gamma_sig);
  const auto s_cor = stable_sparsity(unit.n, spec.gamma_cor);
  Vector x = gen_signal(Sparse{unit.p, s_sig}, seed.child("signal"));
  Matrix phi = gen_gaussian_matrix(unit.n, unit.p, seed.child("phi"));
  Vector v = gen_corruption(Sparse{unit.n, s_cor}, unit.n, seed.child("corruption"));
  Vector z = gen_noise(unit.n, spec.delta, spec.noise, seed.child("noise"));
  const ProblemInstance inst = assemble(std::move(phi), std::move(x), std::move(v), std::move(z), spec.delta);
  const ProgramSpec program{SignalConstrained{inst.x_star->lpNorm<1>()}, L1Norm{}, L1Norm{}};
  const SolverResult result = solve(inst, program, spec.solver);

  StableErrorRecord rec;
  rec.p = unit.p;
  rec.n = unit.n;
  rec.rep = unit.rep;
  rec.error = std::sqrt((result.x_hat - *inst.x_star).squaredNorm() + (result.v_hat - *inst.v_star).squaredNorm());
  const double factor = stable_rescale_factor(unit.p, unit.n, spec.gamma_sig, spec.gamma_cor);
  if (factor > 0.0) rec.rescaled_error = rec.error * factor;
  rec.max_iter = result.status == SolverStatus::max_iter;
  return rec;
}

std::vector<StableErrorRecord> run_stable(const StableSpec& spec, bool parallel) {
  validate(spec);
  std::vector<StableUnit> units;
  for (auto p : spec.p_values)
    for (auto n : spec.n_values)
      for (std::int64_t r = 0; r < spec.reps; ++r) units.push_back({p, n, r});
  std::vector<StableErrorRecord> records(units.size());
  const auto count = static_cast<std::int64_t>(units.size());
  if (parallel) {
    const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::int64_t u = 0; u < count; ++u)
      records[static_cast<std::size_t>(u)] = run_stable_unit(spec, units[static_cast<std::size_t>(u)]);
  } else {
    for (std::int64_t u = 0; u < count; ++u)
      records[static_cast<std::size_t>(u)] = run_stable_unit(spec, units[static_cast<std::size_t>(u)]);
  }
  return records;
}

}  // namespace

double theory_eta_sq_signal(const PhaseGridSpec& spec, std::optional<std::int64_t> s_sig) {
  if (spec.experiment == Experiment::binary_sparse_constrained) return binary_bound(spec.p).value_sq;
  if (!s_sig) throw ConfigError("signal sparsity required for this experiment");
  return sparse_dist_optimal(*s_sig, spec.p).value_sq;
}

double theory_eta_sq_corruption(const PhaseGridSpec& spec, std::int64_t n, std::int64_t s_cor) {
  if (spec.experiment == Experiment::sparse_block_constrained)
    return block_dist_optimal(s_cor, spec.block_m, spec.block_k).value_sq;
  return sparse_dist_optimal(s_cor, n).value_sq;
}

TheoryCurve theory_curve(const PhaseGridSpec& spec) {
  validate(spec);
  TheoryCurve curve;
  curve.experiment = spec.experiment;
  curve.ordinate_name = "s_cor";
  const auto [cor_lo, cor_hi] = std::minmax_element(spec.s_cor_values.begin(), spec.s_cor_values.end());

  const auto crossing = [&](std::int64_t n, std::optional<std::int64_t> s_sig) -> std::optional<double> {
    const double mu = chi_mean(n);
    const double budget = mu * mu - theory_eta_sq_signal(spec, s_sig);
    if (budget <= 0.0) return std::nullopt;
    const auto s = last_fitting(*cor_lo, *cor_hi,
                                [&](std::int64_t c) { return theory_eta_sq_corruption(spec, n, c) <= budget; });
    if (!s) return std::nullopt;
    return static_cast<double>(*s);
  };

  if (spec.experiment == Experiment::binary_sparse_constrained) {
    curve.abscissa_name = "n";
    std::vector<std::int64_t> ns = spec.n_values;
    std::sort(ns.begin(), ns.end());
    for (auto n : ns) curve.points.push_back({static_cast<double>(n), crossing(n, std::nullopt)});
    return curve;
  }
  if (spec.n_values.size() > 1) throw ConfigError("theory curve over s_sig needs a single n");
  const auto n = grid_cells(spec).front().n;
  curve.abscissa_name = "s_sig";
  std::vector<std::int64_t> sig = spec.s_sig_values;
  std::sort(sig.begin(), sig.end());
  for (auto s : sig) curve.points.push_back({static_cast<double>(s), crossing(n, s)});
  return curve;
}

void validate(const StableSpec& spec) {
  if (spec.p_values.empty() || spec.n_values.empty()) throw ConfigError("stable experiment grids are empty");
  if (!(spec.gamma_sig > 0.0 && spec.gamma_sig < 1.0) || !(spec.gamma_cor > 0.0 && spec.gamma_cor < 1.0))
    throw ConfigError("sparsity fractions must lie in (0, 1)");
  if (!(spec.delta >= 0.0) || !std::isfinite(spec.delta)) throw ConfigError("delta must be finite and nonnegative");
  if (spec.reps < 1) throw ConfigError("reps must be at least 1");
  for (auto p : spec.p_values)
    if (p < 1 || stable_sparsity(p, spec.gamma_sig) < 1)
      throw ConfigError("p = " + std::to_string(p) + " gives an empty signal at gamma_sig");
  for (auto n : spec.n_values)
    if (n < 1 || stable_sparsity(n, spec.gamma_cor) < 1)
      throw ConfigError("n = " + std::to_string(n) + " gives an empty corruption at gamma_cor");
  validate(spec.solver);
}

double stable_rescale_factor(std::int64_t p, std::int64_t n, double gamma_sig, double gamma_cor) {
  const double eta_sig = sparse_dist_optimal(stable_sparsity(p, gamma_sig), p).value_sq;
  const double eta_cor = sparse_dist_optimal(stable_sparsity(n, gamma_cor), n).value_sq;
  return (chi_mean(n) - std::sqrt(eta_sig + eta_cor)) / std::sqrt(static_cast<double>(n));
}

std::vector<StableErrorRecord> run_stable_error(const StableSpec& spec) { return run_stable(spec, true); }

namespace reference {
std::vector<StableErrorRecord> run_stable_error(const StableSpec& spec) { return run_stable(spec, false); }
}  // namespace reference

}  // namespace corrsense
