#include "corrsense/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "corrsense/errors.hpp"

#include <omp.h>

namespace corrsense {
namespace {

// Instances are keyed by structure family so that the constrained and
// penalized sparse/sparse runs share them.
const char* family(Experiment experiment) {
  switch (experiment) {
    case Experiment::binary_sparse_constrained: return "binary_sparse";
    case Experiment::sparse_block_constrained: return "sparse_block";
    default: return "sparse_sparse";
  }
}

Seed cell_seed(std::uint64_t master, Experiment experiment, const GridCell& cell, std::int64_t rep) {
  return Seed(master)
      .child(family(experiment))
      .child("n", static_cast<std::uint64_t>(cell.n))
      .child("s_sig", static_cast<std::uint64_t>(cell.s_sig.value_or(0)))
      .child("s_cor", static_cast<std::uint64_t>(cell.s_cor))
      .child("rep", static_cast<std::uint64_t>(rep));
}

bool has_signal_sparsity(Experiment experiment) { return experiment != Experiment::binary_sparse_constrained; }

double penalized_lambda(const PhaseGridSpec& spec, const GridCell& cell) {
  PenaltyInputs in;
  in.p = spec.p;
  in.n = cell.n;
  in.s_sig = *cell.s_sig;
  in.s_cor = cell.s_cor;
  return penalty_plan(spec.lambda_rule, in).lambda;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

std::vector<std::int64_t> effective_n_values(const PhaseGridSpec& spec) {
  if (spec.experiment == Experiment::sparse_block_constrained && spec.n_values.empty())
    return {spec.block_m * spec.block_k};
  return spec.n_values;
}

CellResult aggregate(const PhaseGridSpec& spec, const GridCell& cell, const RepOutcome* outcomes) {
  CellResult out;
  out.experiment = spec.experiment;
  out.p = spec.p;
  out.cell = cell;
  if (spec.experiment == Experiment::sparse_block_constrained) {
    out.block_m = spec.block_m;
    out.block_k = spec.block_k;
  }
  out.trials = spec.reps;
  double err_sum = 0.0;
  for (std::int64_t r = 0; r < spec.reps; ++r) {
    const auto& o = outcomes[r];
    out.successes += o.success ? 1 : 0;
    out.sign_successes += o.sign_success ? 1 : 0;
    out.max_iter_count += o.max_iter ? 1 : 0;
    err_sum += o.rel_error;
  }
  out.success_rate = static_cast<double>(out.successes) / static_cast<double>(out.trials);
  out.mean_rel_error = err_sum / static_cast<double>(out.trials);
  if (spec.experiment == Experiment::sparse_sparse_penalized)
    out.lambda = penalized_lambda(spec, cell);
  return out;
}

// Cells grouped into rows sharing (n, s_sig); returns the row start offsets plus the end.
std::vector<std::size_t> row_bounds(const std::vector<GridCell>& cells) {
  std::vector<std::size_t> bounds{0};
  for (std::size_t i = 1; i < cells.size(); ++i)
    if (cells[i].n != cells[i - 1].n || cells[i].s_sig != cells[i - 1].s_sig) bounds.push_back(i);
  bounds.push_back(cells.size());
  return bounds;
}

std::vector<CellResult> run_grid(const PhaseGridSpec& spec, const CellSink& sink, std::size_t skip_cells,
                                 bool parallel) {
  validate(spec);
  const auto cells = grid_cells(spec);
  const auto bounds = row_bounds(cells);
  const auto reps = spec.reps;
  std::vector<CellResult> results;
  std::vector<RepOutcome> outcomes;
  for (std::size_t row = 0; row + 1 < bounds.size(); ++row) {
    const std::size_t begin = std::max(bounds[row], skip_cells);
    const std::size_t end = bounds[row + 1];
    if (begin >= end) continue;
    const auto units = static_cast<std::int64_t>(end - begin) * reps;
    outcomes.assign(static_cast<std::size_t>(units), RepOutcome{});
    if (parallel) {
      const int threads = spec.threads > 0 ? spec.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
      for (std::int64_t u = 0; u < units; ++u)
        outcomes[static_cast<std::size_t>(u)] = run_phase_rep(spec, cells[begin + static_cast<std::size_t>(u / reps)], u % reps);
    } else {
      for (std::int64_t u = 0; u < units; ++u)
        outcomes[static_cast<std::size_t>(u)] = run_phase_rep(spec, cells[begin + static_cast<std::size_t>(u / reps)], u % reps);
    }
    for (std::size_t c = begin; c < end; ++c) {
      results.push_back(aggregate(spec, cells[c], outcomes.data() + (c - begin) * static_cast<std::size_t>(reps)));
      if (sink) sink(results.back());
    }
  }
  return results;
}

}  // namespace

const char* to_string(Experiment experiment) {
  switch (experiment) {
    case Experiment::binary_sparse_constrained: return "binary_sparse_constrained";
    case Experiment::sparse_sparse_constrained: return "sparse_sparse_constrained";
    case Experiment::sparse_block_constrained: return "sparse_block_constrained";
    default: return "sparse_sparse_penalized";
  }
}

Experiment parse_experiment(const std::string& name) {
  for (auto e : {Experiment::binary_sparse_constrained, Experiment::sparse_sparse_constrained,
                 Experiment::sparse_block_constrained, Experiment::sparse_sparse_penalized})
    if (name == to_string(e)) return e;
  throw ConfigError("unknown experiment '" + name + "'");
}

void validate(const PhaseGridSpec& spec) {
  require(spec.p >= 1, "p must be positive");
  require(spec.reps >= 1, "reps must be at least 1");
  require(spec.success_tol > 0.0, "success_tol must be positive");
  require(spec.delta >= 0.0 && std::isfinite(spec.delta), "delta must be finite and nonnegative");
  require(!spec.s_cor_values.empty(), "s_cor grid is empty");
  const auto n_values = effective_n_values(spec);
  require(!n_values.empty(), "n grid is empty");
  if (spec.experiment == Experiment::sparse_block_constrained) {
    require(spec.block_m >= 1 && spec.block_k >= 1, "block experiment needs block_m and block_k");
    for (auto n : n_values) require(n == spec.block_m * spec.block_k, "block experiment needs n = block_m * block_k");
  }
  if (has_signal_sparsity(spec.experiment)) {
    require(!spec.s_sig_values.empty(), "s_sig grid is empty");
    for (auto s : spec.s_sig_values) require(s >= 1 && s <= spec.p, "s_sig must lie in [1, p]");
  }
  const auto cor_limit = [&](std::int64_t n) {
    return spec.experiment == Experiment::sparse_block_constrained ? spec.block_m : n;
  };
  for (auto n : n_values) {
    require(n >= 1, "n must be positive");
    for (auto s : spec.s_cor_values)
      require(s >= 0 && s <= cor_limit(n), "s_cor " + std::to_string(s) + " does not fit n = " + std::to_string(n));
  }
  validate(spec.solver);
  if (spec.experiment == Experiment::sparse_sparse_penalized) {
    for (const auto& cell : grid_cells(spec)) {
      try {
        penalized_lambda(spec, cell);
      } catch (const DomainError& e) {
        throw ConfigError("penalty rule " + std::string(to_string(spec.lambda_rule)) + " fails at n = " +
                          std::to_string(cell.n) + ", s_sig = " + std::to_string(*cell.s_sig) +
                          ", s_cor = " + std::to_string(cell.s_cor) + ": " + e.what());
      }
    }
  }
}

std::vector<GridCell> grid_cells(const PhaseGridSpec& spec) {
  std::vector<GridCell> cells;
  std::vector<std::optional<std::int64_t>> sig;
  if (has_signal_sparsity(spec.experiment))
    for (auto s : spec.s_sig_values) sig.emplace_back(s);
  else
    sig.emplace_back(std::nullopt);
  for (auto n : effective_n_values(spec))
    for (const auto& s : sig)
      for (auto c : spec.s_cor_values) cells.push_back({n, s, c});
  return cells;
}

ProblemInstance phase_instance(const PhaseGridSpec& spec, const GridCell& cell, std::int64_t rep) {
  const Seed seed = cell_seed(spec.seed, spec.experiment, cell, rep);
  Matrix phi = gen_gaussian_matrix(cell.n, spec.p, seed.child("phi"));
  Vector x = spec.experiment == Experiment::binary_sparse_constrained
                 ? gen_signal(Binary{spec.p}, seed.child("signal"))
                 : gen_signal(Sparse{spec.p, *cell.s_sig}, seed.child("signal"));
  Vector v = spec.experiment == Experiment::sparse_block_constrained
                 ? gen_corruption(BlockSparse{spec.block_m, spec.block_k, cell.s_cor}, cell.n, seed.child("corruption"))
                 : gen_corruption(Sparse{cell.n, cell.s_cor}, cell.n, seed.child("corruption"));
  Vector z = gen_noise(cell.n, spec.delta, spec.noise, seed.child("noise"));
  return assemble(std::move(phi), std::move(x), std::move(v), std::move(z), spec.delta);
}

ProgramSpec phase_program(const PhaseGridSpec& spec, const GridCell& cell, const ProblemInstance& instance) {
  switch (spec.experiment) {
    case Experiment::binary_sparse_constrained:
      return {SignalConstrained{1.0}, LinfNorm{}, L1Norm{}};
    case Experiment::sparse_sparse_constrained:
      return {SignalConstrained{instance.x_star->lpNorm<1>()}, L1Norm{}, L1Norm{}};
    case Experiment::sparse_block_constrained:
      return {SignalConstrained{instance.x_star->lpNorm<1>()}, L1Norm{},
              GroupNorm{BlockPartition{spec.block_m, spec.block_k}}};
    default:
      return {Penalized{penalized_lambda(spec, cell)}, L1Norm{}, L1Norm{}};
  }
}

RepOutcome run_phase_rep(const PhaseGridSpec& spec, const GridCell& cell, std::int64_t rep) {
  const ProblemInstance instance = phase_instance(spec, cell, rep);
  const ProgramSpec program = phase_program(spec, cell, instance);
  const SolverResult result = solve(instance, program, spec.solver);
  const Vector& x_star = *instance.x_star;
  RepOutcome out;
  out.rel_error = (result.x_hat - x_star).norm() / x_star.norm();
  out.success = out.rel_error < spec.success_tol;
  out.max_iter = result.status == SolverStatus::max_iter;
  if (spec.experiment == Experiment::binary_sparse_constrained) {
    out.sign_success = true;
    for (Eigen::Index i = 0; i < x_star.size(); ++i) {
      const double s = result.x_hat(i) > 0.0 ? 1.0 : (result.x_hat(i) < 0.0 ? -1.0 : 0.0);
      if (s != x_star(i)) {
        out.sign_success = false;
        break;
      }
    }
  }
  return out;
}

std::vector<CellResult> run_phase_grid(const PhaseGridSpec& spec, const CellSink& sink, std::size_t skip_cells) {
  return run_grid(spec, sink, skip_cells, true);
}

namespace reference {
std::vector<CellResult> run_phase_grid(const PhaseGridSpec& spec) { return run_grid(spec, {}, 0, false); }
}  // namespace reference

}  // namespace corrsense
