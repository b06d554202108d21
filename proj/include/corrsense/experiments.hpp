#pragma once

// Phase-transition and stable-error experiments: seeded instance
// generation, recovery by the matching program, success bookkeeping and
// the theoretical threshold curves drawn over the empirical maps.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "corrsense/geometry.hpp"
#include "corrsense/instance.hpp"
#include "corrsense/solver.hpp"

namespace corrsense {

enum class Experiment {
  binary_sparse_constrained,
  sparse_sparse_constrained,
  sparse_block_constrained,
  sparse_sparse_penalized,
};
const char* to_string(Experiment experiment);
Experiment parse_experiment(const std::string& name);

struct PhaseGridSpec {
  Experiment experiment = Experiment::binary_sparse_constrained;
  std::int64_t p = 0;
  std::vector<std::int64_t> n_values;      // defaults to {m k} for the block experiment
  std::vector<std::int64_t> s_sig_values;  // unused for the binary experiment
  std::vector<std::int64_t> s_cor_values;  // nonzero blocks for the block experiment
  std::int64_t block_m = 0;
  std::int64_t block_k = 0;
  std::int64_t reps = 10;
  double delta = 0.0;
  NoiseMode noise = NoiseMode::sphere;
  double success_tol = 1e-3;
  std::uint64_t seed = 0;
  PenaltyRule lambda_rule = PenaltyRule::opt;  // penalized experiment only
  SolverConfig solver;
  int threads = 0;  // 0: OpenMP default
};

/// Throws ConfigError on empty grids, reps < 1, success_tol <= 0, or
/// coordinates that do not fit the experiment's structures.
void validate(const PhaseGridSpec& spec);

struct GridCell {
  std::int64_t n = 0;
  std::optional<std::int64_t> s_sig;
  std::int64_t s_cor = 0;
};

/// Cells in output order: n outermost, then s_sig, then s_cor.
std::vector<GridCell> grid_cells(const PhaseGridSpec& spec);

struct CellResult {
  Experiment experiment = Experiment::binary_sparse_constrained;
  std::int64_t p = 0;
  GridCell cell;
  std::optional<std::int64_t> block_m;
  std::optional<std::int64_t> block_k;
  std::int64_t trials = 0;
  std::int64_t successes = 0;
  double success_rate = 0.0;
  double mean_rel_error = 0.0;
  std::int64_t sign_successes = 0;   // binary experiment: sign(x_hat) == x_star
  std::int64_t max_iter_count = 0;   // reps whose solve stopped at max_iter
  std::optional<double> lambda;      // penalized experiment
};

/// Outcome of one (cell, rep) work unit.
struct RepOutcome {
  double rel_error = 0.0;
  bool success = false;
  bool sign_success = false;
  bool max_iter = false;
};

/// Generates and solves one rep of one cell. Instances depend only on
/// (seed, structure family, cell coordinates, rep), so the constrained and
/// penalized sparse/sparse experiments see the same instances.
RepOutcome run_phase_rep(const PhaseGridSpec& spec, const GridCell& cell, std::int64_t rep);
ProblemInstance phase_instance(const PhaseGridSpec& spec, const GridCell& cell, std::int64_t rep);
ProgramSpec phase_program(const PhaseGridSpec& spec, const GridCell& cell, const ProblemInstance& instance);

using CellSink = std::function<void(const CellResult&)>;

/// Runs every cell after the first skip_cells (for resumed runs). Work
/// units of one grid row (cells sharing n and s_sig) run in parallel; each
/// finished row is handed to sink in cell order before the next row starts.
std::vector<CellResult> run_phase_grid(const PhaseGridSpec& spec, const CellSink& sink = {},
                                       std::size_t skip_cells = 0);

namespace reference {
/// Serial run_phase_grid.
std::vector<CellResult> run_phase_grid(const PhaseGridSpec& spec);
}  // namespace reference

struct TheoryPoint {
  double abscissa = 0.0;
  std::optional<double> ordinate;  // empty when the threshold does not cross inside the grid
};

struct TheoryCurve {
  Experiment experiment = Experiment::binary_sparse_constrained;
  std::string abscissa_name;
  std::string ordinate_name;
  std::vector<TheoryPoint> points;
};

/// Threshold mu_n^2 = eta_sig^2 + eta_cor^2 without additive constants.
/// Abscissa is n for the binary experiment and s_sig otherwise; the
/// ordinate is the largest s_cor within the grid's s_cor range that meets
/// the threshold. The penalized experiment uses the constrained sparse/sparse curve.
TheoryCurve theory_curve(const PhaseGridSpec& spec);

/// eta^2 of the signal and of the corruption for one cell.
double theory_eta_sq_signal(const PhaseGridSpec& spec, std::optional<std::int64_t> s_sig);
double theory_eta_sq_corruption(const PhaseGridSpec& spec, std::int64_t n, std::int64_t s_cor);

struct StableSpec {
  std::vector<std::int64_t> p_values;
  std::vector<std::int64_t> n_values;
  double gamma_sig = 0.01;
  double gamma_cor = 0.4;
  double delta = 1.0;
  std::int64_t reps = 20;
  NoiseMode noise = NoiseMode::sphere;
  std::uint64_t seed = 0;
  SolverConfig solver;
  int threads = 0;
};

void validate(const StableSpec& spec);

struct StableErrorRecord {
  std::int64_t p = 0;
  std::int64_t n = 0;
  std::int64_t rep = 0;
  double error = 0.0;
  /// error (mu_n - sqrt(eta_sig^2 + eta_cor^2)) / sqrt(n); empty below threshold.
  std::optional<double> rescaled_error;
  bool max_iter = false;
};

/// Records in (p, n, rep) order.
std::vector<StableErrorRecord> run_stable_error(const StableSpec& spec);

namespace reference {
std::vector<StableErrorRecord> run_stable_error(const StableSpec& spec);
}  // namespace reference

/// (mu_n - sqrt(eta_sig^2 + eta_cor^2)) / sqrt(n), possibly negative.
double stable_rescale_factor(std::int64_t p, std::int64_t n, double gamma_sig, double gamma_cor);

}  // namespace corrsense
