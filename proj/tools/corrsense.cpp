// corrsense: bounds, solves and experiments for corrupted sensing.
//
// Exit codes: 0 success, 2 usage or input error, 3 solver stopped at
// max_iter, 4 file I/O failure.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include "CLI11.hpp"
#include "corrsense/errors.hpp"
#include "corrsense/experiments.hpp"
#include "corrsense/geometry.hpp"
#include "corrsense/instance.hpp"
#include "corrsense/report.hpp"
#include "corrsense/solver.hpp"

using namespace corrsense;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitMaxIter = 3;
constexpr int kExitIo = 4;

std::string fmt(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

// "a,b,c" or "lo:hi:step" (inclusive), or a mix joined by commas.
std::vector<std::int64_t> parse_int_list(const std::string& text, const std::string& flag) {
  std::vector<std::int64_t> out;
  std::stringstream items(text);
  std::string item;
  while (std::getline(items, item, ',')) {
    if (item.empty()) continue;
    try {
      const auto c1 = item.find(':');
      if (c1 == std::string::npos) {
        std::size_t used = 0;
        out.push_back(std::stoll(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
        continue;
      }
      const auto c2 = item.find(':', c1 + 1);
      const auto lo = std::stoll(item.substr(0, c1));
      const auto hi = std::stoll(item.substr(c1 + 1, c2 == std::string::npos ? std::string::npos : c2 - c1 - 1));
      const auto step = c2 == std::string::npos ? 1 : std::stoll(item.substr(c2 + 1));
      if (step < 1) throw std::invalid_argument(item);
      for (auto v = lo; v <= hi; v += step) out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("--" + flag + ": cannot parse '" + item + "' (use a,b,c or lo:hi:step)");
    }
  }
  if (out.empty()) throw ConfigError("--" + flag + " is empty");
  return out;
}

std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::trunc) {
  std::ofstream out(path, std::ios::out | mode);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

void write_lines(const std::string& path, const std::string& header, const std::vector<std::string>& rows) {
  auto out = open_output(path);
  out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

// Reads "key = value" lines into "--key=value" arguments.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::vector<std::string> args;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos)
      throw ConfigError(path + ":" + std::to_string(line_no) + ": bad key '" + key + "'");
    args.push_back("--" + key + "=" + value);
  }
  return args;
}

// Moves "--config FILE" out of argv and splices the file's settings in
// right after the subcommand, so later command-line flags win.
std::vector<std::string> expand_config(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  std::vector<std::string> from_file;
  std::vector<std::string> kept;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      const auto more = config_arguments(args[++i]);
      from_file.insert(from_file.end(), more.begin(), more.end());
    } else if (args[i].rfind("--config=", 0) == 0) {
      const auto more = config_arguments(args[i].substr(9));
      from_file.insert(from_file.end(), more.begin(), more.end());
    } else {
      kept.push_back(args[i]);
    }
  }
  if (!from_file.empty() && kept.size() >= 2) kept.insert(kept.begin() + 2, from_file.begin(), from_file.end());
  return kept;
}

struct StructureFlags {
  std::string structure = "sparse";
  std::int64_t p = 0, s = -1, m = 0, k = 0, r = -1, m1 = 0, m2 = 0;

  void add(CLI::App* app) {
    app->add_option("--structure", structure, "sparse, block, lowrank or binary")
        ->check(CLI::IsMember({"sparse", "block", "lowrank", "binary"}));
    app->add_option("--p", p, "ambient dimension (sparse, binary)");
    app->add_option("--s", s, "nonzeros (sparse) or nonzero blocks (block)");
    app->add_option("--m", m, "block count");
    app->add_option("--k", k, "block size");
    app->add_option("--r", r, "rank");
    app->add_option("--m1", m1, "matrix rows (m1 >= m2)");
    app->add_option("--m2", m2, "matrix columns");
  }

  StructureSpec spec() const {
    StructureSpec out;
    if (structure == "sparse") out = Sparse{p, s};
    else if (structure == "block") out = BlockSparse{m, k, s};
    else if (structure == "lowrank") out = LowRank{m1, m2, r};
    else out = Binary{p};
    validate(out);
    return out;
  }
};

struct SolverFlags {
  SolverConfig config;
  void add(CLI::App* app) {
    app->add_option("--rho", config.rho, "splitting step")->capture_default_str();
    app->add_option("--tol-abs", config.tol_abs, "absolute tolerance")->capture_default_str();
    app->add_option("--tol-rel", config.tol_rel, "relative tolerance")->capture_default_str();
    app->add_option("--max-iter", config.max_iter, "iteration cap")->capture_default_str();
    app->add_flag("--fixed-rho{false}", config.adaptive_rho, "keep rho fixed instead of balancing the residuals");
  }
};

void print_estimate(const char* tag, const ComplexityEstimate& est) {
  std::cout << "eta_sq_" << tag << '=' << fmt(est.value_sq) << '\n';
  if (est.scale_t) std::cout << "t_" << tag << '=' << fmt(*est.scale_t) << '\n';
}

int cmd_bounds(const StructureFlags& flags, std::int64_t mc, std::uint64_t seed) {
  const StructureSpec structure = flags.spec();
  if ((flags.structure == "sparse" || flags.structure == "block") && flags.s == 0)
    throw DomainError("s = 0 is the empty structure: the closed-form bounds are undefined there and its "
                      "complexity is 0 by convention, so no report is printed");
  if (const auto* sp = std::get_if<Sparse>(&structure)) {
    print_estimate("prior", sparse_bound_prior(sp->s, sp->p));
    print_estimate("new", sparse_bound_new(sp->s, sp->p));
    print_estimate("opt", sparse_dist_optimal(sp->s, sp->p));
  } else if (const auto* bs = std::get_if<BlockSparse>(&structure)) {
    print_estimate("prior", block_bound_prior(bs->s, bs->m, bs->k));
    print_estimate("new", block_bound_new(bs->s, bs->m, bs->k));
    print_estimate("opt", block_dist_optimal(bs->s, bs->m, bs->k));
  } else if (const auto* lr = std::get_if<LowRank>(&structure)) {
    const auto b = lowrank_bounds(lr->r, lr->m1, lr->m2);
    print_estimate("prior", b.prior);
    print_estimate("new", b.next);
  } else {
    print_estimate("prior", binary_bound(std::get<Binary>(structure).p));
  }
  if (mc > 0) {
    const auto est = mc_complexity(structure, seed, mc, seed);
    std::cout << "mc_mean=" << fmt(est.value_sq) << "\nmc_se=" << fmt(est.std_error) << '\n';
  }
  return 0;
}

int cmd_mc(const StructureFlags& flags, std::int64_t samples, std::uint64_t seed, std::uint64_t exemplar_seed) {
  const auto est = mc_complexity(flags.spec(), exemplar_seed, samples, seed);
  std::cout << "structure=" << describe(flags.spec()) << "\nsamples=" << est.samples << "\nmc_mean="
            << fmt(est.value_sq) << "\nmc_se=" << fmt(est.std_error) << '\n';
  return 0;
}

NormKind make_norm(const std::string& name, std::int64_t length, std::int64_t block, std::int64_t rows,
                   std::int64_t cols, const char* role) {
  if (name == "l1") return L1Norm{};
  if (name == "linf") return LinfNorm{};
  if (name == "l1l2") {
    if (block < 1 || length % block != 0)
      throw ConfigError(std::string(role) + " block size must divide " + std::to_string(length));
    return GroupNorm{BlockPartition{length / block, block}};
  }
  if (rows * cols != length)
    throw ConfigError(std::string(role) + " trace norm needs rows * cols = " + std::to_string(length));
  return TraceNorm{rows, cols};
}

struct SolveFlags {
  std::string instance_path;
  std::string out_path;
  std::string program = "penalized";
  double lambda = 1.0;
  double bound = 0.0;
  std::string signal_norm = "l1";
  std::string corruption_norm = "l1";
  std::int64_t signal_block = 1, corruption_block = 1;
  std::int64_t signal_rows = 0, signal_cols = 0;
  SolverFlags solver;
};

int cmd_solve(const SolveFlags& f) {
  const ProblemInstance inst = read_instance_file(f.instance_path);
  ProgramSpec spec;
  if (f.program == "penalized") spec.program = Penalized{f.lambda};
  else if (f.program == "signal") spec.program = SignalConstrained{f.bound};
  else spec.program = CorruptionConstrained{f.bound};
  spec.signal_norm = make_norm(f.signal_norm, inst.p(), f.signal_block, f.signal_rows, f.signal_cols, "signal");
  spec.corruption_norm = make_norm(f.corruption_norm, inst.n(), f.corruption_block, 0, 0, "corruption");
  if (std::holds_alternative<TraceNorm>(spec.corruption_norm)) throw ConfigError("trace norm is for signals only");

  const SolverResult result = solve(inst, spec, f.solver.config);
  const FeasibilityReport report = check_feasibility(result, inst, spec);
  if (!f.out_path.empty()) {
    auto out = open_output(f.out_path);
    write_solution(out, inst, result);
    if (!out) throw IoError("failed writing '" + f.out_path + "'");
  }
  std::cout << "objective=" << fmt(result.objective) << "\niterations=" << result.iterations
            << "\nprimal_residual=" << fmt(result.primal_residual) << "\ndual_residual=" << fmt(result.dual_residual)
            << "\nresidual_norm=" << fmt(report.residual_norm) << "\ndata_slack=" << fmt(report.data_slack) << '\n';
  if (report.constraint_slack) std::cout << "constraint_slack=" << fmt(*report.constraint_slack) << '\n';
  std::cout << "status=" << to_string(result.status) << '\n';
  return result.status == SolverStatus::converged ? 0 : kExitMaxIter;
}

struct PhaseFlags {
  std::string experiment = "binary_sparse_constrained";
  std::int64_t p = 0;
  std::string n_list, s_sig_list, s_cor_list;
  std::int64_t block_m = 0, block_k = 0, reps = 10;
  double delta = 0.0, success_tol = 1e-3;
  std::string noise = "sphere", lambda_rule = "opt";
  std::string out_path, theory_path, svg_path;
  bool resume = false;
  SolverFlags solver;
};

PhaseGridSpec phase_spec(const PhaseFlags& f, std::uint64_t seed, int threads) {
  PhaseGridSpec spec;
  spec.experiment = parse_experiment(f.experiment);
  spec.p = f.p;
  if (!f.n_list.empty()) spec.n_values = parse_int_list(f.n_list, "n");
  if (!f.s_sig_list.empty()) spec.s_sig_values = parse_int_list(f.s_sig_list, "s-sig");
  spec.s_cor_values = parse_int_list(f.s_cor_list, "s-cor");
  spec.block_m = f.block_m;
  spec.block_k = f.block_k;
  spec.reps = f.reps;
  spec.delta = f.delta;
  spec.noise = parse_noise_mode(f.noise);
  spec.success_tol = f.success_tol;
  spec.seed = seed;
  spec.lambda_rule = parse_penalty_rule(f.lambda_rule);
  spec.solver = f.solver.config;
  spec.threads = threads;
  validate(spec);
  return spec;
}

int cmd_phase(const PhaseFlags& f, std::uint64_t seed, int threads) {
  const PhaseGridSpec spec = phase_spec(f, seed, threads);
  std::vector<std::string> kept;
  if (f.resume) {
    std::ifstream existing(f.out_path);
    if (existing) kept = resumable_phase_rows(existing, spec);
  }
  // Check the theory grid and every output path before the long run starts.
  const bool wants_curve = !f.theory_path.empty() || !f.svg_path.empty();
  const TheoryCurve curve = wants_curve ? theory_curve(spec) : TheoryCurve{};
  if (!f.svg_path.empty()) open_output(f.svg_path);
  if (!f.theory_path.empty()) open_output(f.theory_path);
  write_lines(f.out_path, phase_csv_header(), kept);
  auto csv = open_output(f.out_path, std::ios::app);

  std::int64_t max_iter = 0;
  std::int64_t sign_successes = 0, trials = 0;
  const auto results = run_phase_grid(
      spec,
      [&](const CellResult& r) {
        csv << phase_csv_row(r) << '\n';
        csv.flush();
        if (!csv) throw IoError("failed writing '" + f.out_path + "'");
        max_iter += r.max_iter_count;
        sign_successes += r.sign_successes;
        trials += r.trials;
      },
      kept.size());

  if (!f.theory_path.empty()) write_lines(f.theory_path, theory_csv_header(), theory_csv_rows(curve));
  if (!f.svg_path.empty()) {
    std::vector<CellResult> all = results;
    if (!kept.empty()) {
      std::ifstream again(f.out_path);
      all = parse_phase_rows(again, spec);
    }
    auto svg = open_output(f.svg_path);
    svg << render_phase_svg(spec, all, curve);
    if (!svg) throw IoError("failed writing '" + f.svg_path + "'");
  }
  std::cout << "cells=" << grid_cells(spec).size() << "\ncells_run=" << results.size()
            << "\nmax_iter_reps=" << max_iter << '\n';
  if (spec.experiment == Experiment::binary_sparse_constrained)
    std::cout << "sign_successes=" << sign_successes << '/' << trials << '\n';
  return 0;
}

struct StableFlags {
  std::string p_list, n_list;
  double gamma_sig = 0.01, gamma_cor = 0.4, delta = 1.0;
  std::int64_t reps = 20;
  std::string noise = "sphere";
  std::string out_path;
  SolverFlags solver;
};

int cmd_stable(const StableFlags& f, std::uint64_t seed, int threads) {
  StableSpec spec;
  spec.p_values = parse_int_list(f.p_list, "p");
  spec.n_values = parse_int_list(f.n_list, "n");
  spec.gamma_sig = f.gamma_sig;
  spec.gamma_cor = f.gamma_cor;
  spec.delta = f.delta;
  spec.reps = f.reps;
  spec.noise = parse_noise_mode(f.noise);
  spec.seed = seed;
  spec.solver = f.solver.config;
  spec.threads = threads;
  validate(spec);
  open_output(f.out_path);
  const auto records = run_stable_error(spec);
  std::vector<std::string> rows;
  std::int64_t max_iter = 0;
  for (const auto& r : records) {
    rows.push_back(stable_csv_row(r));
    max_iter += r.max_iter ? 1 : 0;
  }
  write_lines(f.out_path, stable_csv_header(), rows);
  std::cout << "records=" << records.size() << "\nmax_iter_reps=" << max_iter << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recovery bounds, solvers and phase-transition experiments for corrupted sensing"};
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Print help for every subcommand");

  std::uint64_t seed = 0;
  int threads = 0;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "master seed")->capture_default_str();
    sub->add_option("--threads", threads, "worker threads (0: OpenMP default)")->capture_default_str();
    sub->add_option("--config", "flat 'key = value' file of flag settings; flags given here override it");
  };

  StructureFlags bounds_flags;
  std::int64_t bounds_mc = 0;
  auto* bounds = app.add_subcommand("bounds", "Gaussian complexity bounds for a structure");
  bounds_flags.add(bounds);
  bounds->add_option("--mc", bounds_mc, "also estimate by Monte Carlo with this many samples");
  add_common(bounds);

  StructureFlags mc_flags;
  std::int64_t mc_samples = 2000;
  std::uint64_t exemplar_seed = 0;
  auto* mc = app.add_subcommand("mc-complexity", "Monte-Carlo estimate of the squared Gaussian complexity");
  mc_flags.add(mc);
  mc->add_option("--samples", mc_samples, "Gaussian samples (>= 100)")->capture_default_str();
  mc->add_option("--exemplar-seed", exemplar_seed, "seed of the representative structured point");
  add_common(mc);

  SolveFlags solve_flags;
  auto* solve_cmd = app.add_subcommand("solve", "Solve one instance file");
  solve_cmd->add_option("--instance", solve_flags.instance_path, "instance file")->required();
  solve_cmd->add_option("--out", solve_flags.out_path, "write x_hat and v_hat here");
  solve_cmd->add_option("--program", solve_flags.program, "penalized, signal or corruption")
      ->check(CLI::IsMember({"penalized", "signal", "corruption"}))
      ->capture_default_str();
  solve_cmd->add_option("--lambda", solve_flags.lambda, "penalty weight on the corruption norm")->capture_default_str();
  solve_cmd->add_option("--bound", solve_flags.bound, "norm bound for the constrained programs");
  solve_cmd->add_option("--signal-norm", solve_flags.signal_norm, "l1, l1l2, linf or trace")
      ->check(CLI::IsMember({"l1", "l1l2", "linf", "trace"}))
      ->capture_default_str();
  solve_cmd->add_option("--corruption-norm", solve_flags.corruption_norm, "l1, l1l2 or linf")
      ->check(CLI::IsMember({"l1", "l1l2", "linf"}))
      ->capture_default_str();
  solve_cmd->add_option("--signal-block", solve_flags.signal_block, "block size for an l1l2 signal norm");
  solve_cmd->add_option("--corruption-block", solve_flags.corruption_block, "block size for an l1l2 corruption norm");
  solve_cmd->add_option("--signal-rows", solve_flags.signal_rows, "matrix rows for a trace-norm signal");
  solve_cmd->add_option("--signal-cols", solve_flags.signal_cols, "matrix columns for a trace-norm signal");
  solve_flags.solver.add(solve_cmd);
  add_common(solve_cmd);

  PhaseFlags phase_flags;
  auto* phase = app.add_subcommand("phase", "Phase-transition grid");
  phase->add_option("--experiment", phase_flags.experiment,
                    "binary_sparse_constrained, sparse_sparse_constrained, sparse_block_constrained or "
                    "sparse_sparse_penalized")
      ->capture_default_str();
  phase->add_option("--p", phase_flags.p, "signal dimension")->required();
  phase->add_option("--n", phase_flags.n_list, "measurement counts, a,b,c or lo:hi:step");
  phase->add_option("--s-sig", phase_flags.s_sig_list, "signal sparsities");
  phase->add_option("--s-cor", phase_flags.s_cor_list, "corruption sparsities (blocks for the block experiment)")
      ->required();
  phase->add_option("--block-m", phase_flags.block_m, "corruption block count");
  phase->add_option("--block-k", phase_flags.block_k, "corruption block size");
  phase->add_option("--reps", phase_flags.reps, "trials per cell")->capture_default_str();
  phase->add_option("--delta", phase_flags.delta, "noise level")->capture_default_str();
  phase->add_option("--noise", phase_flags.noise, "none or sphere")->capture_default_str();
  phase->add_option("--success-tol", phase_flags.success_tol, "relative error for success")->capture_default_str();
  phase->add_option("--lambda-rule", phase_flags.lambda_rule, "sparse, dense, opt or const (penalized only)")
      ->capture_default_str();
  phase->add_option("--out", phase_flags.out_path, "CSV of per-cell results")->required();
  phase->add_option("--theory-out", phase_flags.theory_path, "CSV of the theoretical threshold curve");
  phase->add_option("--svg", phase_flags.svg_path, "grayscale heatmap with the threshold curve");
  phase->add_flag("--resume", phase_flags.resume, "keep complete rows of an existing --out file and continue");
  phase_flags.solver.add(phase);
  add_common(phase);

  StableFlags stable_flags;
  auto* stable = app.add_subcommand("stable", "Stable-recovery error under bounded noise");
  stable->add_option("--p", stable_flags.p_list, "signal dimensions")->required();
  stable->add_option("--n", stable_flags.n_list, "measurement counts")->required();
  stable->add_option("--gamma-sig", stable_flags.gamma_sig, "signal sparsity fraction")->capture_default_str();
  stable->add_option("--gamma-cor", stable_flags.gamma_cor, "corruption sparsity fraction")->capture_default_str();
  stable->add_option("--delta", stable_flags.delta, "noise level")->capture_default_str();
  stable->add_option("--reps", stable_flags.reps, "trials per (p, n)")->capture_default_str();
  stable->add_option("--noise", stable_flags.noise, "none or sphere")->capture_default_str();
  stable->add_option("--out", stable_flags.out_path, "CSV of per-trial errors")->required();
  stable_flags.solver.add(stable);
  add_common(stable);

  try {
    auto args = expand_config(argc, argv);
    std::vector<char*> cargs;
    for (auto& a : args) cargs.push_back(a.data());
    try {
      app.parse(static_cast<int>(cargs.size()), cargs.data());
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? 0 : kExitUsage;
    }
    if (threads < 0) throw ConfigError("--threads must be nonnegative");
    if (threads > 0) omp_set_num_threads(threads);

    if (*bounds) return cmd_bounds(bounds_flags, bounds_mc, seed);
    if (*mc) return cmd_mc(mc_flags, mc_samples, seed, exemplar_seed);
    if (*solve_cmd) return cmd_solve(solve_flags);
    if (*phase) return cmd_phase(phase_flags, seed, threads);
    return cmd_stable(stable_flags, seed, threads);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
}
