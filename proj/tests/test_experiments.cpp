#include <cmath>

#include "corrsense/errors.hpp"
#include "corrsense/experiments.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrsense;
using doctest::Approx;

namespace {

PhaseGridSpec small_binary() {
  PhaseGridSpec spec;
  spec.experiment = Experiment::binary_sparse_constrained;
  spec.p = 40;
  spec.n_values = {50, 70};
  spec.s_cor_values = {2, 10, 25};
  spec.reps = 3;
  spec.seed = 5;
  return spec;
}

bool same(const CellResult& a, const CellResult& b) {
  return a.cell.n == b.cell.n && a.cell.s_sig == b.cell.s_sig && a.cell.s_cor == b.cell.s_cor &&
         a.successes == b.successes && a.success_rate == b.success_rate && a.mean_rel_error == b.mean_rel_error &&
         a.sign_successes == b.sign_successes && a.max_iter_count == b.max_iter_count && a.lambda == b.lambda;
}

}  // namespace

TEST_SUITE("experiments") {
  TEST_CASE("grid order") {
    PhaseGridSpec spec;
    spec.experiment = Experiment::sparse_sparse_constrained;
    spec.p = 30;
    spec.n_values = {20, 40};
    spec.s_sig_values = {1, 2};
    spec.s_cor_values = {0, 3, 5};
    const auto cells = grid_cells(spec);
    REQUIRE(cells.size() == 12);
    CHECK(cells[0].n == 20);
    CHECK(*cells[0].s_sig == 1);
    CHECK(cells[2].s_cor == 5);
    CHECK(*cells[3].s_sig == 2);
    CHECK(cells[6].n == 40);
    CHECK_FALSE(grid_cells(small_binary())[0].s_sig);

    PhaseGridSpec block;
    block.experiment = Experiment::sparse_block_constrained;
    block.p = 50;
    block.block_m = 10;
    block.block_k = 4;
    block.s_sig_values = {3};
    block.s_cor_values = {1, 2};
    CHECK(grid_cells(block).front().n == 40);
  }

  TEST_CASE("grid validation") {
    auto spec = small_binary();
    CHECK_NOTHROW(validate(spec));
    spec.reps = 0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec = small_binary();
    spec.s_cor_values = {};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec = small_binary();
    spec.s_cor_values = {51};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec = small_binary();
    spec.success_tol = 0.0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec = small_binary();
    spec.experiment = Experiment::sparse_sparse_constrained;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.s_sig_values = {41};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.s_sig_values = {4};
    CHECK_NOTHROW(validate(spec));
    spec.experiment = Experiment::sparse_sparse_penalized;
    spec.s_cor_values = {0, 4};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.experiment = Experiment::sparse_block_constrained;
    spec.block_m = 10;
    spec.block_k = 5;
    spec.n_values = {60};
    spec.s_cor_values = {2};
    CHECK_THROWS_AS(validate(spec), ConfigError);
    CHECK(parse_experiment("sparse_block_constrained") == Experiment::sparse_block_constrained);
    CHECK_THROWS_AS(parse_experiment("binary"), ConfigError);
  }

  TEST_CASE("instances depend on the cell, rep and structure family only") {
    PhaseGridSpec con;
    con.experiment = Experiment::sparse_sparse_constrained;
    con.p = 30;
    con.n_values = {30};
    con.s_sig_values = {3};
    con.s_cor_values = {4};
    con.seed = 17;
    PhaseGridSpec pen = con;
    pen.experiment = Experiment::sparse_sparse_penalized;
    const GridCell cell{30, 3, 4};
    const auto a = phase_instance(con, cell, 2);
    const auto b = phase_instance(pen, cell, 2);
    CHECK(a.phi == b.phi);
    CHECK(a.y == b.y);
    CHECK(phase_instance(con, cell, 3).y != a.y);
    CHECK(phase_instance(con, {30, 3, 5}, 2).y != a.y);
    con.seed = 18;
    CHECK(phase_instance(con, cell, 2).y != a.y);

    const auto prog = phase_program(pen, cell, b);
    REQUIRE(std::holds_alternative<Penalized>(prog.program));
    CHECK(std::get<Penalized>(prog.program).lambda ==
          Approx(penalty_plan(PenaltyRule::opt, {.p = 30, .n = 30, .s_sig = 3, .s_cor = 4}).lambda));
    const auto cprog = phase_program(con, cell, a);
    CHECK(std::get<SignalConstrained>(cprog.program).bound == Approx(a.x_star->lpNorm<1>()));

    const auto bin = phase_instance(small_binary(), {50, std::nullopt, 2}, 0);
    CHECK(bin.x_star->cwiseAbs().minCoeff() == 1.0);
    CHECK((bin.v_star->array() != 0.0).count() == 2);
  }

  TEST_CASE("parallel grid equals the serial reference under any thread count") {
    auto spec = small_binary();
    const auto serial = reference::run_phase_grid(spec);
    for (int threads : {1, 2, 5}) {
      spec.threads = threads;
      const auto par = run_phase_grid(spec);
      REQUIRE(par.size() == serial.size());
      for (std::size_t i = 0; i < par.size(); ++i) CHECK(same(par[i], serial[i]));
    }
  }

  TEST_CASE("sink order and resumption") {
    const auto spec = small_binary();
    std::vector<CellResult> seen;
    const auto all = run_phase_grid(spec, [&](const CellResult& r) { seen.push_back(r); });
    REQUIRE(seen.size() == all.size());
    for (std::size_t i = 0; i < all.size(); ++i) CHECK(same(seen[i], all[i]));
    const auto tail = run_phase_grid(spec, {}, 4);
    REQUIRE(tail.size() == all.size() - 4);
    for (std::size_t i = 0; i < tail.size(); ++i) CHECK(same(tail[i], all[i + 4]));
  }

  TEST_CASE("cells far from the threshold") {
    PhaseGridSpec spec;
    spec.experiment = Experiment::binary_sparse_constrained;
    spec.p = 200;
    spec.reps = 10;
    spec.seed = 1;
    spec.n_values = {400};
    spec.s_cor_values = {10};
    const double mu = chi_mean(400);
    CHECK(mu * mu > 1.5 * (100.0 + sparse_dist_optimal(10, 400).value_sq));
    const auto above = run_phase_grid(spec);
    CHECK(above[0].success_rate == 1.0);
    CHECK(above[0].sign_successes == 10);

    spec.n_values = {150};
    spec.s_cor_values = {140};
    const double mu_low = chi_mean(150);
    CHECK(mu_low * mu_low < 0.8 * (100.0 + sparse_dist_optimal(140, 150).value_sq));
    const auto below = run_phase_grid(spec);
    CHECK(below[0].success_rate == 0.0);
    CHECK(below[0].trials == 10);
  }

  TEST_CASE("theory curve: binary crossing") {
    PhaseGridSpec spec;
    spec.experiment = Experiment::binary_sparse_constrained;
    spec.p = 1000;
    spec.n_values = {1000};
    spec.s_cor_values = {1, 999};
    const auto curve = theory_curve(spec);
    REQUIRE(curve.points.size() == 1);
    REQUIRE(curve.points[0].ordinate);
    const auto s = static_cast<std::int64_t>(*curve.points[0].ordinate);
    const double mu = chi_mean(1000);
    CHECK(sparse_dist_optimal(s, 1000).value_sq <= mu * mu - 500.0);
    CHECK(sparse_dist_optimal(s + 1, 1000).value_sq > mu * mu - 500.0);
    CHECK(curve.abscissa_name == "n");
    CHECK(curve.ordinate_name == "s_cor");
  }

  TEST_CASE("theory curve: sparse/sparse diagonal and degenerate grids") {
    PhaseGridSpec spec;
    spec.experiment = Experiment::sparse_sparse_constrained;
    spec.p = 128;
    spec.n_values = {128};
    spec.s_sig_values = {4, 8, 16, 24, 32};
    spec.s_cor_values = {1, 127};
    const auto curve = theory_curve(spec);
    const double mu_sq = chi_mean(128) * chi_mean(128);
    // The diagonal crossing: largest s with 2 eta^2(s) <= mu_n^2.
    std::int64_t diag = 1;
    while (2.0 * sparse_dist_optimal(diag + 1, 128).value_sq <= mu_sq) ++diag;
    for (const auto& pt : curve.points) {
      const auto s_sig = static_cast<std::int64_t>(pt.abscissa);
      REQUIRE(pt.ordinate);
      const auto s_cor = static_cast<std::int64_t>(*pt.ordinate);
      CHECK((s_cor >= s_sig) == (s_sig <= diag));
    }

    spec.p = 1000;
    spec.n_values = {50};
    spec.s_sig_values = {400};
    spec.s_cor_values = {1, 10};
    const auto empty = theory_curve(spec);
    REQUIRE(empty.points.size() == 1);
    CHECK_FALSE(empty.points[0].ordinate);

    spec.n_values = {50, 60};
    CHECK_THROWS_AS(theory_curve(spec), ConfigError);
  }

  TEST_CASE("stable experiment bookkeeping") {
    StableSpec spec;
    spec.p_values = {50};
    spec.n_values = {150, 200};
    spec.reps = 3;
    spec.delta = 0.0;
    spec.seed = 4;
    const auto recs = run_stable_error(spec);
    REQUIRE(recs.size() == 6);
    CHECK(recs[0].n == 150);
    CHECK(recs[2].rep == 2);
    CHECK(recs[3].n == 200);
    for (const auto& r : recs) {
      CHECK(r.error < 1e-3);
      REQUIRE(r.rescaled_error);
      CHECK(*r.rescaled_error == Approx(r.error * stable_rescale_factor(50, r.n, 0.01, 0.4)));
    }
    const auto ser = reference::run_stable_error(spec);
    for (std::size_t i = 0; i < recs.size(); ++i) CHECK(recs[i].error == ser[i].error);

    const double eta_sig = sparse_dist_optimal(1, 50).value_sq;
    const double eta_cor = sparse_dist_optimal(60, 150).value_sq;
    CHECK(stable_rescale_factor(50, 150, 0.01, 0.4) ==
          Approx((oracle::chi_mean_boost(150) - std::sqrt(eta_sig + eta_cor)) / std::sqrt(150.0)).epsilon(1e-12));

    spec.n_values = {20};
    spec.delta = 1.0;
    CHECK(stable_rescale_factor(50, 20, 0.01, 0.4) < 0.0);
    for (const auto& r : run_stable_error(spec)) CHECK_FALSE(r.rescaled_error);

    spec.gamma_cor = 1.0;
    CHECK_THROWS_AS(validate(spec), ConfigError);
    spec.gamma_cor = 0.4;
    spec.p_values = {10};
    CHECK_THROWS_AS(validate(spec), ConfigError);
  }
}
