#include <cmath>
#include <random>

#include "corrsense/errors.hpp"
#include "corrsense/geometry.hpp"
#include "doctest.h"
#include "oracles.hpp"

using namespace corrsense;
using doctest::Approx;

TEST_SUITE("geometry") {
  TEST_CASE("chi_mean examples and errors") {
    CHECK(chi_mean(1) == Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-12));
    CHECK(chi_mean(2) == Approx(std::sqrt(M_PI / 2.0)).epsilon(1e-12));
    CHECK(chi_mean(1) == Approx(0.797885).epsilon(1e-6));
    CHECK(chi_mean(2) == Approx(1.253314).epsilon(1e-6));
    CHECK(chi_mean(10000) > 99.9975);
    CHECK(chi_mean(10000) < 100.0);
    CHECK_THROWS_AS(chi_mean(0), DomainError);
  }

  TEST_CASE("chi_mean agrees with the gamma-ratio oracle") {
    for (std::int64_t n : {1, 2, 3, 7, 10, 50, 333, 1000, 1999, 2000, 2001, 2002, 4096, 10000, 123457, 10000000})
      CHECK(chi_mean(n) == Approx(oracle::chi_mean_boost(n)).epsilon(1e-12));
  }

  TEST_CASE("chi_mean(2) against Monte Carlo of the planar Gaussian norm") {
    oracle::Gen gen(17);
    const int count = 1000000;
    double sum = 0.0, sum_sq = 0.0;
    for (int i = 0; i < count; ++i) {
      const double r = std::hypot(gen.normal(), gen.normal());
      sum += r;
      sum_sq += r * r;
    }
    const double mean = sum / count;
    const double se = std::sqrt((sum_sq / count - mean * mean) / count);
    CHECK(std::abs(mean - chi_mean(2)) < 4.0 * se);
  }

  TEST_CASE("Chu sandwich for every n up to 1e4") {
    int violations = 0;
    for (std::int64_t n = 1; n <= 10000; ++n) {
      const double mu = chi_mean(n);
      const double nn = static_cast<double>(n);
      violations += !(std::sqrt(nn - 0.5) < mu && mu < std::sqrt(nn));
    }
    CHECK(violations == 0);
  }

  TEST_CASE("sparse closed forms") {
    const auto prior = sparse_bound_prior(100, 1000);
    CHECK(prior.value_sq == Approx(610.517).epsilon(1e-6));
    CHECK(*prior.scale_t == Approx(2.14597).epsilon(1e-5));
    CHECK(prior.method == EstimateMethod::closed_form_prior);
    const auto full = sparse_bound_prior(250, 250);
    CHECK(full.value_sq == Approx(375.0));
    CHECK(*full.scale_t == 0.0);
    CHECK_THROWS_AS(sparse_bound_prior(0, 1000), DomainError);
    CHECK(sparse_bound_prior(0, 1000, Empty::allowed).value_sq == 0.0);
    CHECK_THROWS_AS(sparse_bound_prior(1001, 1000), DomainError);

    const auto next = sparse_bound_new(100, 1000);
    CHECK(next.value_sq == Approx(484.338).epsilon(1e-6));
    CHECK(next.method == EstimateMethod::closed_form_new);
    // Arithmetic oracle: p (1 - (2/pi)(1 - s/p)^2).
    CHECK(next.value_sq == Approx(1000.0 * (1.0 - 2.0 / M_PI * 0.81)).epsilon(1e-14));
  }

  TEST_CASE("sparse_bound_new crosses sparse_bound_prior once near 0.07 p") {
    int sign_changes = 0;
    std::int64_t crossing = -1;
    bool prev = sparse_bound_new(1, 1000).value_sq < sparse_bound_prior(1, 1000).value_sq;
    for (std::int64_t s = 2; s <= 1000; ++s) {
      const bool now = sparse_bound_new(s, 1000).value_sq < sparse_bound_prior(s, 1000).value_sq;
      if (now != prev) {
        ++sign_changes;
        crossing = s;
      }
      prev = now;
    }
    CHECK(sign_changes == 1);
    CHECK(crossing >= 60);
    CHECK(crossing <= 80);
    CHECK(sparse_bound_prior(60, 1000).value_sq < sparse_bound_new(60, 1000).value_sq);
    CHECK(sparse_bound_prior(100, 1000).value_sq > sparse_bound_new(100, 1000).value_sq);
    // 2 * 70 * log(1000/70) + 105 = 477.3 against 1000 (1 - 0.86490 * 2/pi) = 449.4.
    CHECK(sparse_bound_prior(70, 1000).value_sq > sparse_bound_new(70, 1000).value_sq);
  }

  TEST_CASE("sparse_dist_exact against Simpson quadrature") {
    for (auto [s, p, t] : {std::tuple{100, 1000, 2.14597}, {1, 10, 0.3}, {10, 100, 1.7}, {50, 50, 2.0},
                           {0, 20, 1.1}, {3, 1000, 3.5}, {400, 1000, 0.6}})
      CHECK(sparse_dist_exact(s, p, t) == Approx(oracle::sparse_dist_simpson(s, p, t)).epsilon(1e-10));
    const double at_prior_t = sparse_dist_exact(100, 1000, 2.14597);
    CHECK(at_prior_t <= 610.52);
    CHECK(at_prior_t >= sparse_dist_optimal(100, 1000).value_sq);
    CHECK_THROWS_AS(sparse_dist_exact(10, 100, -1.0), DomainError);
  }

  TEST_CASE("empty structures have no finite optimal scale") {
    const auto sp = sparse_dist_optimal(0, 50);
    CHECK(sp.value_sq < 1e-12);
    CHECK_FALSE(sp.scale_t);
    const auto bl = block_dist_optimal(0, 10, 4);
    CHECK(bl.value_sq < 1e-12);
    CHECK_FALSE(bl.scale_t);
    CHECK_THROWS_AS(penalty_plan(PenaltyRule::opt, {.p = 40, .n = 50, .s_sig = 4, .s_cor = 0}), DomainError);
  }

  TEST_CASE("sparse_dist_optimal against a dense t grid") {
    for (auto [s, p] : {std::pair{100, 1000}, {1, 10}, {10, 100}, {193, 1000}, {999, 1000}}) {
      const auto opt = sparse_dist_optimal(s, p);
      double grid = sparse_dist_exact(s, p, 0.0);
      for (int i = 1; i <= 10000; ++i) grid = std::min(grid, sparse_dist_exact(s, p, 10.0 * i / 10000.0));
      CHECK(opt.value_sq <= grid + 1e-9);
      CHECK(opt.value_sq == Approx(grid).epsilon(1e-6));
      CHECK(sparse_dist_exact(s, p, *opt.scale_t) == Approx(opt.value_sq).epsilon(1e-14));
    }
    const auto opt = sparse_dist_optimal(100, 1000);
    CHECK(opt.value_sq <= 484.338);
    CHECK(opt.value_sq <= 610.517);
    CHECK(opt.method == EstimateMethod::exact_optimized);
  }

  TEST_CASE("19.3 percent anchor") {
    const double ratio = sparse_dist_optimal(193, 1000).value_sq / 1000.0;
    CHECK(ratio >= 0.49);
    CHECK(ratio <= 0.51);
  }

  TEST_CASE("dominance over both closed forms") {
    for (std::int64_t p : {10, 100, 1000}) {
      for (std::int64_t s = 1; s <= p; s += std::max<std::int64_t>(1, p / 37)) {
        const double opt = sparse_dist_optimal(s, p).value_sq;
        CHECK(opt <= sparse_bound_prior(s, p).value_sq + 1e-6);
        CHECK(opt <= sparse_bound_new(s, p).value_sq + 1e-6);
      }
    }
  }

  TEST_CASE("t = 0 gives the ambient dimension") {
    for (std::int64_t s : {0, 1, 13, 100}) CHECK(sparse_dist_exact(s, 100, 0.0) == Approx(100.0).epsilon(1e-12));
    for (std::int64_t k : {1, 2, 10}) CHECK(block_dist_exact(3, 20, k, 0.0) == Approx(20.0 * k).epsilon(1e-8));
  }

  TEST_CASE("block closed forms") {
    CHECK(block_bound_prior(10, 100, 10).value_sq == Approx(4.0 * 10 * std::log(10.0) + 30.5 * 10).epsilon(1e-12));
    CHECK(block_bound_prior(10, 100, 10).value_sq == Approx(397.1).epsilon(1e-4));
    CHECK(block_bound_prior(10, 100, 1).value_sq == Approx(127.1).epsilon(1e-3));
    CHECK_THROWS_AS(block_bound_prior(0, 100, 10), DomainError);
    CHECK(block_bound_prior(0, 100, 10, Empty::allowed).value_sq == 0.0);
    const double mu = oracle::chi_mean_boost(10);
    CHECK(block_bound_new(10, 100, 10).value_sq == Approx(1000.0 * (1.0 - mu * mu / 10.0 * 0.81)).epsilon(1e-12));
    CHECK(block_bound_new(10, 100, 10).value_sq == Approx(229.3).epsilon(1e-3));
  }

  TEST_CASE("block_dist_exact against the incomplete-gamma oracle") {
    for (auto [s, m, k, t] : {std::tuple{10, 100, 10, 3.0845 * 0.9}, {0, 5, 3, 1.0}, {2, 7, 4, 0.2},
                              {5, 100, 25, 4.0}, {1, 1, 6, 2.0}, {20, 100, 2, 1.3}})
      CHECK(block_dist_exact(s, m, k, t) == Approx(oracle::block_dist_gamma(s, m, k, t)).epsilon(1e-9));
    CHECK(block_dist_exact(10, 100, 10, 3.0845 * 0.9) <= block_bound_new(10, 100, 10).value_sq);
  }

  TEST_CASE("block with k = 1 reduces to sparse") {
    for (auto [s, p] : {std::pair{0, 10}, {3, 10}, {100, 1000}, {7, 7}})
      for (double t : {0.0, 0.4, 1.0, 2.2, 5.0})
        CHECK(std::abs(block_dist_exact(s, p, 1, t) - sparse_dist_exact(s, p, t)) <= 1e-8);
    CHECK(block_dist_optimal(100, 1000, 1).value_sq == Approx(sparse_dist_optimal(100, 1000).value_sq).epsilon(1e-8));
  }

  TEST_CASE("block_dist_optimal dominates the block closed forms") {
    for (auto [s, m, k] : {std::tuple{10, 100, 10}, {5, 100, 10}, {20, 100, 10}, {1, 50, 4}, {40, 50, 4}}) {
      const double opt = block_dist_optimal(s, m, k).value_sq;
      CHECK(opt <= block_bound_prior(s, m, k).value_sq + 1e-6);
      CHECK(opt <= block_bound_new(s, m, k).value_sq + 1e-6);
    }
  }

  TEST_CASE("low-rank and binary bounds") {
    CHECK(lowrank_bounds(0, 10, 10).next.value_sq == Approx(100.0 * (1.0 - (4.0 / 27) * (4.0 / 27))).epsilon(1e-12));
    CHECK(lowrank_bounds(0, 10, 10).next.value_sq == Approx(97.805).epsilon(1e-5));
    CHECK(lowrank_bounds(2, 30, 20).prior.value_sq == Approx(288.0));
    CHECK_THROWS_AS(lowrank_bounds(3, 20, 30), DomainError);
    CHECK(binary_bound(1000).value_sq == 500.0);
  }

  TEST_CASE("prop2_gap") {
    CHECK(prop2_gap(Sparse{1000, 100}) == Approx(2.0 * std::sqrt(10.0)).epsilon(1e-14));
    CHECK(prop2_gap(Sparse{1000, 100}) == Approx(6.325).epsilon(1e-4));
    CHECK(prop2_gap(Sparse{64, 64}) == Approx(2.0));
    CHECK(prop2_gap(BlockSparse{100, 10, 100}) == Approx(2.0));
    CHECK_THROWS_AS(prop2_gap(Sparse{10, 0}), DomainError);
    CHECK_THROWS_AS(prop2_gap(Binary{10}), DomainError);
  }

  TEST_CASE("thresholds") {
    const double c = 1.0 / std::sqrt(2.0) + 1.0 / std::sqrt(2.0 * M_PI);
    CHECK(constrained_threshold(0, 0) == Approx(1.106).epsilon(1e-3));
    CHECK(constrained_threshold(500, 484.338) == Approx(std::sqrt(984.338) + c).epsilon(1e-14));
    CHECK(constrained_threshold(500, 484.338) == Approx(32.480).epsilon(1e-4));
    CHECK(constrained_threshold(1, 2) < constrained_threshold(1.001, 2));
    CHECK(constrained_threshold(1, 2) < constrained_threshold(1, 2.001));

    CHECK(penalized_threshold(0, 0) == Approx(8.626).epsilon(1e-3));
    const double d = std::sqrt(484.338);
    CHECK(penalized_threshold(d, d) == Approx(74.65).epsilon(1e-4));
    CHECK(penalized_threshold(1, 2) != penalized_threshold(2, 1));

    const double mu = oracle::chi_mean_boost(1100);
    CHECK(success_probability(1100, 32.480, 0.0) == Approx(1.0 - std::exp(-0.5 * (mu - 32.48) * (mu - 32.48))).epsilon(1e-12));
    CHECK(success_probability(1100, 32.480, 0.0) == Approx(0.21).epsilon(0.05));
    CHECK(success_probability(100, chi_mean(100), 0.0) == 0.0);
    CHECK(success_probability(100, 50.0, 0.0) == 0.0);
    double prev = 0.0;
    for (std::int64_t n = 200; n <= 5000; n += 200) {
      const double prob = success_probability(n, 10.0, 0.0);
      CHECK(prob >= prev);
      prev = prob;
    }
    CHECK(prev == Approx(1.0));
    const auto r = recovery_threshold(1100, 32.48, 0.0);
    CHECK(r.mu_n == Approx(mu).epsilon(1e-12));
    CHECK(r.success_prob == success_probability(1100, 32.48, 0.0));
  }

  TEST_CASE("penalty rules") {
    PenaltyInputs in{.p = 1000, .n = 1000, .s_sig = 10, .s_cor = 400};
    CHECK(penalty_plan(PenaltyRule::dense, in).lambda == Approx(0.6 / 0.99).epsilon(1e-12));
    CHECK(penalty_plan(PenaltyRule::sparse, in).lambda ==
          Approx(std::sqrt(std::log(2.5)) / std::sqrt(std::log(100.0))).epsilon(1e-12));
    CHECK(penalty_plan(PenaltyRule::sparse, in).lambda == Approx(0.44607).epsilon(1e-4));
    const auto c = penalty_plan(PenaltyRule::constant, in);
    CHECK(c.lambda == 1.0);
    CHECK(c.t_sig == Approx(std::sqrt(2.0 * std::log(2000.0 / 410.0))));
    const auto opt = penalty_plan(PenaltyRule::opt, in);
    CHECK(opt.lambda == Approx(opt.t_cor / opt.t_sig).epsilon(1e-15));
    CHECK(opt.t_sig == Approx(*sparse_dist_optimal(10, 1000).scale_t));
    CHECK(opt.t_cor == Approx(*sparse_dist_optimal(400, 1000).scale_t));

    PenaltyInputs blk{.p = 1000, .n = 1000, .s_sig = 10, .s_cor = 20, .block_size = 10};
    const auto b = penalty_plan(PenaltyRule::block, blk);
    CHECK(b.lambda == Approx(chi_mean(10) * 0.8 / b.t_sig).epsilon(1e-12));
    PenaltyInputs one{.p = 1000, .n = 1000, .s_sig = 10, .s_cor = 200, .block_size = 1};
    CHECK(penalty_plan(PenaltyRule::block, one).extras.at("alpha_k") == Approx(0.3972).epsilon(1e-3));

    PenaltyInputs dense_cor{.p = 1000, .n = 1000, .s_sig = 10, .s_cor = 900};
    const auto d4 = penalty_plan(PenaltyRule::cor4, dense_cor);
    CHECK(d4.extras.at("alpha_1") == Approx(1.0 - std::sqrt(1.0 - 2.0 / M_PI)));
    CHECK(d4.degenerate);
    CHECK(d4.lambda == 0.0);
    PenaltyInputs wide{.p = 100000000, .n = 10000000, .s_sig = 10, .s_cor = 0};
    const auto w4 = penalty_plan(PenaltyRule::cor4, wide);
    CHECK_FALSE(w4.degenerate);
    CHECK(w4.lambda == Approx(1.0 / std::sqrt(M_PI * std::log(1e8 / w4.extras.at("s_gamma")))).epsilon(1e-12));

    CHECK_THROWS_AS(penalty_plan(PenaltyRule::sparse, PenaltyInputs{.p = 10, .n = 10, .s_sig = 10, .s_cor = 1}),
                    DomainError);
    CHECK(parse_penalty_rule("const") == PenaltyRule::constant);
    CHECK_THROWS(parse_penalty_rule("bogus"));
  }

  TEST_CASE("Monte Carlo complexity is thread-count independent and matches the serial kernel") {
    for (const StructureSpec& st : {StructureSpec{Sparse{200, 20}}, StructureSpec{BlockSparse{20, 5, 4}},
                                    StructureSpec{Binary{100}}, StructureSpec{LowRank{8, 6, 2}}}) {
      const auto par = mc_complexity(st, 3, 300, 99);
      const auto ser = reference::mc_complexity(st, 3, 300, 99);
      CHECK(par.value_sq == ser.value_sq);
      CHECK(par.std_error == ser.std_error);
      CHECK(par.method == EstimateMethod::monte_carlo);
      CHECK(par.samples == 300);
    }
    CHECK_THROWS_AS(mc_complexity(Sparse{100, 10}, 1, 99, 1), ConfigError);
  }

  TEST_CASE("Monte Carlo sits below the exact optimum and the binary bound") {
    const auto sp = mc_complexity(Sparse{1000, 100}, 1, 2000, 7);
    CHECK(sp.value_sq <= sparse_dist_optimal(100, 1000).value_sq + 3.0 * sp.std_error);
    const auto bin = mc_complexity(Binary{1000}, 1, 2000, 7);
    CHECK(bin.value_sq <= 500.0 + 3.0 * bin.std_error);
    const auto lr = mc_complexity(LowRank{10, 10, 2}, 1, 500, 7);
    CHECK(lr.value_sq <= lowrank_bounds(2, 10, 10).prior.value_sq + 3.0 * lr.std_error);
  }

  TEST_CASE("structure validation") {
    CHECK_THROWS_AS(validate(Sparse{10, 11}), DomainError);
    CHECK_THROWS_AS(validate(BlockSparse{10, 0, 1}), DomainError);
    CHECK_THROWS_AS(validate(LowRank{3, 4, 1}), DomainError);
    CHECK_THROWS_AS(validate(Binary{0}), DomainError);
    CHECK(ambient_dim(LowRank{4, 3, 1}) == 12);
    CHECK(ambient_dim(BlockSparse{10, 3, 1}) == 30);
  }
}
