#include <cmath>

#include "corrsense/errors.hpp"
#include "corrsense/prox.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "prox_cases.hpp"

using namespace corrsense;
using doctest::Approx;

namespace {

Vector vec(std::initializer_list<double> values) {
  Vector v(static_cast<Eigen::Index>(values.size()));
  Eigen::Index i = 0;
  for (double x : values) v(i++) = x;
  return v;
}

Matrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double max_abs(const Vector& a, const Vector& b) { return (a - b).lpNorm<Eigen::Infinity>(); }

}  // namespace

TEST_SUITE("prox") {
  TEST_CASE("norm_eval") {
    CHECK(norm_eval(L1Norm{}, vec({3, -4})) == 7.0);
    CHECK(norm_eval(GroupNorm{{1, 2}}, vec({3, -4})) == Approx(5.0));
    CHECK(norm_eval(LinfNorm{}, vec({3, -4})) == 4.0);
    CHECK(norm_eval(TraceNorm{2, 2}, vec({1, 0, 0, 1})) == Approx(2.0));
    CHECK_THROWS_AS(norm_eval(TraceNorm{2, 2}, vec({1, 0, 0})), DomainError);
    CHECK_THROWS_AS(norm_eval(GroupNorm{{2, 2}}, vec({1, 0, 0})), DomainError);
  }

  TEST_CASE("trace norm agrees with the 2x2 closed form") {
    oracle::Gen gen(3);
    for (int i = 0; i < 200; ++i) {
      const Matrix a = gen.matrix(2, 2);
      CHECK(norm_eval(TraceNorm{2, 2}, flatten(a)) == Approx(oracle::nuclear2(a)).epsilon(1e-12));
    }
  }

  TEST_CASE("flatten is row-major") {
    Matrix a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    CHECK(flatten(a) == vec({1, 2, 3, 4, 5, 6}));
    CHECK(unflatten(flatten(a), 2, 3) == a);
  }

  TEST_CASE("prox_l1") {
    CHECK(prox_l1(vec({3, -0.5, 1}), 1.0) == vec({2, 0, 0}));
    const Vector x = vec({1.5, -2, 0.25});
    CHECK(prox_l1(x, 0.0) == x);
    CHECK(max_abs(prox_l1(vec({2, 1}), 0.5), vec({1.5, 0.5})) < 1e-15);
    CHECK(max_abs(prox_l1(vec({2, 1}), 0.5), oracle::prox_l1_grid(vec({2, 1}), 0.5)) < 1e-3);
    CHECK_THROWS_AS(prox_l1(x, -0.1), DomainError);
  }

  TEST_CASE("prox_l1l2") {
    const BlockPartition one{1, 2};
    CHECK(prox_l1l2(vec({3, 4}), one, 5.0).norm() == 0.0);
    CHECK(max_abs(prox_l1l2(vec({3, 4}), one, 2.5), vec({1.5, 2})) < 1e-15);
    CHECK(max_abs(prox_l1l2(vec({3, 4}), one, 2.5), oracle::prox_group_grid(vec({3, 4}), 2, 2.5)) < 1e-3);
    CHECK(prox_l1l2(vec({0, 0, 1, 1}), {2, 2}, 0.5).head(2).norm() == 0.0);
    oracle::Gen gen(8);
    for (int i = 0; i < 50; ++i) {
      const Vector x = gen.sparse_vector(7, 2.0);
      const double theta = gen.uniform(0.0, 2.0);
      CHECK(max_abs(prox_l1l2(x, {7, 1}, theta), prox_l1(x, theta)) <= 1e-14 * (1.0 + max_abs(x, Vector::Zero(7))));
    }
    CHECK_THROWS_AS(prox_l1l2(vec({1, 2}), one, -1.0), DomainError);
  }

  TEST_CASE("prox_trace") {
    CHECK((prox_trace(diag2(3, 1), 2.0) - diag2(1, 0)).norm() < 1e-12);
    oracle::Gen gen(21);
    const Matrix a = gen.matrix(4, 3);
    CHECK((prox_trace(a, 0.0) - a).norm() < 1e-10);
    const Matrix out = prox_trace(a, 0.5);
    Eigen::JacobiSVD<Matrix> in_svd(a), out_svd(out);
    for (int i = 0; i < 3; ++i)
      CHECK(std::abs(out_svd.singularValues()(i) - std::max(in_svd.singularValues()(i) - 0.5, 0.0)) < 1e-8);
    CHECK_THROWS_AS(prox_trace(a, -1.0), DomainError);
  }

  TEST_CASE("projections: examples") {
    CHECK(max_abs(project_l2_ball(vec({3, 4}), vec({0, 0}), 5.0), vec({3, 4})) < 1e-15);
    CHECK(max_abs(project_l2_ball(vec({3, 4}), vec({0, 0}), 1.0), vec({0.6, 0.8})) < 1e-15);
    CHECK(project_l2_ball(vec({1, 1}), vec({1, 0}), 0.0) == vec({1, 0}));
    CHECK(max_abs(project_l1_ball(vec({2, 1}), 1.0), vec({1, 0})) < 1e-15);
    CHECK(project_l1_ball(vec({0.2, 0.3}), 1.0) == vec({0.2, 0.3}));
    CHECK(max_abs(project_l1_ball(vec({3, 0}), 1.0), vec({1, 0})) < 1e-15);
    // Radius 0 collapses every ball to the origin.
    CHECK(project_l1_ball(vec({2, -1, 0.5}), 0.0).norm() == 0.0);
    CHECK(project_l1l2_ball(vec({2, -1, 0.5, 3}), {2, 2}, 0.0).norm() == 0.0);
    CHECK(project_linf_ball(vec({2, -1}), 0.0).norm() == 0.0);
    CHECK(project_trace_ball(Matrix::Identity(2, 3), 0.0).norm() == 0.0);
    CHECK(project_linf_ball(vec({2, -0.5}), 1.0) == vec({1, -0.5}));
    CHECK(max_abs(project_l1l2_ball(vec({3, 4, 0, 0}), {2, 2}, 1.0), vec({0.6, 0.8, 0, 0})) < 1e-15);
    CHECK((project_trace_ball(diag2(3, 1), 2.0) - diag2(2, 0)).norm() < 1e-12);
    CHECK_THROWS_AS(project_l1_ball(vec({1}), -1.0), DomainError);
    CHECK_THROWS_AS(project_l2_ball(vec({1, 2}), vec({1}), 1.0), DomainError);
  }

  TEST_CASE("projections: boundary-search oracles on the examples") {
    auto l1 = [](const Vector& u) { return u.lpNorm<1>(); };
    auto l2 = [](const Vector& u) { return u.norm(); };
    CHECK(max_abs(oracle::project_radial2_grid(vec({2, 1}), vec({0, 0}), 1.0, l1), vec({1, 0})) < 1e-3);
    CHECK(max_abs(oracle::project_radial2_grid(vec({3, 4}), vec({0, 0}), 1.0, l2), vec({0.6, 0.8})) < 1e-3);
    CHECK(max_abs(oracle::project_group2x2_grid(vec({3, 4, 0, 0}), 1.0), vec({0.6, 0.8, 0, 0})) < 1e-3);
    CHECK((oracle::project_trace2_grid(diag2(3, 1), 2.0) - diag2(2, 0)).norm() < 1e-3);
  }

  TEST_CASE("Moreau identity for l1") {
    oracle::Gen gen(4);
    for (int i = 0; i < 1000; ++i) {
      const Vector x = gen.sparse_vector(gen.integer(1, 9), 3.0);
      const double theta = gen.uniform(0.01, 3.0);
      const Vector sum = prox_l1(x, theta) + theta * project_linf_ball(x / theta, 1.0);
      CHECK(max_abs(sum, x) <= 1e-12 * (1.0 + x.lpNorm<Eigen::Infinity>()));
    }
  }

  TEST_CASE("nonexpansive, idempotent, feasible") {
    oracle::Gen gen(5);
    for (const auto& op : cases::operator_cases()) {
      CAPTURE(op.name);
      int expansive = 0, not_idempotent = 0, infeasible = 0;
      for (int i = 0; i < 1000; ++i) {
        const Vector u = i % 3 ? gen.vector(op.dim, 2.0) : gen.sparse_vector(op.dim, 2.0);
        const Vector v = i % 2 ? gen.vector(op.dim, 2.0) : Vector(u + gen.vector(op.dim, 1e-3));
        const Vector pu = op.apply(u), pv = op.apply(v);
        expansive += (pu - pv).norm() > (u - v).norm() * (1.0 + 1e-12) + 1e-14;
        if (op.projection) {
          not_idempotent += max_abs(op.apply(pu), pu) > 1e-12;
          infeasible += op.distance(pu) > op.radius + 1e-9;
        }
      }
      CHECK(expansive == 0);
      CHECK(not_idempotent == 0);
      CHECK(infeasible == 0);
    }
  }

  TEST_CASE("prox operators match grid search in two and four dimensions") {
    oracle::Gen gen(6);
    for (int i = 0; i < 3; ++i) {
      const Vector x2 = gen.vector(2, 1.5), x4 = gen.vector(4, 1.5);
      const double theta = gen.uniform(0.1, 1.2);
      CHECK(max_abs(prox_l1(x4, theta), oracle::prox_l1_grid(x4, theta)) < 1e-3);
      CHECK(max_abs(prox_l1l2(x2, {1, 2}, theta), oracle::prox_group_grid(x2, 2, theta)) < 1e-3);
      CHECK(max_abs(prox_l1l2(x4, {2, 2}, theta), oracle::prox_group_grid(x4, 2, theta)) < 1e-3);
      const Matrix a = gen.matrix(2, 2);
      CHECK((prox_trace(a, theta) - oracle::prox_trace2_grid(a, theta)).cwiseAbs().maxCoeff() < 1e-3);
    }
  }
}
