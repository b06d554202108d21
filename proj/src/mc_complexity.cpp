#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "corrsense/errors.hpp"
#include "corrsense/geometry.hpp"
#include "corrsense/minimize.hpp"
#include "corrsense/rng.hpp"

namespace corrsense {
namespace {

constexpr std::int64_t kMinSamples = 100;

// A representative point x of the structure class. Only the sign pattern
// and support matter for the descent cone, so magnitudes are unit.
struct Exemplar {
  StructureSpec structure;
  std::vector<std::int64_t> support;  // coordinates (sparse, binary) or blocks (block-sparse)
  std::vector<double> direction;      // sign per coordinate, or unit vector per support block
  std::vector<char> in_support;
};

Exemplar make_exemplar(const StructureSpec& structure, std::uint64_t exemplar_seed) {
  const Seed root = Seed(exemplar_seed).child("exemplar");
  Exemplar ex{structure, {}, {}, {}};
  if (const auto* sp = std::get_if<Sparse>(&structure)) {
    ex.support = sample_without_replacement(sp->p, sp->s, root.child("support").stream());
    ex.in_support.assign(static_cast<std::size_t>(sp->p), 0);
    const auto signs = root.child("signs").stream();
    for (auto i : ex.support) {
      ex.in_support[static_cast<std::size_t>(i)] = 1;
      ex.direction.push_back(signs.uniform(static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0);
    }
  } else if (const auto* bs = std::get_if<BlockSparse>(&structure)) {
    ex.support = sample_without_replacement(bs->m, bs->s, root.child("support").stream());
    ex.in_support.assign(static_cast<std::size_t>(bs->m), 0);
    const auto dir = root.child("direction").stream();
    for (auto b : ex.support) {
      ex.in_support[static_cast<std::size_t>(b)] = 1;
      std::vector<double> u(static_cast<std::size_t>(bs->k));
      double norm = 0.0;
      for (std::int64_t j = 0; j < bs->k; ++j) {
        u[static_cast<std::size_t>(j)] = dir.normal(static_cast<std::uint64_t>(b * bs->k + j));
        norm += u[static_cast<std::size_t>(j)] * u[static_cast<std::size_t>(j)];
      }
      norm = std::sqrt(norm);
      for (double& value : u) ex.direction.push_back(value / norm);
    }
  } else if (const auto* bin = std::get_if<Binary>(&structure)) {
    const auto signs = root.child("signs").stream();
    for (std::int64_t i = 0; i < bin->p; ++i)
      ex.direction.push_back(signs.uniform(static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0);
  }
  return ex;
}

// dist^2(g, t * subdiff) = on_sq - 2 t on_dot + t^2 on_count + sum_i (off_i - t)_+^2
struct DistanceProfile {
  double on_sq = 0.0;
  double on_dot = 0.0;
  double on_count = 0.0;
  std::vector<double> off;

  double operator()(double t) const {
    double value = on_sq - 2.0 * t * on_dot + t * t * on_count;
    for (double a : off) {
      const double excess = a - t;
      if (excess > 0.0) value += excess * excess;
    }
    return value;
  }
};

double minimize_profile(const DistanceProfile& profile) {
  double hi = 1.0;
  for (double a : profile.off) hi = std::max(hi, a);
  if (profile.on_count > 0.0) hi = std::max(hi, profile.on_dot / profile.on_count);
  hi += 1.0;
  return golden_section(profile, 0.0, hi, 1e-8).value;
}

// Minimum over t >= 0 of dist^2(g, t * subdiff ||x||) for the i-th Gaussian sample.
double sample_kernel(const Exemplar& ex, const Seed& seed, std::int64_t i) {
  const CounterStream g = seed.child("sample", static_cast<std::uint64_t>(i)).stream();
  DistanceProfile profile;
  if (const auto* sp = std::get_if<Sparse>(&ex.structure)) {
    std::size_t next = 0;
    profile.off.reserve(static_cast<std::size_t>(sp->p - sp->s));
    for (std::int64_t j = 0; j < sp->p; ++j) {
      const double gj = g.normal(static_cast<std::uint64_t>(j));
      if (ex.in_support[static_cast<std::size_t>(j)]) {
        profile.on_sq += gj * gj;
        profile.on_dot += gj * ex.direction[next++];
      } else {
        profile.off.push_back(std::abs(gj));
      }
    }
    profile.on_count = static_cast<double>(sp->s);
    return minimize_profile(profile);
  }
  if (const auto* bs = std::get_if<BlockSparse>(&ex.structure)) {
    std::size_t next = 0;
    for (std::int64_t b = 0; b < bs->m; ++b) {
      double sq = 0.0;
      double dot = 0.0;
      const bool on = ex.in_support[static_cast<std::size_t>(b)];
      for (std::int64_t j = 0; j < bs->k; ++j) {
        const double gj = g.normal(static_cast<std::uint64_t>(b * bs->k + j));
        sq += gj * gj;
        if (on) dot += gj * ex.direction[next + static_cast<std::size_t>(j)];
      }
      if (on) {
        next += static_cast<std::size_t>(bs->k);
        profile.on_sq += sq;
        profile.on_dot += dot;
      } else {
        profile.off.push_back(std::sqrt(sq));
      }
    }
    profile.on_count = static_cast<double>(bs->s);
    return minimize_profile(profile);
  }
  if (const auto* bin = std::get_if<Binary>(&ex.structure)) {
    // Normal cone {w : w_i x_i >= 0}; the distance is the negative part of g_i x_i.
    double value = 0.0;
    for (std::int64_t j = 0; j < bin->p; ++j) {
      const double aligned = g.normal(static_cast<std::uint64_t>(j)) * ex.direction[static_cast<std::size_t>(j)];
      if (aligned < 0.0) value += aligned * aligned;
    }
    return value;
  }
  const auto& lr = std::get<LowRank>(ex.structure);
  // x = [I_r 0; 0 0]: the tangent space holds the first r rows and columns,
  // UV^T = diag(1_r, 0), and the orthogonal complement is the trailing block.
  Eigen::MatrixXd gm(lr.m1, lr.m2);
  for (std::int64_t a = 0; a < lr.m1; ++a)
    for (std::int64_t b = 0; b < lr.m2; ++b) gm(a, b) = g.normal(static_cast<std::uint64_t>(a * lr.m2 + b));
  const auto r = lr.r;
  profile.on_sq = gm.squaredNorm() - gm.bottomRightCorner(lr.m1 - r, lr.m2 - r).squaredNorm();
  profile.on_dot = gm.topLeftCorner(r, r).trace();
  profile.on_count = static_cast<double>(r);
  if (lr.m2 > r) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(gm.bottomRightCorner(lr.m1 - r, lr.m2 - r));
    const auto& sv = svd.singularValues();
    profile.off.assign(sv.data(), sv.data() + sv.size());
  }
  return minimize_profile(profile);
}

ComplexityEstimate summarize(const std::vector<double>& values) {
  const auto count = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / count;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  const double se = std::sqrt(ss / (count - 1.0) / count);
  return {mean, std::nullopt, EstimateMethod::monte_carlo, se, static_cast<std::int64_t>(values.size())};
}

void check_mc_args(const StructureSpec& structure, std::int64_t samples) {
  validate(structure);
  if (samples < kMinSamples)
    throw ConfigError("Monte-Carlo complexity needs at least 100 samples for a usable standard error");
}

}  // namespace

ComplexityEstimate mc_complexity(const StructureSpec& structure, std::uint64_t exemplar_seed, std::int64_t samples,
                                 std::uint64_t seed) {
  check_mc_args(structure, samples);
  const Exemplar ex = make_exemplar(structure, exemplar_seed);
  const Seed root = Seed(seed).child("mc-complexity");
  std::vector<double> values(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < samples; ++i) values[static_cast<std::size_t>(i)] = sample_kernel(ex, root, i);
  return summarize(values);
}

namespace reference {
ComplexityEstimate mc_complexity(const StructureSpec& structure, std::uint64_t exemplar_seed, std::int64_t samples,
                                 std::uint64_t seed) {
  check_mc_args(structure, samples);
  const Exemplar ex = make_exemplar(structure, exemplar_seed);
  const Seed root = Seed(seed).child("mc-complexity");
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples));
  for (std::int64_t i = 0; i < samples; ++i) values.push_back(sample_kernel(ex, root, i));
  return summarize(values);
}
}  // namespace reference

McMoments mc_gaussian_nuclear_norm(std::int64_t m1, std::int64_t m2, std::int64_t samples, std::uint64_t seed) {
  if (m1 < 1 || m2 < 1) throw DomainError("nuclear norm sampling needs m1, m2 >= 1");
  if (samples < 2) throw ConfigError("nuclear norm sampling needs at least 2 samples");
  const Seed root = Seed(seed).child("nuclear-norm");
  std::vector<double> values(static_cast<std::size_t>(samples));
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < samples; ++i) {
    const CounterStream g = root.child("sample", static_cast<std::uint64_t>(i)).stream();
    Eigen::MatrixXd gm(m1, m2);
    for (std::int64_t a = 0; a < m1; ++a)
      for (std::int64_t b = 0; b < m2; ++b) gm(a, b) = g.normal(static_cast<std::uint64_t>(a * m2 + b));
    values[static_cast<std::size_t>(i)] = Eigen::JacobiSVD<Eigen::MatrixXd>(gm).singularValues().sum();
  }
  const auto est = summarize(values);
  return {est.value_sq, est.std_error, est.samples};
}

}  // namespace corrsense
