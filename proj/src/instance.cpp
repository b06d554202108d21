#include "corrsense/instance.hpp"

#include <cmath>
#include <string>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

void require_dims(std::int64_t n, std::int64_t p) {
  if (n < 1 || p < 1) throw DomainError("matrix dimensions must be positive");
}

void fill_row(Matrix& phi, std::int64_t i, const CounterStream& stream, double scale) {
  const auto p = phi.cols();
  for (std::int64_t j = 0; j < p; ++j) phi(i, j) = scale * stream.normal(static_cast<std::uint64_t>(i * p + j));
}

Vector sparse_vector(std::int64_t p, std::int64_t s, const Seed& seed) {
  const auto support = sample_without_replacement(p, s, seed.child("support").stream());
  const auto values = seed.child("values").stream();
  Vector x = Vector::Zero(p);
  for (auto i : support) x(i) = values.normal(static_cast<std::uint64_t>(i));
  return x;
}

}  // namespace

Matrix gen_gaussian_matrix(std::int64_t n, std::int64_t p, const Seed& seed) {
  require_dims(n, p);
  const auto stream = seed.stream();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix phi(n, p);
#pragma omp parallel for schedule(static)
  for (std::int64_t i = 0; i < n; ++i) fill_row(phi, i, stream, scale);
  return phi;
}

namespace reference {
Matrix gen_gaussian_matrix(std::int64_t n, std::int64_t p, const Seed& seed) {
  require_dims(n, p);
  const auto stream = seed.stream();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix phi(n, p);
  for (std::int64_t i = 0; i < n; ++i) fill_row(phi, i, stream, scale);
  return phi;
}
}  // namespace reference

Vector gen_signal(const StructureSpec& structure, const Seed& seed) {
  validate(structure);
  if (const auto* sp = std::get_if<Sparse>(&structure)) return sparse_vector(sp->p, sp->s, seed);
  if (const auto* bs = std::get_if<BlockSparse>(&structure)) {
    const auto blocks = sample_without_replacement(bs->m, bs->s, seed.child("support").stream());
    const auto values = seed.child("values").stream();
    Vector x = Vector::Zero(bs->m * bs->k);
    for (auto b : blocks)
      for (std::int64_t j = 0; j < bs->k; ++j) {
        const auto i = b * bs->k + j;
        x(i) = values.normal(static_cast<std::uint64_t>(i));
      }
    return x;
  }
  if (const auto* bin = std::get_if<Binary>(&structure)) {
    const auto signs = seed.child("signs").stream();
    Vector x(bin->p);
    for (std::int64_t i = 0; i < bin->p; ++i) x(i) = signs.uniform(static_cast<std::uint64_t>(i)) < 0.5 ? -1.0 : 1.0;
    return x;
  }
  const auto& lr = std::get<LowRank>(structure);
  const auto fa = seed.child("left").stream();
  const auto fb = seed.child("right").stream();
  Matrix a(lr.m1, lr.r), b(lr.m2, lr.r);
  for (std::int64_t i = 0; i < lr.m1; ++i)
    for (std::int64_t j = 0; j < lr.r; ++j) a(i, j) = fa.normal(static_cast<std::uint64_t>(i * lr.r + j));
  for (std::int64_t i = 0; i < lr.m2; ++i)
    for (std::int64_t j = 0; j < lr.r; ++j) b(i, j) = fb.normal(static_cast<std::uint64_t>(i * lr.r + j));
  return flatten(a * b.transpose());
}

Vector gen_corruption(const StructureSpec& structure, std::int64_t n, const Seed& seed) {
  validate(structure);
  if (ambient_dim(structure) != n)
    throw DomainError("corruption structure " + describe(structure) + " does not live in R^" + std::to_string(n));
  return gen_signal(structure, seed);
}

const char* to_string(NoiseMode mode) { return mode == NoiseMode::none ? "none" : "sphere"; }

NoiseMode parse_noise_mode(const std::string& name) {
  if (name == "none") return NoiseMode::none;
  if (name == "sphere") return NoiseMode::sphere;
  throw ConfigError("unknown noise mode '" + name + "' (expected none or sphere)");
}

Vector gen_noise(std::int64_t n, double delta, NoiseMode mode, const Seed& seed) {
  if (n < 1) throw DomainError("noise length must be positive");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw DomainError("delta must be finite and nonnegative");
  if (mode == NoiseMode::none || delta == 0.0) return Vector::Zero(n);
  const auto stream = seed.stream();
  Vector g(n);
  for (std::int64_t i = 0; i < n; ++i) g(i) = stream.normal(static_cast<std::uint64_t>(i));
  return g * (delta / g.norm());
}

ProblemInstance assemble(Matrix phi, Vector x_star, Vector v_star, Vector z, double delta) {
  if (phi.cols() != x_star.size() || phi.rows() != v_star.size() || phi.rows() != z.size())
    throw DomainError("instance parts have inconsistent dimensions");
  if (!(delta >= 0.0)) throw DomainError("delta must be nonnegative");
  if (z.norm() > delta * (1.0 + 1e-12)) throw DomainError("noise norm exceeds delta");
  ProblemInstance inst;
  inst.y = phi * x_star + v_star + z;
  inst.phi = std::move(phi);
  inst.x_star = std::move(x_star);
  inst.v_star = std::move(v_star);
  inst.z = std::move(z);
  inst.delta = delta;
  inst.validate();
  return inst;
}

}  // namespace corrsense
