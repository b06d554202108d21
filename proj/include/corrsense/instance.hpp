#pragma once

// Seeded generation of measurement matrices, structured signals,
// corruptions and bounded noise, plus the instance text format.

#include <cstdint>
#include <iosfwd>
#include <string>

#include "corrsense/geometry.hpp"
#include "corrsense/rng.hpp"
#include "corrsense/solver.hpp"

namespace corrsense {

/// n x p matrix with iid N(0, 1/n) entries; entry (i, j) is draw i p + j of
/// the seed's stream. Rows are filled in parallel.
Matrix gen_gaussian_matrix(std::int64_t n, std::int64_t p, const Seed& seed);

/// Structured vector of the class's ambient dimension. Sparse and block
/// supports are uniform without replacement with N(0, 1) values, binary is
/// uniform on {-1, +1}^p, low rank is A B^T with Gaussian factors, flattened
/// row-major.
Vector gen_signal(const StructureSpec& structure, const Seed& seed);
/// Same as gen_signal but checks that the structure lives in R^n.
Vector gen_corruption(const StructureSpec& structure, std::int64_t n, const Seed& seed);

enum class NoiseMode { none, sphere };
const char* to_string(NoiseMode mode);
NoiseMode parse_noise_mode(const std::string& name);

/// none: zeros. sphere: delta g / ||g||_2, so ||z||_2 = delta.
Vector gen_noise(std::int64_t n, double delta, NoiseMode mode, const Seed& seed);

/// y = phi x_star + v_star + z. Throws DomainError when ||z||_2 > delta (1 + 1e-12).
ProblemInstance assemble(Matrix phi, Vector x_star, Vector v_star, Vector z, double delta);

/// Text format: "n p delta", n rows of phi, one row of y, then optional
/// "xstar" / "vstar" tag lines each followed by one row. Reals use 17
/// significant digits.
void write_instance(std::ostream& out, const ProblemInstance& instance);
ProblemInstance read_instance(std::istream& in);
void write_instance_file(const std::string& path, const ProblemInstance& instance);
ProblemInstance read_instance_file(const std::string& path);

/// Solution file: "n p delta" header followed by "xhat" and "vhat" tag
/// lines, each followed by one row, in the instance number format.
void write_solution(std::ostream& out, const ProblemInstance& instance, const SolverResult& result);

namespace reference {
/// Single-threaded gen_gaussian_matrix.
Matrix gen_gaussian_matrix(std::int64_t n, std::int64_t p, const Seed& seed);
}  // namespace reference

}  // namespace corrsense
