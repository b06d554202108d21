#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "corrsense/errors.hpp"
#include "corrsense/instance.hpp"

namespace corrsense {
namespace {

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

template <class Row>
void write_row(std::ostream& out, const Row& row) {
  for (Eigen::Index j = 0; j < row.size(); ++j) {
    if (j > 0) out << ' ';
    out << format_real(row(j));
  }
  out << '\n';
}

void write_header(std::ostream& out, const ProblemInstance& instance) {
  out << instance.n() << ' ' << instance.p() << ' ' << format_real(instance.delta) << '\n';
}

// Reads the next non-blank line; returns false at end of input.
bool next_line(std::istream& in, std::string& line, std::int64_t& line_no) {
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
  }
  return false;
}

[[noreturn]] void fail(std::int64_t line_no, const std::string& what) {
  throw FormatError("instance line " + std::to_string(line_no) + ": " + what);
}

Vector parse_row(const std::string& line, std::int64_t expected, std::int64_t line_no) {
  std::istringstream fields(line);
  std::vector<double> values;
  std::string token;
  while (fields >> token) {
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(token, &used);
    } catch (const std::exception&) {
      fail(line_no, "'" + token + "' is not a real number");
    }
    if (used != token.size()) fail(line_no, "'" + token + "' is not a real number");
    if (!std::isfinite(value)) fail(line_no, "'" + token + "' is not finite");
    values.push_back(value);
  }
  if (static_cast<std::int64_t>(values.size()) != expected)
    fail(line_no, "expected " + std::to_string(expected) + " values, found " + std::to_string(values.size()));
  return Eigen::Map<Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

std::string trimmed(const std::string& line) {
  const auto b = line.find_first_not_of(" \t\r");
  const auto e = line.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : line.substr(b, e - b + 1);
}

}  // namespace

void write_instance(std::ostream& out, const ProblemInstance& instance) {
  write_header(out, instance);
  for (Eigen::Index i = 0; i < instance.phi.rows(); ++i) write_row(out, instance.phi.row(i));
  write_row(out, instance.y);
  if (instance.x_star) {
    out << "xstar\n";
    write_row(out, *instance.x_star);
  }
  if (instance.v_star) {
    out << "vstar\n";
    write_row(out, *instance.v_star);
  }
}

ProblemInstance read_instance(std::istream& in) {
  std::string line;
  std::int64_t line_no = 0;
  if (!next_line(in, line, line_no)) fail(line_no, "missing header 'n p delta'");
  std::istringstream header(line);
  std::int64_t n = 0, p = 0;
  double delta = 0.0;
  std::string extra;
  if (!(header >> n >> p >> delta) || (header >> extra)) fail(line_no, "header must be 'n p delta'");
  if (n < 1 || p < 1 || !(delta >= 0.0)) fail(line_no, "header needs n, p >= 1 and delta >= 0");

  ProblemInstance inst;
  inst.delta = delta;
  inst.phi.resize(n, p);
  for (std::int64_t i = 0; i < n; ++i) {
    if (!next_line(in, line, line_no)) fail(line_no, "expected " + std::to_string(n) + " rows of phi");
    inst.phi.row(i) = parse_row(line, p, line_no).transpose();
  }
  if (!next_line(in, line, line_no)) fail(line_no, "missing y row");
  inst.y = parse_row(line, n, line_no);
  while (next_line(in, line, line_no)) {
    const std::string tag = trimmed(line);
    std::optional<Vector>* target = nullptr;
    std::int64_t length = 0;
    if (tag == "xstar") {
      target = &inst.x_star;
      length = p;
    } else if (tag == "vstar") {
      target = &inst.v_star;
      length = n;
    } else {
      fail(line_no, "unexpected content '" + tag + "' (expected xstar or vstar)");
    }
    if (target->has_value()) fail(line_no, "duplicate " + tag + " section");
    if (!next_line(in, line, line_no)) fail(line_no, "missing row after " + tag);
    *target = parse_row(line, length, line_no);
  }
  try {
    inst.validate();
  } catch (const DomainError& e) {
    throw FormatError(std::string("instance is inconsistent: ") + e.what());
  }
  return inst;
}

void write_instance_file(const std::string& path, const ProblemInstance& instance) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_instance(out, instance);
  if (!out) throw IoError("failed writing '" + path + "'");
}

ProblemInstance read_instance_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_instance(in);
}

void write_solution(std::ostream& out, const ProblemInstance& instance, const SolverResult& result) {
  write_header(out, instance);
  out << "xhat\n";
  write_row(out, result.x_hat);
  out << "vhat\n";
  write_row(out, result.v_hat);
}

}  // namespace corrsense
