#include "corrsense/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "corrsense/errors.hpp"

namespace corrsense {
namespace {

template <class T>
std::string opt_int(const std::optional<T>& value) {
  return value ? std::to_string(*value) : std::string();
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

// Position of value on an axis whose sorted grid values sit at cell centers.
double axis_position(const std::vector<std::int64_t>& values, double value) {
  if (values.size() == 1 || value <= static_cast<double>(values.front())) return 0.5;
  for (std::size_t i = 1; i < values.size(); ++i) {
    const auto lo = static_cast<double>(values[i - 1]);
    const auto hi = static_cast<double>(values[i]);
    if (value <= hi) return static_cast<double>(i) - 0.5 + (value - lo) / (hi - lo);
  }
  return static_cast<double>(values.size()) - 0.5;
}

std::vector<std::int64_t> sorted_unique(std::vector<std::int64_t> values) {
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

}  // namespace

std::string format_float(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

const char* phase_csv_header() {
  return "experiment,p,n,m,k,s_sig,s_cor,reps,successes,success_rate,mean_rel_error,status";
}

std::string phase_status(const CellResult& result) {
  return result.max_iter_count == 0 ? "ok" : "max_iter:" + std::to_string(result.max_iter_count);
}

std::string phase_csv_row(const CellResult& r) {
  std::string row = to_string(r.experiment);
  row += ',' + std::to_string(r.p);
  row += ',' + std::to_string(r.cell.n);
  row += ',' + opt_int(r.block_m);
  row += ',' + opt_int(r.block_k);
  row += ',' + opt_int(r.cell.s_sig);
  row += ',' + std::to_string(r.cell.s_cor);
  row += ',' + std::to_string(r.trials);
  row += ',' + std::to_string(r.successes);
  row += ',' + format_float(r.success_rate);
  row += ',' + format_float(r.mean_rel_error);
  row += ',' + phase_status(r);
  return row;
}

const char* theory_csv_header() { return "experiment,abscissa_name,abscissa,ordinate_name,ordinate"; }

std::vector<std::string> theory_csv_rows(const TheoryCurve& curve) {
  std::vector<std::string> rows;
  for (const auto& pt : curve.points) {
    std::string row = to_string(curve.experiment);
    row += ',' + curve.abscissa_name + ',' + format_float(pt.abscissa) + ',' + curve.ordinate_name + ',';
    if (pt.ordinate) row += format_float(*pt.ordinate);
    rows.push_back(std::move(row));
  }
  return rows;
}

const char* stable_csv_header() { return "p,n,rep,error,rescaled_error"; }

std::string stable_csv_row(const StableErrorRecord& r) {
  std::string row = std::to_string(r.p) + ',' + std::to_string(r.n) + ',' + std::to_string(r.rep) + ',' +
                    format_float(r.error) + ',';
  if (r.rescaled_error) row += format_float(*r.rescaled_error);
  return row;
}

std::vector<std::string> resumable_phase_rows(std::istream& in, const PhaseGridSpec& spec) {
  const std::string content{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  std::vector<std::string> lines;
  std::size_t start = 0;
  for (std::size_t nl = content.find('\n'); nl != std::string::npos; nl = content.find('\n', start)) {
    lines.push_back(content.substr(start, nl - start));
    start = nl + 1;
  }
  // Anything after the last newline is a row cut short and is dropped.
  if (lines.empty()) return {};
  if (lines.front() != phase_csv_header()) throw FormatError("existing CSV has a different header");
  const auto cells = grid_cells(spec);
  std::vector<std::string> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto fields = split_csv(lines[i]);
    const std::size_t index = i - 1;
    if (fields.size() != 12) throw FormatError("existing CSV row " + std::to_string(i + 1) + " has the wrong field count");
    if (index >= cells.size()) throw FormatError("existing CSV has more rows than the grid");
    const auto& cell = cells[index];
    const bool same = fields[0] == to_string(spec.experiment) && fields[1] == std::to_string(spec.p) &&
                      fields[2] == std::to_string(cell.n) && fields[5] == opt_int(cell.s_sig) &&
                      fields[6] == std::to_string(cell.s_cor) && fields[7] == std::to_string(spec.reps);
    if (!same) throw FormatError("existing CSV row " + std::to_string(i + 1) + " does not match the grid");
    rows.push_back(lines[i]);
  }
  return rows;
}

std::vector<CellResult> parse_phase_rows(std::istream& in, const PhaseGridSpec& spec) {
  const auto rows = resumable_phase_rows(in, spec);
  const auto cells = grid_cells(spec);
  std::vector<CellResult> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto f = split_csv(rows[i]);
    CellResult r;
    r.experiment = spec.experiment;
    r.p = spec.p;
    r.cell = cells[i];
    if (!f[3].empty()) r.block_m = std::stoll(f[3]);
    if (!f[4].empty()) r.block_k = std::stoll(f[4]);
    try {
      r.trials = std::stoll(f[7]);
      r.successes = std::stoll(f[8]);
      r.success_rate = std::stod(f[9]);
      r.mean_rel_error = std::stod(f[10]);
      if (f[11].rfind("max_iter:", 0) == 0) r.max_iter_count = std::stoll(f[11].substr(9));
    } catch (const std::exception&) {
      throw FormatError("existing CSV row " + std::to_string(i + 2) + " has unreadable numbers");
    }
    out.push_back(r);
  }
  return out;
}

std::string render_phase_svg(const PhaseGridSpec& spec, const std::vector<CellResult>& results,
                             const TheoryCurve& curve) {
  const bool binary = spec.experiment == Experiment::binary_sparse_constrained;
  if (!binary && spec.n_values.size() > 1) throw ConfigError("heatmap needs a single n when s_sig varies");
  const auto xs = sorted_unique(binary ? spec.n_values : spec.s_sig_values);
  const auto ys = sorted_unique(spec.s_cor_values);
  const std::string x_name = binary ? "n" : "s_sig";

  constexpr double cell = 24.0, left = 70.0, top = 20.0, bottom = 50.0, right = 20.0;
  const double width = left + cell * static_cast<double>(xs.size()) + right;
  const double height = top + cell * static_cast<double>(ys.size()) + bottom;
  const double plot_bottom = top + cell * static_cast<double>(ys.size());
  const auto px = [&](double pos) { return left + cell * pos; };
  const auto py = [&](double pos) { return plot_bottom - cell * pos; };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  svg << "<title>" << to_string(spec.experiment) << " success rate</title>\n";
  svg << "<g shape-rendering=\"crispEdges\">\n";
  for (const auto& r : results) {
    const double xv = static_cast<double>(binary ? r.cell.n : r.cell.s_sig.value_or(0));
    const double xi = axis_position(xs, xv) - 0.5;
    const double yi = axis_position(ys, static_cast<double>(r.cell.s_cor)) - 0.5;
    const int gray = static_cast<int>(std::lround(255.0 * std::clamp(r.success_rate, 0.0, 1.0)));
    svg << "<rect x=\"" << px(xi) << "\" y=\"" << py(yi + 1.0) << "\" width=\"" << cell << "\" height=\"" << cell
        << "\" fill=\"rgb(" << gray << ',' << gray << ',' << gray << ")\"/>\n";
  }
  svg << "</g>\n";
  svg << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << cell * static_cast<double>(xs.size())
      << "\" height=\"" << cell * static_cast<double>(ys.size()) << "\" fill=\"none\" stroke=\"black\"/>\n";

  std::string points;
  for (const auto& pt : curve.points) {
    if (!pt.ordinate) continue;
    std::ostringstream one;
    one << px(axis_position(xs, pt.abscissa)) << ',' << py(axis_position(ys, *pt.ordinate)) << ' ';
    points += one.str();
  }
  if (!points.empty()) {
    points.pop_back();
    svg << "<polyline points=\"" << points << "\" fill=\"none\" stroke=\"red\" stroke-width=\"2\"/>\n";
  }

  svg << "<g font-family=\"sans-serif\" font-size=\"10\">\n";
  for (std::size_t i = 0; i < xs.size(); ++i)
    svg << "<text x=\"" << px(static_cast<double>(i) + 0.5) << "\" y=\"" << plot_bottom + 14
        << "\" text-anchor=\"middle\">" << xs[i] << "</text>\n";
  for (std::size_t j = 0; j < ys.size(); ++j)
    svg << "<text x=\"" << left - 4 << "\" y=\"" << py(static_cast<double>(j) + 0.5) + 3
        << "\" text-anchor=\"end\">" << ys[j] << "</text>\n";
  svg << "<text x=\"" << px(static_cast<double>(xs.size()) / 2.0) << "\" y=\"" << height - 12
      << "\" text-anchor=\"middle\">" << x_name << "</text>\n";
  svg << "<text x=\"14\" y=\"" << py(static_cast<double>(ys.size()) / 2.0)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << py(static_cast<double>(ys.size()) / 2.0)
      << ")\">s_cor</text>\n";
  svg << "</g>\n</svg>\n";
  return svg.str();
}

}  // namespace corrsense
