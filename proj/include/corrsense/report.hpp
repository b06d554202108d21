#pragma once

// CSV rows and the SVG heatmap for experiment output. Floats are written
// with 9 significant digits; absent fields are empty.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "corrsense/experiments.hpp"

namespace corrsense {

std::string format_float(double value);

const char* phase_csv_header();
std::string phase_csv_row(const CellResult& result);
/// "ok" when every rep converged, otherwise "max_iter:<count>".
std::string phase_status(const CellResult& result);

const char* theory_csv_header();
std::vector<std::string> theory_csv_rows(const TheoryCurve& curve);

const char* stable_csv_header();
std::string stable_csv_row(const StableErrorRecord& record);

/// Complete rows of a partially written phase CSV that agree, in order, with
/// the grid's leading cells. Throws FormatError when the header differs or
/// a row names a cell out of order.
std::vector<std::string> resumable_phase_rows(std::istream& in, const PhaseGridSpec& spec);
/// The same rows read back as cell results (counts, rates and status only).
std::vector<CellResult> parse_phase_rows(std::istream& in, const PhaseGridSpec& spec);

/// Grayscale success-rate heatmap (0 black, 1 white), one rect per cell,
/// with the theory curve as a polyline. Needs a two-dimensional grid: n by
/// s_cor for the binary experiment, s_sig by s_cor with one n otherwise.
std::string render_phase_svg(const PhaseGridSpec& spec, const std::vector<CellResult>& results,
                             const TheoryCurve& curve);

}  // namespace corrsense
