#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "irmkit/harness.hpp"

namespace irmkit {

/// Square matrix as CSV with a header row and a label column; NaN cells are empty.
std::string matrix_csv(std::span<const std::string> labels, const Matrix& values);

/// Standalone SVG heatmap of the mean matrix. Colours run from #f7fbff at the
/// metric's floor through #6baed6 to #08306b at 1; missing cells are grey.
std::string heatmap_svg(const SimilarityMatrix& matrix);

/// Writes <metric>.csv, <metric>_ci_low.csv, <metric>_ci_high.csv and,
/// with `svg`, <metric>.svg for every matrix in the report.
void write_heatmaps(const SweepReport& report, const std::filesystem::path& dir, bool svg);

}  // namespace irmkit
