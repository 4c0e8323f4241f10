#pragma once

#include <optional>
#include <string>
#include <vector>

#include "css/experiments.hpp"
#include "css/results.hpp"

namespace css {

/// Semilog BER-vs-SNR plot of every curve in a BER table. Zero-BER points
/// are left out.
std::string ber_plot_svg(const ResultTable& table, const std::string& title);

/// Success-rate heatmap of one curve of a phase table with its 0.5 contour;
/// `reference` adds a dashed overlay.
std::string phase_heatmap_svg(const ResultTable& table, const std::string& curve,
                              const ReferenceContour* reference = nullptr);

/// Normalized map of `column` (e.g. mean_iterations, mean_pursuit_s) for one
/// sparsity multiplier of a complexity table.
std::string complexity_map_svg(const ResultTable& table, std::size_t multiplier, const std::string& column);

}  // namespace css
