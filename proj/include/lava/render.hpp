#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lava/correlation.hpp"
#include "lava/matrix.hpp"

namespace lava {

// Row-major placement of D features on a height x width grid.
struct GridLayout {
    std::size_t height = 0;
    std::size_t width = 0;

    // Parses "HxW".
    static GridLayout parse(const std::string& text);
    void validate(std::size_t features) const;
};

// Pair values are raised to `exponent`; pairs below `line_threshold` after
// that get no line. The widest line (value 1) is 2% of the plot width.
struct RenderSpec {
    double exponent = 3.0;
    double line_threshold = 0.1;
    double cell_px = 20.0;
    double max_line_fraction = 0.02;
};

std::string grid_heatmap_svg(std::span<const double> pair_values, const GridLayout& layout, const RenderSpec& spec);
void render_grid_heatmap(std::span<const double> pair_values, const GridLayout& layout, const RenderSpec& spec,
                         const std::filesystem::path& path);

// Samples as a light gray underlay; probes colored by presence on a [0, 1] viridis scale.
std::string presence_scatter_svg(const RealMatrix& embeddings, const RealMatrix& probes,
                                 std::span<const double> presence);
void render_presence_scatter(const RealMatrix& embeddings, const RealMatrix& probes, std::span<const double> presence,
                             const std::filesystem::path& path);

// Horizontal bars for the strongest pairs, for features without a spatial layout.
std::string pair_bar_chart_svg(std::span<const double> pair_values, std::span<const std::string> feature_names,
                               std::size_t top);

// "#rrggbb" on the presence scale for t in [0, 1].
std::string presence_color(double t);

}  // namespace lava
