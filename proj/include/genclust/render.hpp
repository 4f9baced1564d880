#pragma once

#include <span>
#include <string>

#include "genclust/expression.hpp"
#include "genclust/partition.hpp"
#include "genclust/runner.hpp"

namespace genclust {

struct Rgb {
    int r = 0;
    int g = 0;
    int b = 0;
    bool operator==(const Rgb&) const = default;
};

/// Blue (-3) -> white (0) -> red (+3), piecewise linear, clamped outside
/// [-3, 3]; channels rounded to the nearest integer.
Rgb heat_color(double value);
std::string hex(const Rgb& c);

struct RenderOptions {
    int width = 800;
    int height = 600;
    std::string title;
};

/// Plot-area margins shared by all charts, in pixels.
struct Margins {
    static constexpr double left = 120.0;
    static constexpr double right = 140.0;
    static constexpr double top = 40.0;
    static constexpr double bottom = 60.0;
};

/// Rows grouped by cluster (cluster 1 first, original order within a
/// cluster) with a separator line between consecutive clusters.
std::string render_heatmap(const ExpressionMatrix& data, const Partition& partition, const RenderOptions& opt = {});

/// One polyline per gene. Vertex j of gene i sits at
///   x = left + j * plot_width / (cols - 1)
///   y = top + (ymax - v_ij) / (ymax - ymin) * plot_height
/// where [ymin, ymax] is the data range.
std::string render_profile(const ExpressionMatrix& data, const Partition& partition, const RenderOptions& opt = {});

/// One series per curve with its own marker shape and color; excluded
/// cells break the line.
std::string render_index_curves(std::span<const IndexCurve> curves, const RenderOptions& opt = {});

} // namespace genclust
