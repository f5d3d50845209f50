#pragma once

#include <string>
#include <vector>

namespace s2v {

struct ScatterPoint {
    double x = 0.0;
    double y = 0.0;
    std::string label;  // legend group; empty = unlabeled
};

// Renders a self-contained SVG scatter plot, one color per label group.
std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::string& title);

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterPoint>& points,
                       const std::string& title);

}  // namespace s2v
