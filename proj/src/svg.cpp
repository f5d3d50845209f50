#include "slice2vec/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "slice2vec/errors.hpp"

namespace s2v {

namespace {

// Qualitative palette (ColorBrewer-ish), cycled when there are more groups.
const char* kPalette[] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
};
constexpr int kPaletteSize = 12;

std::string escape_xml(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

}  // namespace

std::string scatter_svg(const std::vector<ScatterPoint>& points,
                        const std::string& title) {
    constexpr double kSize = 800.0;
    constexpr double kMargin = 60.0;

    double lo_x = std::numeric_limits<double>::infinity(), hi_x = -lo_x;
    double lo_y = lo_x, hi_y = hi_x;
    for (const auto& p : points) {
        lo_x = std::min(lo_x, p.x);
        hi_x = std::max(hi_x, p.x);
        lo_y = std::min(lo_y, p.y);
        hi_y = std::max(hi_y, p.y);
    }
    if (points.empty()) lo_x = lo_y = 0.0, hi_x = hi_y = 1.0;
    const double span_x = std::max(hi_x - lo_x, 1e-12);
    const double span_y = std::max(hi_y - lo_y, 1e-12);

    auto sx = [&](double x) {
        return kMargin + (x - lo_x) / span_x * (kSize - 2 * kMargin);
    };
    auto sy = [&](double y) {
        // SVG y grows downward; flip so larger y plots higher.
        return kSize - kMargin - (y - lo_y) / span_y * (kSize - 2 * kMargin);
    };

    // Stable label -> color assignment in order of first appearance.
    std::map<std::string, int> color_of;
    std::vector<std::string> group_order;
    for (const auto& p : points) {
        if (color_of.emplace(p.label, static_cast<int>(color_of.size())).second)
            group_order.push_back(p.label);
    }

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{0}\" "
        "viewBox=\"0 0 {0} {0}\">\n",
        static_cast<int>(kSize));
    out += fmt::format(
        "  <rect width=\"{0}\" height=\"{0}\" fill=\"white\"/>\n",
        static_cast<int>(kSize));
    if (!title.empty())
        out += fmt::format(
            "  <text x=\"{}\" y=\"28\" text-anchor=\"middle\" "
            "font-family=\"sans-serif\" font-size=\"18\">{}</text>\n",
            kSize / 2, escape_xml(title));

    for (const auto& p : points) {
        const char* color = kPalette[color_of[p.label] % kPaletteSize];
        out += fmt::format(
            "  <circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"4\" fill=\"{}\" "
            "fill-opacity=\"0.75\"/>\n",
            sx(p.x), sy(p.y), color);
    }

    double ly = kMargin;
    for (const auto& g : group_order) {
        const char* color = kPalette[color_of[g] % kPaletteSize];
        out += fmt::format(
            "  <circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"5\" fill=\"{}\"/>\n",
            kSize - kMargin + 14, ly, color);
        out += fmt::format(
            "  <text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" "
            "font-size=\"12\">{}</text>\n",
            kSize - kMargin + 24, ly + 4,
            escape_xml(g.empty() ? std::string("(none)") : g));
        ly += 18;
    }

    out += "</svg>\n";
    return out;
}

void write_scatter_svg(const std::string& path,
                       const std::vector<ScatterPoint>& points,
                       const std::string& title) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError(fmt::format("cannot open '{}' for writing", path));
    f << scatter_svg(points, title);
    if (!f) throw DataError(fmt::format("failed writing '{}'", path));
}

}  // namespace s2v
