#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"
#include "korpusmap/mapio.hpp"
#include "korpusmap/textio.hpp"

namespace korpusmap {

namespace {

// Tableau 10, with its gray swapped for a dark blue so no label color can be
// confused with the unlabeled gray.
constexpr std::array<std::string_view, 10> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#393b79", "#bcbd22", "#17becf",
};

constexpr double kLegendRow = 18.0;
constexpr double kLegendSwatch = 10.0;

std::string escape_xml(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return format_double(v, 6); }

}  // namespace

std::span<const std::string_view> palette() { return kPalette; }

std::vector<LegendEntry> legend_for(std::span<const std::string> labels) {
    std::map<std::string, std::size_t> counts;
    for (const auto& label : labels) ++counts[label];
    std::vector<LegendEntry> out;
    std::size_t next = 0;
    for (const auto& [label, count] : counts) {
        if (label == kUnlabeled) continue;
        out.push_back({label, std::string(kPalette[next++ % kPalette.size()]), count});
    }
    if (const auto it = counts.find(std::string(kUnlabeled)); it != counts.end())
        out.push_back({it->first, std::string(kUnlabeledColor), it->second});
    return out;
}

std::string render_svg(const MapBundle& bundle, std::string_view scheme, const SvgOptions& options) {
    const BundleScheme* found = bundle.find_scheme(scheme);
    if (!found) throw PreconditionError("bundle has no label scheme \"" + std::string(scheme) + "\"");
    if (options.width_px == 0) throw PreconditionError("SVG width must be positive");
    const double width = static_cast<double>(options.width_px);
    const double margin = options.margin_px;
    const double side = width - 2.0 * margin;
    if (!(side > 0.0)) throw PreconditionError("SVG margins leave no room for the plot");

    const std::vector<LegendEntry> legend = legend_for(found->labels);
    std::map<std::string, std::string> color_of;
    for (const auto& entry : legend) color_of[entry.label] = entry.color;

    const double height = width + static_cast<double>(legend.size()) * kLegendRow + margin;

    double lo_x = 0.0, hi_x = 0.0, lo_y = 0.0, hi_y = 0.0;
    if (!bundle.points.empty()) {
        lo_x = hi_x = bundle.points.front().x;
        lo_y = hi_y = bundle.points.front().y;
        for (const auto& p : bundle.points) {
            lo_x = std::min(lo_x, p.x);
            hi_x = std::max(hi_x, p.x);
            lo_y = std::min(lo_y, p.y);
            hi_y = std::max(hi_y, p.y);
        }
    }
    // One scale for both axes keeps the aspect ratio; the data box is
    // centered in the square plot area.
    const double extent = std::max(hi_x - lo_x, hi_y - lo_y);
    const double scale = extent > 0.0 ? side / extent : 0.0;
    const double mid_x = 0.5 * (lo_x + hi_x);
    const double mid_y = 0.5 * (lo_y + hi_y);
    const double center = 0.5 * width;

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n";
    out += "<g id=\"points\">\n";
    for (std::size_t i = 0; i < bundle.points.size(); ++i) {
        const auto& p = bundle.points[i];
        const double cx = center + (p.x - mid_x) * scale;
        const double cy = center - (p.y - mid_y) * scale;
        out += "<circle cx=\"" + num(cx) + "\" cy=\"" + num(cy) + "\" r=\"" + num(options.radius_px) + "\" fill=\"" +
               color_of.at(found->labels[i]) + "\"/>\n";
    }
    out += "</g>\n";
    out += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
    for (std::size_t e = 0; e < legend.size(); ++e) {
        const double top = width + static_cast<double>(e) * kLegendRow;
        out += "<rect x=\"" + num(margin) + "\" y=\"" + num(top) + "\" width=\"" + num(kLegendSwatch) +
               "\" height=\"" + num(kLegendSwatch) + "\" fill=\"" + legend[e].color + "\"/>\n";
        out += "<text x=\"" + num(margin + kLegendSwatch + 6.0) + "\" y=\"" + num(top + kLegendSwatch) + "\">" +
               escape_xml(legend[e].label) + " (" + std::to_string(legend[e].count) + ")</text>\n";
    }
    out += "</g>\n</svg>\n";
    return out;
}

}  // namespace korpusmap
