#include "korpusmap/mapeval.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"
#include "korpusmap/parallel.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/utf8.hpp"

namespace korpusmap {

double knn_label_agreement(const DenseMatrix& y, std::span<const std::string> labels, std::size_t k) {
    if (labels.size() != y.rows())
        throw PreconditionError("knn_label_agreement: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(y.rows()) + " points");
    if (k == 0) throw PreconditionError("knn_label_agreement: k must be positive");

    std::vector<std::size_t> labeled;
    for (std::size_t i = 0; i < labels.size(); ++i)
        if (labels[i] != kUnlabeled) labeled.push_back(i);
    if (labeled.empty()) throw PreconditionError("knn_label_agreement: every point is unlabeled");
    if (k >= labeled.size())
        throw PreconditionError("knn_label_agreement: k = " + std::to_string(k) + " needs more than " +
                                std::to_string(labeled.size()) + " labeled points");

    const std::size_t m = labeled.size();
    const std::size_t d = y.cols();
    std::vector<double> per_point(m, 0.0);
    parallel_for_blocks(m, [&](std::size_t begin, std::size_t end) {
        std::vector<std::pair<double, std::size_t>> cand;
        cand.reserve(m - 1);
        for (std::size_t a = begin; a < end; ++a) {
            const std::size_t i = labeled[a];
            cand.clear();
            for (std::size_t j : labeled) {
                if (j == i) continue;
                double s = 0.0;
                for (std::size_t c = 0; c < d; ++c) {
                    const double diff = y(i, c) - y(j, c);
                    s += diff * diff;
                }
                cand.emplace_back(s, j);
            }
            std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k), cand.end());
            std::size_t same = 0;
            for (std::size_t t = 0; t < k; ++t)
                if (labels[cand[t].second] == labels[i]) ++same;
            per_point[a] = static_cast<double>(same) / static_cast<double>(k);
        }
    });
    double sum = 0.0;
    for (double v : per_point) sum += v;
    return sum / static_cast<double>(m);
}

double grid_occupancy(const DenseMatrix& y, std::size_t cells_per_side) {
    if (y.cols() != 2) throw PreconditionError("grid_occupancy needs a 2-column layout");
    if (y.rows() == 0) throw PreconditionError("grid_occupancy needs at least one point");
    if (cells_per_side == 0) throw PreconditionError("grid_occupancy needs at least one cell per side");
    double lo[2], hi[2];
    for (std::size_t c = 0; c < 2; ++c) {
        lo[c] = hi[c] = y(0, c);
        for (std::size_t i = 1; i < y.rows(); ++i) {
            lo[c] = std::min(lo[c], y(i, c));
            hi[c] = std::max(hi[c], y(i, c));
        }
    }
    auto cell = [&](double v, std::size_t c) -> std::size_t {
        const double extent = hi[c] - lo[c];
        if (!(extent > 0.0)) return 0;
        const double t = (v - lo[c]) / extent * static_cast<double>(cells_per_side);
        return std::min(static_cast<std::size_t>(std::max(t, 0.0)), cells_per_side - 1);
    };
    std::vector<bool> occupied(cells_per_side * cells_per_side, false);
    for (std::size_t i = 0; i < y.rows(); ++i) occupied[cell(y(i, 1), 1) * cells_per_side + cell(y(i, 0), 0)] = true;
    const auto filled = static_cast<double>(std::count(occupied.begin(), occupied.end(), true));
    return filled / static_cast<double>(occupied.size());
}

MapMetrics evaluate_map(const DenseMatrix& y, std::span<const std::string> labels, std::string_view scheme,
                        std::size_t k, std::size_t cells_per_side) {
    MapMetrics m;
    m.scheme = std::string(scheme);
    m.k = k;
    m.grid = cells_per_side;
    m.knn_agreement = knn_label_agreement(y, labels, k);
    m.occupancy = grid_occupancy(y, cells_per_side);
    return m;
}

std::string format_metrics(std::span<const MapMetrics> metrics) {
    std::string out;
    for (const auto& m : metrics) {
        out += "[" + m.scheme + "]\n";
        out += "k = " + std::to_string(m.k) + "\n";
        out += "grid = " + std::to_string(m.grid) + "\n";
        out += "knn_agreement = " + format_double(m.knn_agreement, 17) + "\n";
        out += "occupancy = " + format_double(m.occupancy, 17) + "\n";
    }
    return out;
}

std::vector<MapMetrics> parse_metrics(std::string_view text) {
    std::vector<MapMetrics> out;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto t = utf8::trim(line);
        if (t.empty() || t.front() == '#') continue;
        if (t.front() == '[') {
            if (t.back() != ']') throw FormatError("metrics line " + std::to_string(line_no) + ": unterminated section");
            out.push_back(MapMetrics{});
            out.back().scheme = std::string(t.substr(1, t.size() - 2));
            continue;
        }
        if (out.empty()) throw FormatError("metrics line " + std::to_string(line_no) + ": value outside a section");
        const auto eq = t.find('=');
        if (eq == std::string_view::npos) throw FormatError("metrics line " + std::to_string(line_no) + ": expected key = value");
        const std::string key(utf8::trim(t.substr(0, eq)));
        const std::string value(utf8::trim(t.substr(eq + 1)));
        try {
            if (key == "k") out.back().k = std::stoul(value);
            else if (key == "grid") out.back().grid = std::stoul(value);
            else if (key == "knn_agreement") out.back().knn_agreement = std::stod(value);
            else if (key == "occupancy") out.back().occupancy = std::stod(value);
            else throw FormatError("metrics line " + std::to_string(line_no) + ": unknown key \"" + key + "\"");
        } catch (const std::logic_error&) {
            throw FormatError("metrics line " + std::to_string(line_no) + ": bad value for \"" + key + "\"");
        }
    }
    for (const auto& m : out)
        if (!(m.knn_agreement >= 0.0 && m.knn_agreement <= 1.0 && m.occupancy >= 0.0 && m.occupancy <= 1.0))
            throw FormatError("metrics for \"" + m.scheme + "\" lie outside [0, 1]");
    return out;
}

}  // namespace korpusmap
