#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "korpusmap/matrix.hpp"

namespace korpusmap {

struct MapMetrics {
    std::string scheme;
    double knn_agreement = 0.0;
    double occupancy = 0.0;
    std::size_t k = 10;
    std::size_t grid = 20;

    bool operator==(const MapMetrics&) const = default;
};

/// Mean over labeled points of the fraction of their k nearest labeled
/// neighbors (Euclidean, ties to the lower index) sharing their label.
/// Points labeled "unlabeled" are ignored entirely.
double knn_label_agreement(const DenseMatrix& y, std::span<const std::string> labels, std::size_t k);

/// Fraction of the cells_per_side² bounding-box cells holding a point. A
/// zero-extent axis collapses to a single cell span.
double grid_occupancy(const DenseMatrix& y, std::size_t cells_per_side = 20);

MapMetrics evaluate_map(const DenseMatrix& y, std::span<const std::string> labels, std::string_view scheme,
                        std::size_t k = 10, std::size_t cells_per_side = 20);

/// Key-value text, one block per scheme:
///
///     [keyword:a,b]
///     k = 10
///     grid = 20
///     knn_agreement = 0.9475
///     occupancy = 0.3125
std::string format_metrics(std::span<const MapMetrics> metrics);
std::vector<MapMetrics> parse_metrics(std::string_view text);

}  // namespace korpusmap
