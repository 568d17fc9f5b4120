#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "korpusmap/corpus.hpp"
#include "korpusmap/mapeval.hpp"
#include "korpusmap/matrix.hpp"

namespace korpusmap {

inline constexpr std::size_t kSnippetLength = 300;

struct BundlePoint {
    std::string id;
    double x = 0.0;
    double y = 0.0;
    std::string institution;
    std::vector<std::string> keywords;
    /// First kSnippetLength code points of the document text.
    std::string snippet;

    bool operator==(const BundlePoint&) const = default;
};

struct BundleScheme {
    /// LabelScheme::name(), e.g. "institution" or "keyword:a,b".
    std::string name;
    /// Per-point labels, aligned with MapBundle::points.
    std::vector<std::string> labels;

    bool operator==(const BundleScheme&) const = default;
};

/// Self-contained map shared by the SVG renderer and the browser viewer.
///
/// Serialized as a single JSON object with keys `config`, `created`,
/// `metrics`, `points`, `schemes`. Keys are sorted at every level and floats
/// use 9 significant digits, so identical inputs give identical bytes.
struct MapBundle {
    std::vector<BundlePoint> points;
    std::vector<BundleScheme> schemes;
    /// Embedding descriptor: the full t-SNE configuration, or {"method": "pca", ...}.
    nlohmann::json config = nlohmann::json::object();
    std::vector<MapMetrics> metrics;
    std::string created;

    const BundleScheme* find_scheme(std::string_view name) const;

    bool operator==(const MapBundle&) const = default;
};

/// Throws PreconditionError when coordinate rows do not match the corpus or
/// are not finite.
MapBundle make_bundle(const DenseMatrix& y, const Corpus& corpus, std::span<const LabelScheme> schemes,
                      nlohmann::json config, std::span<const MapMetrics> metrics, std::string created);

std::string serialize_bundle(const MapBundle& bundle);

/// Throws FormatError naming the first field that violates the contract.
MapBundle parse_bundle(std::string_view text);

/// Canonical JSON text: sorted keys, no whitespace, integers verbatim, other
/// numbers as %.9g. Throws Error on non-finite numbers.
std::string canonical_json(const nlohmann::json& value);

void export_bundle(const MapBundle& bundle, const std::filesystem::path& path);
MapBundle load_bundle(const std::filesystem::path& path);

/// Fixed 10-color cycle used for labels in sorted order.
std::span<const std::string_view> palette();
inline constexpr std::string_view kUnlabeledColor = "#b0b0b0";

struct LegendEntry {
    std::string label;
    std::string color;
    std::size_t count = 0;
};

/// Distinct labels sorted lexicographically with palette colors assigned in
/// that order; "unlabeled" is always gray and listed last.
std::vector<LegendEntry> legend_for(std::span<const std::string> labels);

struct SvgOptions {
    std::size_t width_px = 900;
    double margin_px = 20.0;
    double radius_px = 2.5;
};

/// One circle per point, colored by the scheme's labels, with a legend
/// below the plot area. Throws PreconditionError for an unknown scheme.
std::string render_svg(const MapBundle& bundle, std::string_view scheme, const SvgOptions& options = {});

}  // namespace korpusmap
