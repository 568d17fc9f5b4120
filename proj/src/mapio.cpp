#include "korpusmap/mapio.hpp"

#include <cmath>

#include "korpusmap/error.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/utf8.hpp"

namespace korpusmap {

using nlohmann::json;

namespace {

void write_canonical(const json& value, std::string& out) {
    switch (value.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            // object_t is an ordered std::map, so iteration is sorted by key.
            for (const auto& [key, item] : value.items()) {
                if (!first) out += ',';
                first = false;
                out += json(key).dump();
                out += ':';
                write_canonical(item, out);
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            for (std::size_t i = 0; i < value.size(); ++i) {
                if (i) out += ',';
                write_canonical(value[i], out);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float: {
            const double v = value.get<double>();
            if (!std::isfinite(v)) throw Error("cannot serialize a non-finite number");
            out += format_double(v, 9);
            break;
        }
        case json::value_t::string:
            out += value.dump(-1, ' ', false, json::error_handler_t::replace);
            break;
        case json::value_t::discarded:
            throw Error("cannot serialize a discarded JSON value");
        default:
            out += value.dump();
    }
}

[[noreturn]] void bad_field(const std::string& path, const std::string& what) {
    throw FormatError("bundle field \"" + path + "\" " + what);
}

const json& require(const json& object, const std::string& key, const std::string& path) {
    const auto it = object.find(key);
    if (it == object.end()) bad_field(path + key, "is missing");
    return *it;
}

std::string require_string(const json& object, const std::string& key, const std::string& path) {
    const json& v = require(object, key, path);
    if (!v.is_string()) bad_field(path + key, "must be a string");
    return v.get<std::string>();
}

double require_number(const json& object, const std::string& key, const std::string& path) {
    const json& v = require(object, key, path);
    if (!v.is_number()) bad_field(path + key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) bad_field(path + key, "must be finite");
    return d;
}

std::size_t require_count(const json& object, const std::string& key, const std::string& path) {
    const json& v = require(object, key, path);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0))
        bad_field(path + key, "must be a non-negative integer");
    return v.get<std::size_t>();
}

std::vector<std::string> require_strings(const json& object, const std::string& key, const std::string& path) {
    const json& v = require(object, key, path);
    if (!v.is_array()) bad_field(path + key, "must be an array");
    std::vector<std::string> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!v[i].is_string()) bad_field(path + key + "[" + std::to_string(i) + "]", "must be a string");
        out.push_back(v[i].get<std::string>());
    }
    return out;
}

json to_json(const MapBundle& bundle) {
    json points = json::array();
    for (const auto& p : bundle.points)
        points.push_back({{"id", p.id},
                          {"x", p.x},
                          {"y", p.y},
                          {"institution", p.institution},
                          {"keywords", p.keywords},
                          {"snippet", p.snippet}});
    json schemes = json::array();
    for (const auto& s : bundle.schemes) schemes.push_back({{"name", s.name}, {"labels", s.labels}});
    json metrics = json::object();
    for (const auto& m : bundle.metrics)
        metrics[m.scheme] = {{"k", m.k}, {"grid", m.grid}, {"knn_agreement", m.knn_agreement}, {"occupancy", m.occupancy}};
    return {{"points", points},
            {"schemes", schemes},
            {"config", bundle.config},
            {"metrics", metrics},
            {"created", bundle.created}};
}

}  // namespace

const BundleScheme* MapBundle::find_scheme(std::string_view name) const {
    for (const auto& s : schemes)
        if (s.name == name) return &s;
    return nullptr;
}

std::string canonical_json(const json& value) {
    std::string out;
    write_canonical(value, out);
    return out;
}

MapBundle make_bundle(const DenseMatrix& y, const Corpus& corpus, std::span<const LabelScheme> schemes,
                      json config, std::span<const MapMetrics> metrics, std::string created) {
    if (y.rows() != corpus.size())
        throw PreconditionError("bundle: " + std::to_string(y.rows()) + " coordinate rows for " +
                                std::to_string(corpus.size()) + " documents");
    if (y.cols() != 2) throw PreconditionError("bundle: coordinates must have 2 columns");
    if (!y.all_finite()) throw PreconditionError("bundle: coordinates contain non-finite values");
    if (!config.is_object()) throw PreconditionError("bundle: config must be an object");

    MapBundle bundle;
    bundle.points.reserve(corpus.size());
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const Document& doc = corpus.documents[i];
        bundle.points.push_back({doc.id, y(i, 0), y(i, 1), std::string(to_string(doc.institution)), doc.keywords,
                                 std::string(utf8::prefix(doc.text, kSnippetLength))});
    }
    for (const auto& scheme : schemes) bundle.schemes.push_back({scheme.name(), labels_of(corpus, scheme)});
    bundle.config = std::move(config);
    bundle.metrics.assign(metrics.begin(), metrics.end());
    bundle.created = std::move(created);
    return bundle;
}

std::string serialize_bundle(const MapBundle& bundle) { return canonical_json(to_json(bundle)) + "\n"; }

MapBundle parse_bundle(std::string_view text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("bundle is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw FormatError("bundle root must be an object");

    MapBundle bundle;
    const json& points = require(root, "points", "");
    if (!points.is_array()) bad_field("points", "must be an array");
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::string path = "points[" + std::to_string(i) + "].";
        const json& p = points[i];
        if (!p.is_object()) bad_field("points[" + std::to_string(i) + "]", "must be an object");
        BundlePoint point;
        point.id = require_string(p, "id", path);
        point.x = require_number(p, "x", path);
        point.y = require_number(p, "y", path);
        point.institution = require_string(p, "institution", path);
        point.keywords = require_strings(p, "keywords", path);
        point.snippet = require_string(p, "snippet", path);
        if (utf8::length(point.snippet) > kSnippetLength) bad_field(path + "snippet", "exceeds 300 characters");
        bundle.points.push_back(std::move(point));
    }

    const json& schemes = require(root, "schemes", "");
    if (!schemes.is_array()) bad_field("schemes", "must be an array");
    for (std::size_t i = 0; i < schemes.size(); ++i) {
        const std::string path = "schemes[" + std::to_string(i) + "].";
        if (!schemes[i].is_object()) bad_field("schemes[" + std::to_string(i) + "]", "must be an object");
        BundleScheme scheme;
        scheme.name = require_string(schemes[i], "name", path);
        scheme.labels = require_strings(schemes[i], "labels", path);
        if (scheme.labels.size() != bundle.points.size()) bad_field(path + "labels", "must have one label per point");
        bundle.schemes.push_back(std::move(scheme));
    }

    bundle.config = require(root, "config", "");
    if (!bundle.config.is_object()) bad_field("config", "must be an object");

    const json& metrics = require(root, "metrics", "");
    if (!metrics.is_object()) bad_field("metrics", "must be an object");
    for (const auto& [name, m] : metrics.items()) {
        const std::string path = "metrics." + name + ".";
        if (!m.is_object()) bad_field("metrics." + name, "must be an object");
        MapMetrics mm;
        mm.scheme = name;
        mm.k = require_count(m, "k", path);
        mm.grid = require_count(m, "grid", path);
        mm.knn_agreement = require_number(m, "knn_agreement", path);
        mm.occupancy = require_number(m, "occupancy", path);
        bundle.metrics.push_back(std::move(mm));
    }

    bundle.created = require_string(root, "created", "");
    return bundle;
}

void export_bundle(const MapBundle& bundle, const std::filesystem::path& path) {
    write_file_atomic(path, serialize_bundle(bundle));
}

MapBundle load_bundle(const std::filesystem::path& path) { return parse_bundle(read_file(path)); }

}  // namespace korpusmap
