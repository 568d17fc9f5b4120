#include "run_config.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>

#include "korpusmap/corpus.hpp"

namespace korpusmap::cli {

namespace {

constexpr auto kOptions = std::to_array<OptionSpec>({
    {"input", ValueKind::Text, "", "input file (corpus, matrix or coordinates, depending on the command)"},
    {"remote-endpoint", ValueKind::Text, "", "search API URL to ingest from instead of --input"},
    {"remote-config", ValueKind::Text, "", "key-value file describing the remote API fields and paging"},
    {"limit", ValueKind::Count, "1000", "maximum number of documents to fetch from the remote API"},
    {"scheme", ValueKind::Scheme, "institution", "label scheme: institution or keyword:a,b,c"},
    {"per-group", ValueKind::Count, "0", "documents drawn per label group (0 keeps the whole corpus in 'all')"},
    {"seed", ValueKind::Count, "0", "seed for sampling, PCA sketches and t-SNE initialization"},
    {"method", ValueKind::Text, "tsne", "embedding method: pca or tsne"},
    {"dims", ValueKind::Count, "2", "output dimensions (t-SNE supports 2 only)"},
    {"perplexity", ValueKind::Real, "30", "t-SNE perplexity"},
    {"theta", ValueKind::Real, "0.5", "Barnes-Hut opening angle; 0 computes exact gradients"},
    {"iters", ValueKind::Count, "1000", "t-SNE iterations"},
    {"init", ValueKind::Text, "gaussian", "t-SNE initial layout: gaussian or pca"},
    {"input-dims", ValueKind::Count, "50", "PCA dimensions fed to t-SNE when the matrix is wider"},
    {"exaggeration", ValueKind::Real, "12", "early exaggeration factor"},
    {"exaggeration-iters", ValueKind::Count, "250", "iterations with early exaggeration"},
    {"learning-rate", ValueKind::Real, "200", "gradient descent step size"},
    {"momentum", ValueKind::Real, "0.5", "momentum before the switch iteration"},
    {"final-momentum", ValueKind::Real, "0.8", "momentum after the switch iteration"},
    {"momentum-switch", ValueKind::Count, "250", "iteration at which the final momentum takes over"},
    {"stopwords", ValueKind::Text, "", "stopword file, one word per line"},
    {"min-df", ValueKind::Count, "1", "minimum document frequency of a term"},
    {"max-df-ratio", ValueKind::Real, "1", "maximum document frequency as a fraction of documents"},
    {"max-terms", ValueKind::Count, "20000", "vocabulary size cap (most frequent terms kept)"},
    {"k", ValueKind::Count, "10", "neighbors for k-NN label agreement"},
    {"grid", ValueKind::Count, "20", "cells per side for grid occupancy"},
    {"width", ValueKind::Count, "900", "SVG width in pixels"},
    {"created", ValueKind::Text, "", "timestamp stored in the bundle (defaults to the current UTC time)"},
    {"coords", ValueKind::Text, "", "coordinates file"},
    {"metrics", ValueKind::Text, "", "metrics file"},
    {"bundle", ValueKind::Text, "", "map bundle file"},
    {"out-dir", ValueKind::Text, ".", "directory receiving the artifacts"},
    {"config", ValueKind::Text, "", "key-value file with option defaults"},
    {"kl-every", ValueKind::Count, "10", "iterations between recorded KL values"},
    {"threads", ValueKind::Count, "", "worker threads (overrides KORPUSMAP_THREADS)"},
});

std::string describe(std::string_view key, const std::string& value) {
    return "invalid value \"" + value + "\" for --" + std::string(key);
}

}  // namespace

std::span<const OptionSpec> option_specs() { return kOptions; }

const OptionSpec& option_spec(std::string_view name) {
    for (const auto& spec : kOptions)
        if (spec.name == name) return spec;
    throw std::logic_error("unknown option " + std::string(name));
}

RunConfig RunConfig::resolve(std::span<const std::string_view> keys, const std::map<std::string, std::string>& flags,
                             const std::optional<std::filesystem::path>& config_file) {
    std::map<std::string, std::string> file_values;
    if (config_file) {
        file_values = read_key_values(*config_file);
        for (const auto& [key, value] : file_values) {
            const bool known = std::any_of(kOptions.begin(), kOptions.end(),
                                           [&](const OptionSpec& s) { return s.name == key && key != "config"; });
            if (!known) throw UsageError("unknown key \"" + key + "\" in " + config_file->string());
        }
    }
    RunConfig rc;
    for (const auto key : keys) {
        const std::string k(key);
        if (const auto it = flags.find(k); it != flags.end())
            rc.values_[k] = it->second;
        else if (const auto ft = file_values.find(k); ft != file_values.end())
            rc.values_[k] = ft->second;
        else
            rc.values_[k] = std::string(option_spec(key).fallback);
        if (rc.has(k)) rc.check(option_spec(key));
    }
    return rc;
}

bool RunConfig::has(std::string_view key) const {
    const auto it = values_.find(key);
    return it != values_.end() && !it->second.empty();
}

const std::string& RunConfig::text(std::string_view key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) throw std::logic_error("option " + std::string(key) + " not resolved");
    return it->second;
}

std::size_t RunConfig::count(std::string_view key) const {
    const std::string& value = text(key);
    std::size_t out = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size()) throw UsageError(describe(key, value));
    return out;
}

double RunConfig::real(std::string_view key) const {
    const std::string& value = text(key);
    double out = 0.0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size() || !std::isfinite(out))
        throw UsageError(describe(key, value));
    return out;
}

std::uint64_t RunConfig::seed() const {
    const std::string& value = text("seed");
    std::uint64_t out = 0;
    const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || end != value.data() + value.size()) throw UsageError(describe("seed", value));
    return out;
}

void RunConfig::check(const OptionSpec& spec) const {
    switch (spec.kind) {
        case ValueKind::Text: break;
        case ValueKind::Count: spec.name == "seed" ? static_cast<void>(seed()) : static_cast<void>(count(spec.name)); break;
        case ValueKind::Real: real(spec.name); break;
        case ValueKind::Scheme:
            try {
                LabelScheme::parse(text(spec.name));
            } catch (const std::exception& e) {
                throw UsageError(describe(spec.name, text(spec.name)) + ": " + e.what());
            }
            break;
    }
}

void RunConfig::set(std::string_view key, std::string value) { values_[std::string(key)] = std::move(value); }

std::string RunConfig::format() const {
    std::string out;
    for (const auto& [key, value] : values_) out += key + " = " + value + "\n";
    return out;
}

}  // namespace korpusmap::cli
