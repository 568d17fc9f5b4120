#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <functional>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "korpusmap/cli.hpp"
#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"
#include "korpusmap/linred.hpp"
#include "korpusmap/mapeval.hpp"
#include "korpusmap/mapio.hpp"
#include "korpusmap/parallel.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/textvec.hpp"
#include "korpusmap/tsne.hpp"
#include "run_config.hpp"

namespace korpusmap::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kIngested = "ingested.jsonl";
constexpr std::string_view kCorpus = "corpus.jsonl";
constexpr std::string_view kMatrix = "matrix.txt";
constexpr std::string_view kVocab = "vocab.txt";
constexpr std::string_view kCoords = "coords.txt";
constexpr std::string_view kTrace = "kl_trace.txt";
constexpr std::string_view kMetrics = "metrics.txt";
constexpr std::string_view kBundle = "bundle.json";
constexpr std::string_view kSvg = "map.svg";
constexpr std::size_t kTopKeywords = 10;

/// Descriptor written next to a coordinates file.
fs::path descriptor_path(const fs::path& coords) {
    fs::path p = coords;
    p.replace_extension(".config.json");
    return p;
}

fs::path out_dir(const RunConfig& rc) { return fs::path(rc.text("out-dir")); }

fs::path input_or(const RunConfig& rc, std::string_view key, std::string_view artifact) {
    return rc.has(key) ? fs::path(rc.text(key)) : out_dir(rc) / artifact;
}

std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

LabelScheme scheme_of(const RunConfig& rc) {
    try {
        return LabelScheme::parse(rc.text("scheme"));
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

/// The requested scheme first, then a complementary one: institutions for
/// a keyword scheme, or the most frequent keywords for the institution scheme.
std::vector<LabelScheme> bundle_schemes(const Corpus& corpus, const LabelScheme& requested) {
    std::vector<LabelScheme> out{requested};
    if (requested.kind() == LabelScheme::Kind::ByKeyword) {
        out.push_back(LabelScheme::by_institution());
        return out;
    }
    std::map<std::string, std::size_t> freq;
    for (const auto& doc : corpus.documents)
        for (const auto& kw : doc.keywords) ++freq[kw];
    if (freq.empty()) return out;
    std::vector<std::pair<std::string, std::size_t>> ranked(freq.begin(), freq.end());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    std::vector<std::string> top;
    for (std::size_t i = 0; i < ranked.size() && i < kTopKeywords; ++i) top.push_back(ranked[i].first);
    out.push_back(LabelScheme::by_keyword(std::move(top)));
    return out;
}

std::size_t labeled_count(std::span<const std::string> labels) {
    return static_cast<std::size_t>(std::count_if(labels.begin(), labels.end(),
                                                  [](const std::string& l) { return l != kUnlabeled; }));
}

TsneConfig tsne_config(const RunConfig& rc) {
    TsneConfig config;
    config.perplexity = rc.real("perplexity");
    config.theta = rc.real("theta");
    config.n_iter = rc.count("iters");
    config.early_exaggeration = rc.real("exaggeration");
    config.exaggeration_iters = rc.count("exaggeration-iters");
    config.learning_rate = rc.real("learning-rate");
    config.momentum = rc.real("momentum");
    config.final_momentum = rc.real("final-momentum");
    config.momentum_switch_iter = rc.count("momentum-switch");
    config.input_dim_reduction = rc.count("input-dims");
    config.kl_every = rc.count("kl-every");
    config.seed = rc.seed();
    const std::string& init = rc.text("init");
    if (init == "gaussian")
        config.init = TsneInit::SeededGaussian;
    else if (init == "pca")
        config.init = TsneInit::FromPca;
    else
        throw UsageError("invalid value \"" + init + "\" for --init (expected gaussian or pca)");
    return config;
}

json tsne_descriptor(const TsneConfig& c, const EmbedState& state) {
    return {{"method", "tsne"},
            {"perplexity", c.perplexity},
            {"theta", c.theta},
            {"n_iter", c.n_iter},
            {"early_exaggeration", c.early_exaggeration},
            {"exaggeration_iters", c.exaggeration_iters},
            {"learning_rate", c.learning_rate},
            {"momentum", c.momentum},
            {"final_momentum", c.final_momentum},
            {"momentum_switch_iter", c.momentum_switch_iter},
            {"init", c.init == TsneInit::FromPca ? "pca" : "gaussian"},
            {"init_scale", c.init_scale},
            {"seed", c.seed},
            {"input_dim_reduction", c.input_dim_reduction},
            {"kl_every", c.kl_every},
            {"dense_limit", c.dense_limit},
            {"iterations", state.iteration},
            {"initial_kl", state.kl_trace.front().kl},
            {"final_kl", state.kl_trace.back().kl}};
}

// Pipeline steps. Each reads and writes explicit paths so `all` can chain
// them through the output directory exactly as separate invocations would.

void step_ingest(const RunConfig& rc, const fs::path& output, std::ostream& out) {
    Corpus corpus;
    if (rc.has("remote-endpoint") || rc.has("remote-config")) {
        if (rc.has("input")) throw UsageError("--input and --remote-endpoint are mutually exclusive");
        RemoteConfig remote = rc.has("remote-config") ? RemoteConfig::load(rc.text("remote-config")) : RemoteConfig{};
        if (rc.has("remote-endpoint")) remote.endpoint = rc.text("remote-endpoint");
        FetchReport report;
        corpus = fetch_remote(remote, rc.count("limit"), &report);
        out << "fetched " << corpus.size() << " documents in " << report.pages << " pages";
        if (report.partial) out << " (remote exhausted before --limit)";
        out << '\n';
    } else {
        if (!rc.has("input")) throw UsageError("ingest needs --input or --remote-endpoint");
        LoadReport report;
        corpus = load_jsonl(rc.text("input"), &report);
        if (report.unknown_institutions)
            out << report.unknown_institutions << " documents with unknown institutions mapped to Other\n";
    }
    validate(corpus);
    save_jsonl(corpus, output);
    out << "ingested " << corpus.size() << " documents -> " << output.string() << '\n';
}

void step_sample(const RunConfig& rc, const fs::path& input, const fs::path& output, std::ostream& out) {
    const std::size_t per_group = rc.count("per-group");
    if (per_group == 0) throw UsageError("--per-group must be positive");
    const Corpus corpus = load_jsonl(input);
    const Corpus sample = sample_stratified(corpus, scheme_of(rc), per_group, rc.seed());
    save_jsonl(sample, output);
    out << "sampled " << sample.size() << " documents -> " << output.string() << '\n';
}

void step_vectorize(const RunConfig& rc, const fs::path& input, const fs::path& matrix_out, const fs::path& vocab_out,
                    std::ostream& out) {
    const Corpus corpus = load_jsonl(input);
    const Tokenizer tokenizer = rc.has("stopwords") ? Tokenizer::with_stopword_file(rc.text("stopwords")) : Tokenizer{};
    VocabularyOptions options;
    options.min_df = rc.count("min-df");
    options.max_df_ratio = rc.real("max-df-ratio");
    options.max_terms = rc.count("max-terms");
    const Vocabulary vocab = build_vocabulary(corpus, tokenizer, options);
    VectorizeReport report;
    const DocTermMatrix matrix = vectorize_tfidf(corpus, vocab, tokenizer, &report);
    write_file_atomic(matrix_out, format_triplets(matrix));
    save_vocabulary(vocab, vocab_out);
    out << "vectorized " << matrix.rows() << " documents over " << matrix.cols() << " terms -> "
        << matrix_out.string() << '\n';
    if (!report.empty_rows.empty()) out << report.empty_rows.size() << " documents have no vocabulary terms\n";
}

void step_map(const RunConfig& rc, const fs::path& input, const fs::path& coords_out, std::ostream& out) {
    const std::string& method = rc.text("method");
    const std::size_t dims = rc.count("dims");
    const DocTermMatrix matrix = parse_sparse_triplets(read_file(input));
    const fs::path trace_out = coords_out.parent_path() / kTrace;

    if (method == "pca") {
        const PcaModel model = pca_fit(matrix, dims, rc.seed());
        const DenseMatrix y = pca_transform(model, matrix);
        const json descriptor = {{"method", "pca"},
                                 {"dims", dims},
                                 {"seed", rc.seed()},
                                 {"explained_variance", model.explained_variance}};
        write_file_atomic(coords_out, format_triplets(y));
        write_file_atomic(descriptor_path(coords_out), canonical_json(descriptor) + "\n");
        out << "pca: " << y.rows() << " x " << y.cols() << " -> " << coords_out.string() << '\n';
        return;
    }
    if (method != "tsne") throw UsageError("invalid value \"" + method + "\" for --method (expected pca or tsne)");
    if (dims != 2) throw UsageError("t-SNE produces 2 dimensions; got --dims " + std::to_string(dims));

    const TsneConfig config = tsne_config(rc);
    config.validate(matrix.rows());
    // Reduce the sparse matrix here so run_tsne never sees the dense
    // full-vocabulary matrix.
    DenseMatrix features;
    if (matrix.cols() > config.input_dim_reduction) {
        const std::size_t k = std::min(config.input_dim_reduction, matrix.rows() - 1);
        features = pca_transform(pca_fit(matrix, k, config.seed), matrix);
    } else {
        features = matrix.to_dense();
    }
    const EmbedState state = run_tsne(features, config);
    write_file_atomic(coords_out, format_triplets(state.y));
    write_file_atomic(trace_out, format_kl_trace(state.kl_trace));
    write_file_atomic(descriptor_path(coords_out), canonical_json(tsne_descriptor(config, state)) + "\n");
    out << "tsne: KL " << format_double(state.kl_trace.front().kl, 6) << " -> "
        << format_double(state.kl_trace.back().kl, 6) << " after " << state.iteration << " iterations -> "
        << coords_out.string() << '\n';
}

void step_eval(const RunConfig& rc, const fs::path& corpus_in, const fs::path& coords_in, const fs::path& metrics_out,
               std::ostream& out) {
    const Corpus corpus = load_jsonl(corpus_in);
    const DenseMatrix y = parse_dense_triplets(read_file(coords_in));
    if (y.rows() != corpus.size())
        throw Error(std::to_string(y.rows()) + " coordinate rows for " + std::to_string(corpus.size()) + " documents");
    const std::size_t k = rc.count("k");
    const std::size_t grid = rc.count("grid");
    const auto schemes = bundle_schemes(corpus, scheme_of(rc));
    std::vector<MapMetrics> metrics;
    for (std::size_t s = 0; s < schemes.size(); ++s) {
        const auto labels = labels_of(corpus, schemes[s]);
        // The complementary scheme is optional; skip it when too few
        // documents carry one of its labels.
        if (s > 0 && labeled_count(labels) <= k) continue;
        metrics.push_back(evaluate_map(y, labels, schemes[s].name(), k, grid));
    }
    write_file_atomic(metrics_out, format_metrics(metrics));
    for (const auto& m : metrics)
        out << m.scheme << ": knn_agreement " << format_double(m.knn_agreement, 6) << ", occupancy "
            << format_double(m.occupancy, 6) << '\n';
}

void step_bundle(const RunConfig& rc, const fs::path& corpus_in, const fs::path& coords_in, const fs::path& metrics_in,
                 const fs::path& bundle_out, std::ostream& out) {
    const Corpus corpus = load_jsonl(corpus_in);
    const DenseMatrix y = parse_dense_triplets(read_file(coords_in));
    const fs::path descriptor_file = descriptor_path(coords_in);
    json descriptor = json::object();
    if (fs::exists(descriptor_file)) {
        try {
            descriptor = json::parse(read_file(descriptor_file));
        } catch (const json::parse_error& e) {
            throw FormatError(descriptor_file.string() + ": " + e.what());
        }
    }
    const auto metrics = parse_metrics(read_file(metrics_in));
    const auto schemes = bundle_schemes(corpus, scheme_of(rc));
    const std::string created = rc.has("created") ? rc.text("created") : utc_now();
    const MapBundle bundle = make_bundle(y, corpus, schemes, std::move(descriptor), metrics, created);
    export_bundle(bundle, bundle_out);
    out << "bundle with " << bundle.points.size() << " points -> " << bundle_out.string() << '\n';
}

void step_render(const RunConfig& rc, const fs::path& bundle_in, const fs::path& svg_out, std::ostream& out) {
    const MapBundle bundle = load_bundle(bundle_in);
    SvgOptions options;
    options.width_px = rc.count("width");
    const std::string scheme = rc.has("scheme")   ? rc.text("scheme")
                               : bundle.schemes.empty() ? std::string("institution")
                                                        : bundle.schemes.front().name;
    write_file_atomic(svg_out, render_svg(bundle, scheme, options));
    out << "rendered " << bundle.points.size() << " points colored by " << scheme << " -> " << svg_out.string()
        << '\n';
}

struct Command {
    std::string_view name;
    std::string_view help;
    std::vector<std::string_view> keys;
    std::function<void(RunConfig&, std::ostream&)> action;
};

const std::vector<std::string_view> kTsneKeys = {"perplexity",     "theta",       "iters",
                                                  "init",           "input-dims",  "exaggeration",
                                                  "exaggeration-iters", "learning-rate", "momentum",
                                                  "final-momentum", "momentum-switch", "kl-every"};
const std::vector<std::string_view> kVectorKeys = {"stopwords", "min-df", "max-df-ratio", "max-terms"};

std::vector<std::string_view> concat(std::initializer_list<std::vector<std::string_view>> parts) {
    std::vector<std::string_view> out;
    for (const auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

void persist(const RunConfig& rc, std::string_view command) {
    write_file_atomic(out_dir(rc) / ("run_config." + std::string(command) + ".txt"), rc.format());
}

std::vector<Command> commands() {
    std::vector<Command> out;
    out.push_back({"ingest",
                   "load a JSONL corpus or fetch one from a search API",
                   {"input", "remote-endpoint", "remote-config", "limit", "out-dir", "threads"},
                   [](RunConfig& rc, std::ostream& o) { step_ingest(rc, out_dir(rc) / kIngested, o); }});
    out.push_back({"sample",
                   "draw a stratified sample with --per-group documents per label",
                   {"input", "scheme", "per-group", "seed", "out-dir", "threads"},
                   [](RunConfig& rc, std::ostream& o) {
                       step_sample(rc, input_or(rc, "input", kIngested), out_dir(rc) / kCorpus, o);
                   }});
    out.push_back({"vectorize",
                   "build the vocabulary and the TF-IDF matrix",
                   concat({{"input", "out-dir", "threads"}, kVectorKeys}),
                   [](RunConfig& rc, std::ostream& o) {
                       step_vectorize(rc, input_or(rc, "input", kCorpus), out_dir(rc) / kMatrix, out_dir(rc) / kVocab,
                                      o);
                   }});
    out.push_back({"map",
                   "embed the TF-IDF matrix with PCA or t-SNE",
                   concat({{"input", "method", "dims", "seed", "out-dir", "threads"}, kTsneKeys}),
                   [](RunConfig& rc, std::ostream& o) {
                       step_map(rc, input_or(rc, "input", kMatrix), out_dir(rc) / kCoords, o);
                   }});
    out.push_back({"eval",
                   "compute k-NN label agreement and grid occupancy",
                   {"input", "coords", "scheme", "k", "grid", "out-dir", "threads"},
                   [](RunConfig& rc, std::ostream& o) {
                       step_eval(rc, input_or(rc, "input", kCorpus), input_or(rc, "coords", kCoords),
                                 out_dir(rc) / kMetrics, o);
                   }});
    out.push_back({"bundle",
                   "package coordinates, labels, snippets and metrics into a map bundle",
                   {"input", "coords", "metrics", "scheme", "created", "out-dir", "threads"},
                   [](RunConfig& rc, std::ostream& o) {
                       if (!rc.has("created")) rc.set("created", utc_now());
                       step_bundle(rc, input_or(rc, "input", kCorpus), input_or(rc, "coords", kCoords),
                                   input_or(rc, "metrics", kMetrics), out_dir(rc) / kBundle, o);
                   }});
    out.push_back({"render",
                   "draw a map bundle as an SVG scatter plot",
                   {"bundle", "scheme", "width", "out-dir", "threads"},
                   [](RunConfig& rc, std::ostream& o) {
                       step_render(rc, input_or(rc, "bundle", kBundle), out_dir(rc) / kSvg, o);
                   }});
    out.push_back({"all",
                   "run ingest, sample, vectorize, map, eval, bundle and render",
                   concat({{"input", "remote-endpoint", "remote-config", "limit", "scheme", "per-group", "seed",
                            "method", "dims", "k", "grid", "created", "width", "out-dir", "threads"},
                           kVectorKeys,
                           kTsneKeys}),
                   [](RunConfig& rc, std::ostream& o) {
                       if (!rc.has("created")) rc.set("created", utc_now());
                       const fs::path dir = out_dir(rc);
                       step_ingest(rc, dir / kIngested, o);
                       if (rc.count("per-group") > 0)
                           step_sample(rc, dir / kIngested, dir / kCorpus, o);
                       else
                           save_jsonl(load_jsonl(dir / kIngested), dir / kCorpus);
                       step_vectorize(rc, dir / kCorpus, dir / kMatrix, dir / kVocab, o);
                       step_map(rc, dir / kMatrix, dir / kCoords, o);
                       step_eval(rc, dir / kCorpus, dir / kCoords, dir / kMetrics, o);
                       step_bundle(rc, dir / kCorpus, dir / kCoords, dir / kMetrics, dir / kBundle, o);
                       step_render(rc, dir / kBundle, dir / kSvg, o);
                   }});
    return out;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"korpusmap: document maps from judgment corpora", "korpusmap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "korpusmap 0.1.0");

    const std::vector<Command> table = commands();
    std::map<std::string, std::map<std::string, std::string>> flag_values;
    std::map<std::string, std::string> config_paths;
    std::vector<CLI::App*> subs;
    for (const auto& command : table) {
        CLI::App* sub = app.add_subcommand(std::string(command.name), std::string(command.help));
        auto& values = flag_values[std::string(command.name)];
        for (const auto key : command.keys) {
            const OptionSpec& spec = option_spec(key);
            std::string help(spec.help);
            if (!spec.fallback.empty()) help += " [default: " + std::string(spec.fallback) + "]";
            sub->add_option_function<std::string>(
                "--" + std::string(key), [&values, key](const std::string& v) { values[std::string(key)] = v; },
                help);
        }
        sub->add_option("--config", config_paths[std::string(command.name)], std::string(option_spec("config").help));
        subs.push_back(sub);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        err << "korpusmap: error: " << e.what() << "\nRun with --help for more information.\n";
        return 2;
    }

    for (std::size_t c = 0; c < table.size(); ++c) {
        if (!subs[c]->parsed()) continue;
        const Command& command = table[c];
        const std::string name(command.name);
        try {
            const std::string& config = config_paths[name];
            RunConfig rc = RunConfig::resolve(command.keys, flag_values[name],
                                              config.empty() ? std::nullopt : std::optional<fs::path>(config));
            if (rc.has("threads")) set_worker_count(std::max<std::size_t>(rc.count("threads"), 1));
            fs::create_directories(out_dir(rc));
            command.action(rc, out);
            persist(rc, command.name);
            return 0;
        } catch (const UsageError& e) {
            err << "korpusmap: error: " << name << ": " << e.what() << '\n' << subs[c]->help();
            return 2;
        } catch (const std::exception& e) {
            err << "korpusmap: error: " << name << ": " << e.what() << '\n';
            return 1;
        }
    }
    return 2;
}

}  // namespace korpusmap::cli
