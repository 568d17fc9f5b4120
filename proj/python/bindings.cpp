#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "korpusmap/cli.hpp"
#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"
#include "korpusmap/linred.hpp"
#include "korpusmap/mapeval.hpp"
#include "korpusmap/mapio.hpp"
#include "korpusmap/textvec.hpp"
#include "korpusmap/tsne.hpp"

namespace py = pybind11;
using namespace korpusmap;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DenseMatrix to_matrix(const Array& a) {
    if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
    const auto rows = static_cast<std::size_t>(a.shape(0));
    const auto cols = static_cast<std::size_t>(a.shape(1));
    return DenseMatrix(rows, cols, std::vector<double>(a.data(), a.data() + rows * cols));
}

Array to_array(const DenseMatrix& m) {
    Array out({m.rows(), m.cols()});
    std::copy(m.values().begin(), m.values().end(), out.mutable_data());
    return out;
}

Affinities to_affinities(const Array& p) {
    const DenseMatrix m = to_matrix(p);
    if (m.rows() != m.cols()) throw py::value_error("P must be square");
    return Affinities::dense(m.rows(), m.values());
}

Array affinities_array(const Affinities& p) {
    const std::size_t n = p.size();
    Array out({n, n});
    double* data = out.mutable_data();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) data[i * n + j] = p.at(i, j);
    return out;
}

// Records are dicts with id, text and optional institution, keywords, date.
Corpus corpus_from_records(const py::iterable& records) {
    Corpus corpus;
    for (const auto& item : records) {
        const auto record = item.cast<py::dict>();
        Document doc;
        doc.id = record["id"].cast<std::string>();
        doc.text = record["text"].cast<std::string>();
        if (record.contains("institution"))
            doc.institution = parse_institution(record["institution"].cast<std::string>()).value_or(Institution::Other);
        if (record.contains("keywords")) doc.keywords = record["keywords"].cast<std::vector<std::string>>();
        if (record.contains("date") && !record["date"].is_none()) doc.date = record["date"].cast<std::string>();
        corpus.documents.push_back(std::move(doc));
    }
    validate(corpus);
    return corpus;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "C++ core of korpusmap";

    static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
    static py::exception<FormatError> format_error(m, "FormatError", error.ptr());
    static py::exception<PreconditionError> precondition_error(m, "PreconditionError", error.ptr());
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const FormatError& e) {
            py::set_error(format_error, e.what());
        } catch (const PreconditionError& e) {
            py::set_error(precondition_error, e.what());
        } catch (const Error& e) {
            py::set_error(error, e.what());
        }
    });

    py::class_<Corpus>(m, "Corpus")
        .def_static("load", [](const std::filesystem::path& path) { return load_jsonl(path); }, py::arg("path"))
        .def_static("from_records", &corpus_from_records, py::arg("records"))
        .def("save", [](const Corpus& c, const std::filesystem::path& path) { save_jsonl(c, path); })
        .def("__len__", &Corpus::size)
        .def_property_readonly("ids",
                               [](const Corpus& c) {
                                   std::vector<std::string> ids;
                                   for (const auto& d : c.documents) ids.push_back(d.id);
                                   return ids;
                               })
        .def("labels", [](const Corpus& c, const std::string& scheme) { return labels_of(c, LabelScheme::parse(scheme)); },
             py::arg("scheme") = "institution")
        .def("sample",
             [](const Corpus& c, const std::string& scheme, std::size_t per_group, std::uint64_t seed) {
                 return sample_stratified(c, LabelScheme::parse(scheme), per_group, seed);
             },
             py::arg("scheme"), py::arg("per_group"), py::arg("seed") = 0);

    m.def("tokenize",
          [](const std::string& text, const std::vector<std::string>& stopwords) {
              return Tokenizer({stopwords.begin(), stopwords.end()})(text);
          },
          py::arg("text"), py::arg("stopwords") = std::vector<std::string>{});

    m.def("tfidf",
          [](const Corpus& corpus, std::size_t min_df, double max_df_ratio, std::size_t max_terms) {
              const Tokenizer tokenizer;
              const Vocabulary vocab = build_vocabulary(corpus, tokenizer, {min_df, max_df_ratio, max_terms});
              return py::make_tuple(to_array(vectorize_tfidf(corpus, vocab, tokenizer).to_dense()), vocab.terms);
          },
          "Dense L2-normalized TF-IDF rows and the vocabulary terms.", py::arg("corpus"), py::arg("min_df") = 1,
          py::arg("max_df_ratio") = 1.0, py::arg("max_terms") = 20000);

    m.def("pca",
          [](const Array& x, std::size_t k, std::uint64_t seed) {
              const DenseMatrix dense = to_matrix(x);
              const PcaModel model = pca_fit(dense, k, seed);
              return py::make_tuple(to_array(pca_transform(model, dense)), model.explained_variance);
          },
          "Scores and explained variances.", py::arg("x"), py::arg("k"), py::arg("seed") = 0);

    m.def("affinities",
          [](const Array& x, double perplexity, bool sparse) {
              const DenseMatrix points = to_matrix(x);
              return affinities_array(sparse ? knn_affinities(points, perplexity)
                                             : calibrate_affinities(squared_distances(points), perplexity));
          },
          "Joint P as a dense array; sparse=True uses the k-NN calibration.", py::arg("x"), py::arg("perplexity"),
          py::arg("sparse") = false);

    m.def("kl_divergence", [](const Array& p, const Array& y) { return kl_divergence(to_affinities(p), to_matrix(y)); },
          py::arg("p"), py::arg("y"));

    m.def("gradient",
          [](const Array& p, const Array& y, double theta) {
              const Affinities aff = to_affinities(p);
              const DenseMatrix layout = to_matrix(y);
              return to_array(theta > 0.0 ? gradient_barnes_hut(aff, layout, theta) : gradient_exact(aff, layout));
          },
          "Exact gradient for theta 0, Barnes-Hut otherwise.", py::arg("p"), py::arg("y"), py::arg("theta") = 0.0);

    m.def("tsne",
          [](const Array& x, double perplexity, std::size_t n_iter, double theta, std::uint64_t seed, bool pca_init) {
              TsneConfig config;
              config.perplexity = perplexity;
              config.n_iter = n_iter;
              config.theta = theta;
              config.seed = seed;
              config.init = pca_init ? TsneInit::FromPca : TsneInit::SeededGaussian;
              const DenseMatrix points = to_matrix(x);
              EmbedState state;
              {
                  py::gil_scoped_release release;
                  state = run_tsne(points, config);
              }
              std::vector<std::pair<std::size_t, double>> trace;
              for (const auto& k : state.kl_trace) trace.emplace_back(k.iteration, k.kl);
              return py::make_tuple(to_array(state.y), trace);
          },
          "Layout and (iteration, KL) trace.", py::arg("x"), py::arg("perplexity") = 30.0, py::arg("n_iter") = 1000,
          py::arg("theta") = 0.5, py::arg("seed") = 0, py::arg("pca_init") = false);

    m.def("knn_label_agreement",
          [](const Array& y, const std::vector<std::string>& labels, std::size_t k) {
              return knn_label_agreement(to_matrix(y), labels, k);
          },
          py::arg("y"), py::arg("labels"), py::arg("k") = 10);

    m.def("grid_occupancy", [](const Array& y, std::size_t cells) { return grid_occupancy(to_matrix(y), cells); },
          py::arg("y"), py::arg("cells") = 20);

    m.def("make_bundle",
          [](const Array& y, const Corpus& corpus, const std::vector<std::string>& schemes, const std::string& created) {
              std::vector<LabelScheme> parsed;
              for (const auto& s : schemes) parsed.push_back(LabelScheme::parse(s));
              return serialize_bundle(make_bundle(to_matrix(y), corpus, parsed, nlohmann::json::object(), {}, created));
          },
          "Canonical bundle JSON text.", py::arg("y"), py::arg("corpus"),
          py::arg("schemes") = std::vector<std::string>{"institution"}, py::arg("created") = "");

    m.def("normalize_bundle", [](const std::string& text) { return serialize_bundle(parse_bundle(text)); },
          "Parse and re-serialize; raises FormatError naming the bad field.", py::arg("text"));

    m.def("render_svg",
          [](const std::string& bundle, const std::string& scheme, std::size_t width) {
              SvgOptions options;
              options.width_px = width;
              return render_svg(parse_bundle(bundle), scheme, options);
          },
          py::arg("bundle"), py::arg("scheme") = "institution", py::arg("width") = 900);

    m.def("run_cli",
          [](const std::vector<std::string>& args) {
              std::vector<const char*> argv{"korpusmap"};
              for (const auto& a : args) argv.push_back(a.c_str());
              std::ostringstream out, err;
              const int status = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
              return py::make_tuple(status, out.str(), err.str());
          },
          "Run the command-line tool in process; returns (status, stdout, stderr).", py::arg("args"));
}
