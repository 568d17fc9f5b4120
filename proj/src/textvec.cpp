#include "korpusmap/textvec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <unicode/uchar.h>

#include "korpusmap/error.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/utf8.hpp"

namespace korpusmap {

Tokenizer::Tokenizer(std::unordered_set<std::string> stopwords) {
    for (const auto& w : stopwords) stopwords_.insert(utf8::to_lower(w));
}

Tokenizer Tokenizer::with_stopword_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read stopword file " + path.string());
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        const auto word = utf8::trim(line);
        if (word.empty() || word.front() == '#') continue;
        words.emplace(word);
    }
    return Tokenizer(std::move(words));
}

std::vector<std::string> Tokenizer::operator()(std::string_view text) const {
    std::vector<std::string> tokens;
    const auto cps = utf8::decode(text);
    std::size_t i = 0;
    while (i < cps.size()) {
        const auto is_word_char = [&](char32_t c) {
            return u_isalpha(static_cast<UChar32>(c)) || u_isdigit(static_cast<UChar32>(c));
        };
        if (!is_word_char(cps[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        bool has_digit = false;
        while (j < cps.size() && is_word_char(cps[j])) {
            has_digit = has_digit || u_isdigit(static_cast<UChar32>(cps[j]));
            ++j;
        }
        if (!has_digit && j - i >= 2) {
            std::vector<char32_t> run(cps.begin() + static_cast<std::ptrdiff_t>(i),
                                      cps.begin() + static_cast<std::ptrdiff_t>(j));
            for (auto& c : run) c = static_cast<char32_t>(u_tolower(static_cast<UChar32>(c)));
            std::string token = utf8::encode(run);
            if (!stopwords_.contains(token)) tokens.push_back(std::move(token));
        }
        i = j;
    }
    return tokens;
}

std::vector<std::string> tokenize(std::string_view text) { return Tokenizer{}(text); }

std::optional<std::size_t> Vocabulary::index_of(std::string_view term) const {
    const auto it = index_.find(std::string(term));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

double Vocabulary::idf(std::size_t column) const {
    return std::log((1.0 + static_cast<double>(n_docs)) / (1.0 + static_cast<double>(df[column]))) + 1.0;
}

void Vocabulary::rebuild_index() {
    index_.clear();
    for (std::size_t i = 0; i < terms.size(); ++i) index_.emplace(terms[i], i);
}

Vocabulary build_vocabulary(const Corpus& corpus, const Tokenizer& tokenizer, const VocabularyOptions& options) {
    if (corpus.empty()) throw PreconditionError("cannot build a vocabulary from an empty corpus");
    if (!(options.max_df_ratio > 0.0 && options.max_df_ratio <= 1.0))
        throw PreconditionError("max_df_ratio must lie in (0, 1]");

    std::map<std::string, std::size_t> df;
    for (const auto& doc : corpus.documents) {
        auto tokens = tokenizer(doc.text);
        std::sort(tokens.begin(), tokens.end());
        tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());
        for (auto& t : tokens) ++df[std::move(t)];
    }

    const double n = static_cast<double>(corpus.size());
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [term, count] : df)
        if (count >= options.min_df && static_cast<double>(count) <= options.max_df_ratio * n)
            kept.emplace_back(term, count);

    if (kept.size() > options.max_terms) {
        std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
        kept.resize(options.max_terms);
        std::sort(kept.begin(), kept.end());
    }
    if (kept.empty()) throw PreconditionError("vocabulary is empty after document-frequency filtering");

    Vocabulary vocab;
    vocab.n_docs = corpus.size();
    for (auto& [term, count] : kept) {
        vocab.terms.push_back(std::move(term));
        vocab.df.push_back(count);
    }
    vocab.rebuild_index();
    return vocab;
}

DocTermMatrix vectorize_tfidf(const Corpus& corpus, const Vocabulary& vocab, const Tokenizer& tokenizer,
                              VectorizeReport* report) {
    if (vocab.n_docs == 0) throw PreconditionError("vocabulary was not fitted");
    std::vector<std::size_t> row_ptr{0};
    std::vector<std::uint32_t> cols;
    std::vector<double> weights;
    if (report) report->empty_rows.clear();

    std::map<std::size_t, std::size_t> counts;
    for (std::size_t r = 0; r < corpus.size(); ++r) {
        counts.clear();
        for (const auto& token : tokenizer(corpus.documents[r].text))
            if (const auto col = vocab.index_of(token)) ++counts[*col];

        const std::size_t start = weights.size();
        double norm2 = 0.0;
        for (const auto& [col, tf] : counts) {
            const double w = static_cast<double>(tf) * vocab.idf(col);
            cols.push_back(static_cast<std::uint32_t>(col));
            weights.push_back(w);
            norm2 += w * w;
        }
        if (counts.empty()) {
            if (report) report->empty_rows.push_back(r);
        } else {
            const double norm = std::sqrt(norm2);
            for (std::size_t e = start; e < weights.size(); ++e) weights[e] /= norm;
        }
        row_ptr.push_back(weights.size());
    }
    return DocTermMatrix(corpus.size(), vocab.size(), std::move(row_ptr), std::move(cols), std::move(weights));
}

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path) {
    std::string out = "# n_docs " + std::to_string(vocab.n_docs) + "\n";
    for (std::size_t i = 0; i < vocab.size(); ++i) out += vocab.terms[i] + ' ' + std::to_string(vocab.df[i]) + '\n';
    write_file_atomic(path, out);
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    Vocabulary vocab;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# n_docs ", 0) != 0)
        throw FormatError(path.string() + ": missing '# n_docs' header");
    vocab.n_docs = std::stoul(line.substr(9));
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto space = line.rfind(' ');
        if (space == std::string::npos) throw FormatError(path.string() + ": malformed line '" + line + "'");
        vocab.terms.push_back(line.substr(0, space));
        vocab.df.push_back(std::stoul(line.substr(space + 1)));
    }
    if (!std::is_sorted(vocab.terms.begin(), vocab.terms.end()))
        throw FormatError(path.string() + ": terms are not sorted");
    vocab.rebuild_index();
    return vocab;
}

}  // namespace korpusmap
