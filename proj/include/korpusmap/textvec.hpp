#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "korpusmap/corpus.hpp"
#include "korpusmap/matrix.hpp"

namespace korpusmap {

/// Splits text into lowercase letter runs.
///
/// A token candidate is a maximal run of letters and digits (any script).
/// Candidates containing a digit are dropped, as are candidates shorter than
/// two code points and configured stopwords.
class Tokenizer {
public:
    Tokenizer() = default;
    explicit Tokenizer(std::unordered_set<std::string> stopwords);

    /// One token per line, lines starting with '#' ignored. Entries are
    /// lowercased.
    static Tokenizer with_stopword_file(const std::filesystem::path& path);

    std::vector<std::string> operator()(std::string_view text) const;

    const std::unordered_set<std::string>& stopwords() const { return stopwords_; }

private:
    std::unordered_set<std::string> stopwords_;
};

std::vector<std::string> tokenize(std::string_view text);

struct Vocabulary {
    /// Lexicographically sorted (byte order); position is the column index.
    std::vector<std::string> terms;
    std::vector<std::size_t> df;
    std::size_t n_docs = 0;

    std::size_t size() const { return terms.size(); }
    std::optional<std::size_t> index_of(std::string_view term) const;
    double idf(std::size_t column) const;

    void rebuild_index();

private:
    std::unordered_map<std::string, std::size_t> index_;
};

struct VocabularyOptions {
    std::size_t min_df = 1;
    double max_df_ratio = 1.0;
    std::size_t max_terms = 20000;
};

/// Throws PreconditionError on an empty corpus or when no term survives the
/// document-frequency filters.
Vocabulary build_vocabulary(const Corpus& corpus, const Tokenizer& tokenizer,
                            const VocabularyOptions& options = {});

struct VectorizeReport {
    /// Rows with no in-vocabulary terms; they stay empty.
    std::vector<std::size_t> empty_rows;
};

/// Raw term counts times smoothed idf, ln((1 + n) / (1 + df)) + 1, then each
/// row scaled to unit L2 norm.
DocTermMatrix vectorize_tfidf(const Corpus& corpus, const Vocabulary& vocab, const Tokenizer& tokenizer,
                              VectorizeReport* report = nullptr);

/// `term df` per line, in column order, preceded by a `# n_docs N` line.
void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

}  // namespace korpusmap
