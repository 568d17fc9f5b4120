#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace korpusmap {

enum class Institution {
    SupremeCourt,
    ConstitutionalTribunal,
    CommonCourt,
    NationalAppealChamber,
    Other,
};

std::string_view to_string(Institution institution);

/// Parses the canonical enum names (case-insensitive). Returns nullopt for
/// anything else; callers decide whether that maps to Other.
std::optional<Institution> parse_institution(std::string_view name);

struct Document {
    std::string id;
    Institution institution = Institution::Other;
    /// Lowercase, duplicate-free, in source order.
    std::vector<std::string> keywords;
    /// ISO-8601 calendar date (YYYY-MM-DD).
    std::optional<std::string> date;
    std::string text;
};

struct Corpus {
    std::vector<Document> documents;
    std::string provenance;

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
};

struct LoadReport {
    std::size_t unknown_institutions = 0;
};

/// Reads one JSON record per line. Blank lines are skipped. Throws
/// FormatError naming the 1-based line number on malformed records and on
/// duplicate ids.
Corpus load_jsonl(const std::filesystem::path& path, LoadReport* report = nullptr);

/// Parses a single record; `line` is used only for error messages.
Document parse_document(std::string_view json_line, std::size_t line, LoadReport* report = nullptr);

std::string to_jsonl_line(const Document& doc);

/// Writes the corpus in the same line format load_jsonl reads (atomic).
void save_jsonl(const Corpus& corpus, const std::filesystem::path& path);

/// Checks the Document/Corpus invariants (non-empty trimmed text, unique
/// ids, valid dates). Throws FormatError.
void validate(const Corpus& corpus);

inline constexpr std::string_view kUnlabeled = "unlabeled";

/// Maps documents to the labels used for coloring and evaluation. Labels
/// never feed into vectorization.
class LabelScheme {
public:
    enum class Kind { ByInstitution, ByKeyword };

    static LabelScheme by_institution();
    /// Documents take the first listed keyword they carry, else "unlabeled".
    static LabelScheme by_keyword(std::vector<std::string> keywords);
    /// Accepts "institution" or "keyword:a,b,c".
    static LabelScheme parse(std::string_view spec);

    Kind kind() const { return kind_; }
    const std::vector<std::string>& keywords() const { return keywords_; }
    /// Round-trips through parse().
    std::string name() const;
    std::string label_of(const Document& doc) const;

    /// Group labels in their canonical order: enum order of the institutions
    /// present in `corpus`, or the listed keyword order.
    std::vector<std::string> groups(const Corpus& corpus) const;

    bool operator==(const LabelScheme&) const = default;

private:
    Kind kind_ = Kind::ByInstitution;
    std::vector<std::string> keywords_;
};

std::vector<std::string> labels_of(const Corpus& corpus, const LabelScheme& scheme);

/// Draws exactly per_group documents from every labeled group without
/// replacement. Output is ordered by group, and within a group by original
/// corpus position. Throws PreconditionError naming an undersized group.
Corpus sample_stratified(const Corpus& corpus, const LabelScheme& scheme, std::size_t per_group,
                         std::uint64_t seed);

/// Field mapping and paging parameters for a SAOS-style JSON search API.
///
/// Loaded from a key-value file:
///
///     endpoint = https://www.saos.org.pl/api/search/judgments
///     page_size_param = pageSize
///     page_param = pageNumber
///     page_size = 100
///     items = items
///     field.id = id
///     field.institution = courtType
///     field.keywords = keywords
///     field.date = judgmentDate
///     field.text = textContent
///     institution.SUPREME = SupremeCourt
///     query.sortingField = JUDGMENT_DATE
///
/// Field values are dotted paths into each item object.
struct RemoteConfig {
    std::string endpoint;
    std::string page_size_param = "pageSize";
    std::string page_param = "pageNumber";
    std::size_t page_size = 100;
    std::size_t first_page = 0;
    std::string items_path = "items";
    std::string id_field = "id";
    std::string institution_field = "institution";
    std::string keywords_field = "keywords";
    std::string date_field = "date";
    std::string text_field = "text";
    std::map<std::string, std::string> institution_values;
    std::map<std::string, std::string> extra_query;
    int retries = 3;
    std::chrono::milliseconds backoff{250};
    std::chrono::seconds timeout{30};

    static RemoteConfig from_key_values(const std::map<std::string, std::string>& values);
    static RemoteConfig load(const std::filesystem::path& path);
};

struct FetchReport {
    std::size_t pages = 0;
    std::size_t retries = 0;
    std::size_t unknown_institutions = 0;
    /// Set when the remote ran out of records before `limit`.
    bool partial = false;
};

/// Pages through the endpoint until `limit` documents are collected or a
/// short page signals the end. Every page request is retried with
/// exponential backoff. Throws RemoteError.
Corpus fetch_remote(const RemoteConfig& config, std::size_t limit, FetchReport* report = nullptr);

/// Parses a `key = value` file; `#` starts a comment line.
std::map<std::string, std::string> read_key_values(const std::filesystem::path& path);

}  // namespace korpusmap
