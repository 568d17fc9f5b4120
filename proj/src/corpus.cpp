#include "korpusmap/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <random>
#include <unordered_set>

#include <json.hpp>

#include "korpusmap/error.hpp"
#include "korpusmap/textio.hpp"
#include "korpusmap/utf8.hpp"

namespace korpusmap {

using nlohmann::json;

namespace {

constexpr std::string_view kInstitutionNames[] = {
    "SupremeCourt", "ConstitutionalTribunal", "CommonCourt", "NationalAppealChamber", "Other",
};

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

bool is_iso_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
    for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    const int year = std::stoi(std::string(s.substr(0, 4)));
    const int month = std::stoi(std::string(s.substr(5, 2)));
    const int day = std::stoi(std::string(s.substr(8, 2)));
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return day <= kDays[month - 1] + ((month == 2 && leap) ? 1 : 0);
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
    throw FormatError("line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> normalize_keywords(const std::vector<std::string>& raw) {
    std::vector<std::string> out;
    for (const auto& k : raw) {
        std::string lower = utf8::to_lower(utf8::trim(k));
        if (lower.empty()) continue;
        if (std::find(out.begin(), out.end(), lower) == out.end()) out.push_back(std::move(lower));
    }
    return out;
}

}  // namespace

std::string_view to_string(Institution institution) {
    return kInstitutionNames[static_cast<std::size_t>(institution)];
}

std::optional<Institution> parse_institution(std::string_view name) {
    for (std::size_t i = 0; i < std::size(kInstitutionNames); ++i)
        if (iequals(name, kInstitutionNames[i])) return static_cast<Institution>(i);
    return std::nullopt;
}

Document parse_document(std::string_view json_line, std::size_t line, LoadReport* report) {
    json record;
    try {
        record = json::parse(json_line);
    } catch (const json::parse_error& e) {
        fail_line(line, std::string("invalid JSON: ") + e.what());
    }
    if (!record.is_object()) fail_line(line, "record is not an object");

    auto require_string = [&](const char* field) -> std::string {
        const auto it = record.find(field);
        if (it == record.end()) fail_line(line, std::string("missing field \"") + field + "\"");
        if (!it->is_string()) fail_line(line, std::string("field \"") + field + "\" is not a string");
        return it->get<std::string>();
    };

    Document doc;
    doc.id = require_string("id");
    if (utf8::trim(doc.id).empty()) fail_line(line, "empty \"id\"");

    const std::string institution = require_string("institution");
    if (auto parsed = parse_institution(institution)) {
        doc.institution = *parsed;
    } else {
        doc.institution = Institution::Other;
        if (report) ++report->unknown_institutions;
    }

    const auto kw = record.find("keywords");
    if (kw == record.end()) fail_line(line, "missing field \"keywords\"");
    if (!kw->is_array()) fail_line(line, "field \"keywords\" is not an array");
    std::vector<std::string> raw;
    for (const auto& k : *kw) {
        if (!k.is_string()) fail_line(line, "field \"keywords\" holds a non-string");
        raw.push_back(k.get<std::string>());
    }
    doc.keywords = normalize_keywords(raw);

    if (const auto d = record.find("date"); d != record.end() && !d->is_null()) {
        if (!d->is_string() || !is_iso_date(d->get<std::string>()))
            fail_line(line, "field \"date\" is not an ISO-8601 calendar date");
        doc.date = d->get<std::string>();
    }

    doc.text = require_string("text");
    if (utf8::trim(doc.text).empty()) fail_line(line, "empty \"text\"");
    return doc;
}

Corpus load_jsonl(const std::filesystem::path& path, LoadReport* report) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read corpus file " + path.string());
    Corpus corpus;
    corpus.provenance = path.string();
    std::unordered_set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (utf8::trim(line).empty()) continue;
        Document doc = parse_document(line, line_no, report);
        if (!ids.insert(doc.id).second) fail_line(line_no, "duplicate id \"" + doc.id + "\"");
        corpus.documents.push_back(std::move(doc));
    }
    if (in.bad()) throw Error("read error in " + path.string());
    return corpus;
}

std::string to_jsonl_line(const Document& doc) {
    json record = json::object();
    record["id"] = doc.id;
    record["institution"] = std::string(to_string(doc.institution));
    record["keywords"] = doc.keywords;
    if (doc.date) record["date"] = *doc.date;
    record["text"] = doc.text;
    return record.dump(-1, ' ', false, json::error_handler_t::replace);
}

void save_jsonl(const Corpus& corpus, const std::filesystem::path& path) {
    std::string out;
    for (const auto& doc : corpus.documents) {
        out += to_jsonl_line(doc);
        out += '\n';
    }
    write_file_atomic(path, out);
}

void validate(const Corpus& corpus) {
    std::unordered_set<std::string> ids;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        const auto& doc = corpus.documents[i];
        const std::string where = "document " + std::to_string(i);
        if (utf8::trim(doc.id).empty()) throw FormatError(where + ": empty id");
        if (!ids.insert(doc.id).second) throw FormatError(where + ": duplicate id \"" + doc.id + "\"");
        if (utf8::trim(doc.text).empty()) throw FormatError(where + ": empty text");
        if (doc.date && !is_iso_date(*doc.date)) throw FormatError(where + ": invalid date");
    }
}

LabelScheme LabelScheme::by_institution() { return LabelScheme{}; }

LabelScheme LabelScheme::by_keyword(std::vector<std::string> keywords) {
    LabelScheme scheme;
    scheme.kind_ = Kind::ByKeyword;
    scheme.keywords_ = normalize_keywords(keywords);
    if (scheme.keywords_.empty()) throw PreconditionError("keyword scheme needs at least one keyword");
    return scheme;
}

LabelScheme LabelScheme::parse(std::string_view spec) {
    spec = utf8::trim(spec);
    if (spec == "institution") return by_institution();
    constexpr std::string_view kPrefix = "keyword:";
    if (spec.substr(0, kPrefix.size()) == kPrefix) {
        std::vector<std::string> keywords;
        std::string_view rest = spec.substr(kPrefix.size());
        while (!rest.empty()) {
            const auto comma = rest.find(',');
            keywords.emplace_back(rest.substr(0, comma));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
        }
        return by_keyword(std::move(keywords));
    }
    throw PreconditionError("unknown label scheme \"" + std::string(spec) +
                            "\" (expected \"institution\" or \"keyword:a,b,...\")");
}

std::string LabelScheme::name() const {
    if (kind_ == Kind::ByInstitution) return "institution";
    std::string out = "keyword:";
    for (std::size_t i = 0; i < keywords_.size(); ++i) {
        if (i) out += ',';
        out += keywords_[i];
    }
    return out;
}

std::string LabelScheme::label_of(const Document& doc) const {
    if (kind_ == Kind::ByInstitution) return std::string(to_string(doc.institution));
    for (const auto& k : keywords_)
        if (std::find(doc.keywords.begin(), doc.keywords.end(), k) != doc.keywords.end()) return k;
    return std::string(kUnlabeled);
}

std::vector<std::string> LabelScheme::groups(const Corpus& corpus) const {
    if (kind_ == Kind::ByKeyword) return keywords_;
    std::vector<bool> present(std::size(kInstitutionNames), false);
    for (const auto& doc : corpus.documents) present[static_cast<std::size_t>(doc.institution)] = true;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < present.size(); ++i)
        if (present[i]) out.emplace_back(kInstitutionNames[i]);
    return out;
}

std::vector<std::string> labels_of(const Corpus& corpus, const LabelScheme& scheme) {
    std::vector<std::string> labels;
    labels.reserve(corpus.size());
    for (const auto& doc : corpus.documents) labels.push_back(scheme.label_of(doc));
    return labels;
}

Corpus sample_stratified(const Corpus& corpus, const LabelScheme& scheme, std::size_t per_group,
                         std::uint64_t seed) {
    const auto labels = labels_of(corpus, scheme);
    const auto groups = scheme.groups(corpus);

    std::vector<std::vector<std::size_t>> members(groups.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const auto it = std::find(groups.begin(), groups.end(), labels[i]);
        if (it != groups.end()) members[static_cast<std::size_t>(it - groups.begin())].push_back(i);
    }
    for (std::size_t g = 0; g < groups.size(); ++g)
        if (members[g].size() < per_group)
            throw PreconditionError("group \"" + groups[g] + "\" has " + std::to_string(members[g].size()) +
                                    " documents, fewer than the " + std::to_string(per_group) + " requested");

    std::mt19937_64 rng(seed);
    Corpus out;
    out.provenance = corpus.provenance;
    out.documents.reserve(per_group * groups.size());
    for (auto& group : members) {
        // Partial Fisher-Yates: the first per_group slots become a uniform
        // sample without replacement.
        for (std::size_t i = 0; i < per_group; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, group.size() - 1);
            std::swap(group[i], group[pick(rng)]);
        }
        std::sort(group.begin(), group.begin() + static_cast<std::ptrdiff_t>(per_group));
        for (std::size_t i = 0; i < per_group; ++i) out.documents.push_back(corpus.documents[group[i]]);
    }
    return out;
}

std::map<std::string, std::string> read_key_values(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot read config file " + path.string());
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto trimmed = utf8::trim(line);
        if (trimmed.empty() || trimmed.front() == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string_view::npos)
            throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected key = value");
        const std::string key(utf8::trim(trimmed.substr(0, eq)));
        if (key.empty()) throw FormatError(path.string() + ":" + std::to_string(line_no) + ": empty key");
        values[key] = std::string(utf8::trim(trimmed.substr(eq + 1)));
    }
    return values;
}

}  // namespace korpusmap
