#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <thread>
#include <unordered_set>

#include <json.hpp>

#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"

namespace korpusmap {

using nlohmann::json;

namespace {

struct Url {
    std::string origin;  // scheme://host[:port]
    std::string path;
    httplib::Params query;
};

Url parse_url(const std::string& url) {
    const auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw RemoteError("endpoint is not an absolute URL: " + url);
    const std::string scheme = url.substr(0, scheme_end);
    if (scheme != "http" && scheme != "https") throw RemoteError("unsupported URL scheme: " + scheme);
    const auto path_start = url.find('/', scheme_end + 3);
    Url out;
    out.origin = url.substr(0, path_start);
    std::string rest = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (const auto q = rest.find('?'); q != std::string::npos) {
        httplib::detail::parse_query_text(rest.substr(q + 1), out.query);
        rest.resize(q);
    }
    out.path = rest.empty() ? "/" : rest;
    return out;
}

const json* lookup(const json& object, const std::string& dotted) {
    const json* node = &object;
    std::size_t start = 0;
    while (true) {
        const auto dot = dotted.find('.', start);
        const std::string key = dotted.substr(start, dot - start);
        if (!node->is_object()) return nullptr;
        const auto it = node->find(key);
        if (it == node->end()) return nullptr;
        node = &*it;
        if (dot == std::string::npos) return node;
        start = dot + 1;
    }
}

std::string scalar_text(const json& value) {
    if (value.is_string()) return value.get<std::string>();
    if (value.is_number_integer() || value.is_number_unsigned()) return value.dump();
    if (value.is_number()) return value.dump();
    throw RemoteError("expected a string or number");
}

json map_item(const json& item, const RemoteConfig& config, std::size_t page, std::size_t index,
              std::size_t& unknown_institutions) {
    const std::string where = "page " + std::to_string(page) + " item " + std::to_string(index);
    auto required = [&](const std::string& path) -> const json& {
        const json* v = lookup(item, path);
        if (!v || v->is_null()) throw RemoteError(where + ": missing field \"" + path + "\"");
        return *v;
    };

    json record = json::object();
    try {
        record["id"] = scalar_text(required(config.id_field));
        record["text"] = scalar_text(required(config.text_field));
    } catch (const RemoteError&) {
        throw;
    } catch (const std::exception&) {
        throw RemoteError(where + ": field has an unexpected type");
    }

    std::string institution = "Other";
    if (const json* v = lookup(item, config.institution_field); v && v->is_string()) {
        const std::string raw = v->get<std::string>();
        if (const auto it = config.institution_values.find(raw); it != config.institution_values.end())
            institution = it->second;
        else if (parse_institution(raw))
            institution = raw;
        else
            ++unknown_institutions;
    } else {
        ++unknown_institutions;
    }
    record["institution"] = institution;

    json keywords = json::array();
    if (const json* v = lookup(item, config.keywords_field); v && !v->is_null()) {
        if (!v->is_array()) throw RemoteError(where + ": field \"" + config.keywords_field + "\" is not an array");
        for (const auto& k : *v)
            if (k.is_string()) keywords.push_back(k);
    }
    record["keywords"] = keywords;

    if (const json* v = lookup(item, config.date_field); v && v->is_string()) record["date"] = *v;
    return record;
}

std::size_t parse_count(const std::map<std::string, std::string>& values, const std::string& key,
                        std::size_t fallback) {
    const auto it = values.find(key);
    if (it == values.end()) return fallback;
    try {
        std::size_t used = 0;
        const long long v = std::stoll(it->second, &used);
        if (used != it->second.size() || v < 0) throw std::invalid_argument(key);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw FormatError("remote config: \"" + key + "\" must be a non-negative integer");
    }
}

}  // namespace

RemoteConfig RemoteConfig::from_key_values(const std::map<std::string, std::string>& values) {
    RemoteConfig config;
    for (const auto& [key, value] : values) {
        if (key == "endpoint") config.endpoint = value;
        else if (key == "page_size_param") config.page_size_param = value;
        else if (key == "page_param") config.page_param = value;
        else if (key == "items") config.items_path = value;
        else if (key == "field.id") config.id_field = value;
        else if (key == "field.institution") config.institution_field = value;
        else if (key == "field.keywords") config.keywords_field = value;
        else if (key == "field.date") config.date_field = value;
        else if (key == "field.text") config.text_field = value;
        else if (key.rfind("institution.", 0) == 0) {
            if (!parse_institution(value))
                throw FormatError("remote config: \"" + key + "\" maps to unknown institution \"" + value + "\"");
            config.institution_values[key.substr(12)] = value;
        } else if (key.rfind("query.", 0) == 0) config.extra_query[key.substr(6)] = value;
        else if (key != "page_size" && key != "first_page" && key != "retries" && key != "backoff_ms" &&
                 key != "timeout_s")
            throw FormatError("remote config: unknown key \"" + key + "\"");
    }
    config.page_size = parse_count(values, "page_size", config.page_size);
    config.first_page = parse_count(values, "first_page", config.first_page);
    config.retries = static_cast<int>(parse_count(values, "retries", static_cast<std::size_t>(config.retries)));
    config.backoff = std::chrono::milliseconds(parse_count(values, "backoff_ms", config.backoff.count()));
    config.timeout = std::chrono::seconds(parse_count(values, "timeout_s", config.timeout.count()));
    if (config.page_size == 0) throw FormatError("remote config: page_size must be positive");
    return config;
}

RemoteConfig RemoteConfig::load(const std::filesystem::path& path) {
    return from_key_values(read_key_values(path));
}

Corpus fetch_remote(const RemoteConfig& config, std::size_t limit, FetchReport* report) {
    FetchReport local;
    FetchReport& rep = report ? *report : local;
    rep = {};
    Corpus corpus;
    corpus.provenance = config.endpoint;
    if (limit == 0) return corpus;

    const Url url = parse_url(config.endpoint);
    httplib::Client client(url.origin);
    client.set_connection_timeout(config.timeout);
    client.set_read_timeout(config.timeout);
    client.set_follow_location(true);

    std::unordered_set<std::string> ids;
    for (std::size_t page = config.first_page;; ++page) {
        httplib::Params params = url.query;
        for (const auto& [k, v] : config.extra_query) params.emplace(k, v);
        params.emplace(config.page_size_param, std::to_string(config.page_size));
        params.emplace(config.page_param, std::to_string(page));
        const std::string target = httplib::append_query_params(url.path, params);

        httplib::Result result{nullptr, httplib::Error::Unknown};
        std::string failure;
        for (int attempt = 0;; ++attempt) {
            result = client.Get(target);
            if (result && result->status == 200) break;
            failure = result ? "HTTP " + std::to_string(result->status) : httplib::to_string(result.error());
            if (attempt >= config.retries)
                throw RemoteError("GET " + config.endpoint + " page " + std::to_string(page) + " failed after " +
                                  std::to_string(attempt + 1) + " attempts: " + failure);
            ++rep.retries;
            std::this_thread::sleep_for(config.backoff * (1LL << std::min(attempt, 16)));
        }
        ++rep.pages;

        json body;
        try {
            body = json::parse(result->body);
        } catch (const json::parse_error&) {
            throw RemoteError("page " + std::to_string(page) + ": response is not JSON");
        }
        const json* items = lookup(body, config.items_path);
        if (!items) throw RemoteError("page " + std::to_string(page) + ": missing field \"" + config.items_path + "\"");
        if (!items->is_array())
            throw RemoteError("page " + std::to_string(page) + ": field \"" + config.items_path + "\" is not an array");

        for (std::size_t i = 0; i < items->size() && corpus.size() < limit; ++i) {
            const json record = map_item((*items)[i], config, page, i, rep.unknown_institutions);
            Document doc;
            try {
                doc = parse_document(record.dump(), i + 1);
            } catch (const FormatError& e) {
                throw RemoteError("page " + std::to_string(page) + " item " + std::to_string(i) + ": " + e.what());
            }
            if (!ids.insert(doc.id).second) continue;
            corpus.documents.push_back(std::move(doc));
        }
        if (corpus.size() >= limit) break;
        if (items->size() < config.page_size) {
            rep.partial = true;
            break;
        }
    }
    return corpus;
}

}  // namespace korpusmap
