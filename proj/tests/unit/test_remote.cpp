#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <doctest.h>

#include <atomic>
#include <thread>

#include <json.hpp>

#include "korpusmap/corpus.hpp"
#include "korpusmap/error.hpp"
#include "korpusmap/textio.hpp"
#include "scratch.hpp"

using namespace korpusmap;
using nlohmann::json;

namespace {

// Local stand-in for a SAOS-style search API: `pages` full pages of
// `page_size` judgments, then empty pages.
class MockApi {
public:
    MockApi(std::size_t pages, std::size_t page_size) : pages_(pages), page_size_(page_size) {
        server_.Get("/api/search", [this](const httplib::Request& req, httplib::Response& res) {
            ++requests_;
            if (fail_first_ > 0) {
                --fail_first_;
                res.status = 503;
                return;
            }
            const std::size_t page = std::stoul(req.get_param_value("pageNumber"));
            const std::size_t size = std::stoul(req.get_param_value("pageSize"));
            last_query_ = req.get_param_value("sortingField");
            json items = json::array();
            if (page < pages_)
                for (std::size_t i = 0; i < size; ++i) {
                    const std::size_t n = page * size + i;
                    json item = {{"id", n},
                                 {"courtType", n % 2 ? "SUPREME" : "COMMON"},
                                 {"keywords", {"Emerytura"}},
                                 {"judgmentDate", "2014-01-0" + std::to_string(1 + n % 9)},
                                 {"content", {{"text", "Wyrok numer " + std::to_string(n)}}}};
                    if (malformed_) item.erase("content");
                    items.push_back(item);
                }
            res.set_content(json{{"items", items}}.dump(), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~MockApi() {
        server_.stop();
        thread_.join();
    }

    RemoteConfig config() const {
        RemoteConfig c = RemoteConfig::from_key_values({
            {"endpoint", "http://127.0.0.1:" + std::to_string(port_) + "/api/search"},
            {"page_size", std::to_string(page_size_)},
            {"field.institution", "courtType"},
            {"field.date", "judgmentDate"},
            {"field.text", "content.text"},
            {"institution.SUPREME", "SupremeCourt"},
            {"institution.COMMON", "CommonCourt"},
            {"query.sortingField", "JUDGMENT_DATE"},
            {"backoff_ms", "1"},
        });
        return c;
    }

    int requests() const { return requests_; }
    void fail_first(int n) { fail_first_ = n; }
    void malformed() { malformed_ = true; }
    const std::string& last_query() const { return last_query_; }

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
    std::size_t pages_;
    std::size_t page_size_;
    std::atomic<int> requests_{0};
    std::atomic<int> fail_first_{0};
    std::atomic<bool> malformed_{false};
    std::string last_query_;
};

}  // namespace

TEST_SUITE("remote") {

TEST_CASE("two pages of five with limit 7 give seven documents") {
    MockApi api(2, 5);
    FetchReport report;
    const Corpus c = fetch_remote(api.config(), 7, &report);
    REQUIRE(c.size() == 7);
    for (std::size_t i = 0; i < 7; ++i) CHECK(c.documents[i].id == std::to_string(i));
    CHECK(c.documents[0].institution == Institution::CommonCourt);
    CHECK(c.documents[1].institution == Institution::SupremeCourt);
    CHECK(c.documents[0].keywords == std::vector<std::string>{"emerytura"});
    CHECK(c.documents[2].date == "2014-01-03");
    CHECK(c.documents[6].text == "Wyrok numer 6");
    CHECK(report.pages == 2);
    CHECK_FALSE(report.partial);
    CHECK(api.last_query() == "JUDGMENT_DATE");
}

TEST_CASE("running out of records returns a partial corpus") {
    MockApi api(2, 5);
    FetchReport report;
    const Corpus c = fetch_remote(api.config(), 50, &report);
    CHECK(c.size() == 10);
    CHECK(report.partial);
    CHECK(report.pages == 3);
}

TEST_CASE("failed requests are retried") {
    MockApi api(1, 5);
    api.fail_first(2);
    FetchReport report;
    const Corpus c = fetch_remote(api.config(), 5, &report);
    CHECK(c.size() == 5);
    CHECK(report.retries == 2);
    CHECK(api.requests() == 3);
}

TEST_CASE("persistent failure raises after the configured retries") {
    MockApi api(1, 5);
    api.fail_first(100);
    RemoteConfig config = api.config();
    config.retries = 2;
    CHECK_THROWS_AS(fetch_remote(config, 5), RemoteError);
    CHECK(api.requests() == 3);
}

TEST_CASE("malformed payload names the missing field") {
    MockApi api(1, 5);
    api.malformed();
    try {
        fetch_remote(api.config(), 5);
        FAIL("expected a mapping error");
    } catch (const RemoteError& e) {
        CHECK(std::string(e.what()).find("content.text") != std::string::npos);
    }
}

TEST_CASE("limit 0 makes no request") {
    MockApi api(1, 5);
    CHECK(fetch_remote(api.config(), 0).empty());
    CHECK(api.requests() == 0);
}

TEST_CASE("unreachable endpoint fails") {
    RemoteConfig config;
    config.endpoint = "http://127.0.0.1:1/api";
    config.retries = 1;
    config.backoff = std::chrono::milliseconds(1);
    config.timeout = std::chrono::seconds(2);
    CHECK_THROWS_AS(fetch_remote(config, 3), RemoteError);
}

TEST_CASE("mapping config file parsing") {
    const auto dir = scratch_dir("remote-config");
    write_file_atomic(dir / "saos.conf",
                      "# SAOS judgments\n"
                      "endpoint = https://www.saos.org.pl/api/search/judgments\n"
                      "page_size = 50\n"
                      "field.text = textContent\n"
                      "institution.SUPREME = SupremeCourt\n");
    const RemoteConfig c = RemoteConfig::load(dir / "saos.conf");
    CHECK(c.endpoint == "https://www.saos.org.pl/api/search/judgments");
    CHECK(c.page_size == 50);
    CHECK(c.text_field == "textContent");
    CHECK(c.institution_values.at("SUPREME") == "SupremeCourt");
    CHECK_THROWS_AS(RemoteConfig::from_key_values({{"colour", "red"}}), FormatError);
    CHECK_THROWS_AS(RemoteConfig::from_key_values({{"institution.X", "Court"}}), FormatError);
    CHECK_THROWS_AS(RemoteConfig::from_key_values({{"page_size", "0"}}), FormatError);
}

}
