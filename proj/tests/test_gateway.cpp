#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "support/generators.hpp"
#include "topseg/embeddings.hpp"
#include "topseg/gateway.hpp"

using namespace topseg;
using json = nlohmann::json;

namespace {

ChatRequest simple_request(const std::string& content) {
    ChatRequest req;
    req.system = "system text";
    req.messages.push_back({Role::user, content});
    return req;
}

// Local chat-completions server whose handler the test controls.
struct LocalServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;

    explicit LocalServer(httplib::Server::Handler handler) {
        server.Post("/v1/chat/completions", std::move(handler));
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~LocalServer() {
        server.stop();
        thread.join();
    }

    ProviderConfig config() const {
        ProviderConfig cfg;
        cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions";
        cfg.model = "test-model";
        cfg.retries = 3;
        cfg.backoff_seconds = 0.01;
        cfg.timeout_seconds = 5.0;
        return cfg;
    }
};

std::string completion_body(const std::string& content) {
    json body = {{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
    return body.dump();
}

} // namespace

TEST_SUITE("gateway") {

TEST_CASE("parse_index_list extracts, sorts and deduplicates") {
    auto r = parse_index_list("7, 13", 16);
    CHECK(r.indices == std::vector<std::size_t>{7, 13});
    CHECK(r.dropped_out_of_range == 0);
    CHECK(r.dropped_duplicates == 0);
    CHECK_FALSE(r.runaway_detected);

    auto messy = parse_index_list("3, 3, 1, 99", 10);
    CHECK(messy.indices == std::vector<std::size_t>{1, 3});
    CHECK(messy.dropped_out_of_range == 1);
    CHECK(messy.dropped_duplicates == 1);
}

TEST_CASE("empty forms mean no boundaries") {
    CHECK(parse_index_list("", 10).indices.empty());
    CHECK(parse_index_list("none", 10).indices.empty());
    CHECK(parse_index_list("None.", 10).indices.empty());
    CHECK(parse_index_list("[]", 10).indices.empty());
    CHECK_THROWS_AS(parse_index_list("I cannot segment this text", 10), NoIndicesError);
}

TEST_CASE("prose and brackets are tolerated") {
    auto r = parse_index_list("The boundaries are:\n[2, 5]\nHope that helps!", 10);
    CHECK(r.indices == std::vector<std::size_t>{2, 5});
}

TEST_CASE("strict mode rejects prose") {
    CHECK(parse_index_list("7, 13", 16, {}, true).indices == std::vector<std::size_t>{7, 13});
    CHECK(parse_index_list(" [1, 2] ", 16, {}, true).indices == std::vector<std::size_t>{1, 2});
    CHECK_THROWS_AS(parse_index_list("the answer is 7", 16, {}, true), MalformedResponseError);
    CHECK_THROWS_AS(parse_index_list("7 13", 16, {}, true), MalformedResponseError);
}

TEST_CASE("runaway fires on a regular pattern that exceeds the sentence count") {
    // The degenerate reply shape: a step-3 progression running past S=60.
    std::vector<unsigned long long> raw = {1, 15, 22};
    for (unsigned long long v = 76; v <= 124; v += 3) {
        raw.push_back(v);
    }
    CHECK(detect_runaway(raw, 60));

    std::string reply;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        reply += (i ? ", " : "") + std::to_string(raw[i]);
    }
    auto parsed = parse_index_list(reply, 60);
    CHECK(parsed.runaway_detected);
}

TEST_CASE("runaway needs both conditions") {
    std::vector<unsigned long long> in_range = {7, 13};
    CHECK_FALSE(detect_runaway(in_range, 16));
    // Regular but in range: regularity alone is not failure.
    std::vector<unsigned long long> regular = {2, 4, 6, 8, 10};
    CHECK_FALSE(detect_runaway(regular, 40));
    // Out of range but irregular.
    std::vector<unsigned long long> irregular = {3, 11, 90, 17, 41};
    CHECK_FALSE(detect_runaway(irregular, 40));
}

TEST_CASE("runaway thresholds are configurable") {
    std::vector<unsigned long long> raw = {30, 33, 36, 39, 42};
    CHECK(detect_runaway(raw, 40));
    RunawayConfig longer;
    longer.min_run = 6;
    CHECK_FALSE(detect_runaway(raw, 40, longer));
    RunawayConfig tight;
    tight.max_step = 2;
    CHECK_FALSE(detect_runaway(raw, 40, tight));
}

TEST_CASE("runaway never fires on random in-range replies") {
    std::mt19937_64 rng(47);
    for (int iter = 0; iter < 2000; ++iter) {
        std::size_t max_index = gen::pick(rng, 1, 80);
        auto seg = gen::random_segmentation(rng, max_index + 1, 0.5);
        std::vector<unsigned long long> raw(seg.boundaries().begin(), seg.boundaries().end());
        CHECK_FALSE(detect_runaway(raw, max_index));
    }
}

TEST_CASE("parse_single_index takes the first in-range integer") {
    CHECK(parse_single_index("3", 8).index == 3);
    CHECK(parse_single_index("5", 10).index == 5);
    auto r = parse_single_index("0 then maybe 4", 8);
    CHECK(r.index == 4);
    CHECK(r.skipped == 1);
    CHECK_THROWS_AS(parse_single_index("no idea", 8), NoValidIndexError);
    CHECK_THROWS_AS(parse_single_index("99", 8), NoValidIndexError);
}

TEST_CASE("canonical rendering round-trips") {
    std::mt19937_64 rng(53);
    for (int iter = 0; iter < 100; ++iter) {
        std::size_t max_index = gen::pick(rng, 1, 60);
        auto seg = gen::random_segmentation(rng, max_index + 1, 0.4);
        std::string rendered = format_index_list(seg.boundaries());
        auto parsed = parse_index_list(rendered, max_index);
        CHECK(parsed.indices == seg.boundaries());
        CHECK(parsed.dropped_out_of_range == 0);
        CHECK(parsed.dropped_duplicates == 0);
    }
}

TEST_CASE("parse output is always a valid boundary set") {
    std::mt19937_64 rng(59);
    const char* junk[] = {"1,2,3", "0 0 0", "999", "[5; 2; 5]", "a1b2c3", "12 out of 99 maybe 4"};
    for (const char* raw : junk) {
        std::size_t max_index = gen::pick(rng, 1, 10);
        IndexListResult r;
        try {
            r = parse_index_list(raw, max_index);
        } catch (const NoIndicesError&) {
            continue;
        }
        Segmentation seg(max_index + 1, r.indices); // throws if invalid
        CHECK(seg.num_sentences() == max_index + 1);
    }
}

TEST_CASE("mock provider matches rules in order and records a transcript") {
    MockChatProvider mock({{"cats", "1, 2"}, {"*", "7, 13"}});
    CHECK(mock.complete(simple_request("all about cats here")) == "1, 2");
    CHECK(mock.complete(simple_request("something else")) == "7, 13");
    auto transcript = mock.transcript();
    REQUIRE(transcript.size() == 2);
    CHECK(transcript[0].second == "1, 2");

    MockChatProvider twin({{"cats", "1, 2"}, {"*", "7, 13"}});
    twin.complete(simple_request("all about cats here"));
    twin.complete(simple_request("something else"));
    CHECK(twin.transcript() == transcript);
}

TEST_CASE("mock provider with no matching rule fails loudly") {
    MockChatProvider mock(std::vector<MockChatProvider::Rule>{{"cats", "1"}});
    CHECK_THROWS_AS(mock.complete(simple_request("dogs only")), TransportError);
}

TEST_CASE("http provider returns the assistant text") {
    LocalServer server([](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        CHECK(body.at("model") == "test-model");
        CHECK(body.at("temperature") == 0.0);
        CHECK(body.at("messages").at(0).at("role") == "system");
        res.set_content(completion_body("7, 13"), "application/json");
    });
    HttpChatProvider provider(server.config());
    CHECK(provider.complete(simple_request("segment this")) == "7, 13");
}

TEST_CASE("http provider retries transient failures then succeeds") {
    std::atomic<int> hits{0};
    LocalServer server([&hits](const httplib::Request&, httplib::Response& res) {
        int n = ++hits;
        if (n <= 2) {
            res.status = 503;
            return;
        }
        res.set_content(completion_body("ok"), "application/json");
    });
    HttpChatProvider provider(server.config());
    CHECK(provider.complete(simple_request("x")) == "ok");
    CHECK(hits.load() == 3);
}

TEST_CASE("http provider never retries auth failures") {
    std::atomic<int> hits{0};
    LocalServer server([&hits](const httplib::Request&, httplib::Response& res) {
        ++hits;
        res.status = 401;
    });
    HttpChatProvider provider(server.config());
    CHECK_THROWS_AS(provider.complete(simple_request("x")), AuthError);
    CHECK(hits.load() == 1);
}

TEST_CASE("http provider reports transport failure after retries exhaust") {
    ProviderConfig cfg;
    cfg.endpoint = "http://127.0.0.1:9/v1/chat/completions"; // nothing listens here
    cfg.model = "test-model";
    cfg.retries = 1;
    cfg.backoff_seconds = 0.01;
    cfg.timeout_seconds = 0.5;
    HttpChatProvider provider(cfg);
    CHECK_THROWS_AS(provider.complete(simple_request("x")), TransportError);
}

TEST_CASE("http provider flags malformed payloads") {
    LocalServer server([](const httplib::Request&, httplib::Response& res) {
        res.set_content("{\"unexpected\": true}", "application/json");
    });
    HttpChatProvider provider(server.config());
    CHECK_THROWS_AS(provider.complete(simple_request("x")), MalformedResponseError);
}

TEST_CASE("remote embedding endpoint round-trips vectors") {
    httplib::Server server;
    server.Post("/embed", [](const httplib::Request& req, httplib::Response& res) {
        auto body = json::parse(req.body);
        auto inputs = body.at("input").get<std::vector<std::string>>();
        json vectors = json::array();
        for (const auto& text : inputs) {
            vectors.push_back({static_cast<double>(text.size()), 1.0});
        }
        res.set_content(json{{"embeddings", vectors}}.dump(), "application/json");
    });
    int port = server.bind_to_any_port("127.0.0.1");
    std::thread thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();

    EmbeddingEndpointConfig cfg;
    cfg.endpoint = "http://127.0.0.1:" + std::to_string(port) + "/embed";
    cfg.retries = 1;
    cfg.backoff_seconds = 0.01;
    RemoteEmbeddingProvider provider(cfg);
    std::vector<std::string> texts = {"abc", "defgh"};
    auto vectors = provider.embed("doc", 1, texts);
    REQUIRE(vectors.size() == 2);
    CHECK(vectors[0] == std::vector<float>{3.0f, 1.0f});
    CHECK(vectors[1] == std::vector<float>{5.0f, 1.0f});
    CHECK(provider.dimension() == 2);

    server.stop();
    thread.join();
}

TEST_CASE("bearer token comes from the named environment variable") {
    std::string seen_auth;
    LocalServer server([&seen_auth](const httplib::Request& req, httplib::Response& res) {
        seen_auth = req.get_header_value("Authorization");
        res.set_content(completion_body("ok"), "application/json");
    });
    auto cfg = server.config();
    cfg.auth_env = "TOPSEG_TEST_TOKEN";
    unsetenv("TOPSEG_TEST_TOKEN");
    HttpChatProvider provider(cfg);
    CHECK_THROWS_AS(provider.complete(simple_request("x")), AuthError);

    setenv("TOPSEG_TEST_TOKEN", "sekrit", 1);
    CHECK(provider.complete(simple_request("x")) == "ok");
    CHECK(seen_auth == "Bearer sekrit");
    unsetenv("TOPSEG_TEST_TOKEN");
}

} // TEST_SUITE
