#include "kgmem/error.hpp"
#include "kgmem/provider.hpp"

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

using namespace kgmem;
using nlohmann::json;

namespace {

std::string fixture(const std::string& name) {
    std::ifstream in(std::string(KGMEM_TEST_DATA_DIR) + "/" + name);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ProviderErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const ProviderError& e) {
        return e.kind();
    }
    ADD_FAILURE() << "expected ProviderError";
    return ProviderErrorKind::InvalidRequest;
}

// Local stand-in for an OpenAI-compatible endpoint.
class FakeServer {
public:
    FakeServer() {
        server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
            ++chat_hits;
            last_body = req.body;
            last_auth = req.get_header_value("Authorization");
            if (delay_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(delay_ms));
            res.status = status;
            res.set_content(status == 200 ? fixture("chat_completion_response.json") : "{\"error\":\"nope\"}",
                            "application/json");
        });
        server_.Post("/v1/embeddings", [this](const httplib::Request& req, httplib::Response& res) {
            last_body = req.body;
            res.set_content(fixture("embedding_response.json"), "application/json");
        });
        port_ = server_.bind_to_any_port("127.0.0.1");
        thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
    }
    ~FakeServer() {
        server_.stop();
        thread_.join();
    }

    HttpProviderOptions options(std::size_t dim = 4) const {
        HttpProviderOptions o;
        o.base_url = "http://127.0.0.1:" + std::to_string(port_) + "/v1";
        o.api_key = "sk-test";
        o.chat_model = "test-chat";
        o.embed_model = "test-embed";
        o.embed_dim = dim;
        o.timeout = std::chrono::milliseconds(2000);
        return o;
    }

    std::atomic<int> chat_hits{0};
    std::atomic<int> status{200};
    std::atomic<int> delay_ms{0};
    std::string last_body;
    std::string last_auth;

private:
    httplib::Server server_;
    std::thread thread_;
    int port_ = 0;
};

ChatExchange exchange() {
    ChatExchange ex;
    ex.system_text = "sys";
    ex.user_text = "Extract facts: my shoes are under the bed";
    ex.max_output_tokens = 64;
    ex.temperature = 0.0;
    return ex;
}

}  // namespace

TEST(HttpWire, ParsesChatFixture) {
    const auto r = parse_chat_response(fixture("chat_completion_response.json"));
    EXPECT_EQ(r.text, "my shoes|are under|the bed");
    EXPECT_EQ(r.usage, (TokenUsage{87, 9, 96}));
}

TEST(HttpWire, ParsesEmbeddingFixture) {
    const auto e = parse_embedding_response(fixture("embedding_response.json"));
    EXPECT_EQ(e.values, (std::vector<double>{0.6, -0.8, 0.0, 0.0}));
}

TEST(HttpWire, MalformedBodies) {
    EXPECT_EQ(kind_of([] { parse_chat_response("not json"); }), ProviderErrorKind::MalformedResponse);
    EXPECT_EQ(kind_of([] { parse_chat_response("{}"); }), ProviderErrorKind::MalformedResponse);
    EXPECT_EQ(kind_of([] { parse_chat_response(R"({"choices":[]})"); }), ProviderErrorKind::MalformedResponse);
    EXPECT_EQ(kind_of([] { parse_embedding_response(R"({"data":[{"embedding":[]}]})"); }),
              ProviderErrorKind::MalformedResponse);
    EXPECT_EQ(kind_of([] { parse_embedding_response(R"({"data":[{"embedding":["x"]}]})"); }),
              ProviderErrorKind::MalformedResponse);
}

TEST(HttpProvider, RequestBodyShape) {
    HttpProvider p(HttpProviderOptions{});
    const auto body = json::parse(p.chat_request_body(exchange()));
    EXPECT_EQ(body["model"], "gpt-4.1-mini");
    EXPECT_EQ(body["max_tokens"], 64);
    ASSERT_EQ(body["messages"].size(), 2u);
    EXPECT_EQ(body["messages"][0]["role"], "system");
    EXPECT_EQ(body["messages"][1]["content"], "Extract facts: my shoes are under the bed");
    const auto eb = json::parse(p.embed_request_body("hello"));
    EXPECT_EQ(eb["input"], "hello");
    EXPECT_EQ(eb["model"], "text-embedding-ada-002");
}

TEST(HttpProvider, RoundTripAgainstLocalServer) {
    FakeServer server;
    HttpProvider p(server.options());
    const auto r = p.chat_complete(exchange());
    EXPECT_EQ(r.text, "my shoes|are under|the bed");
    EXPECT_EQ(server.last_auth, "Bearer sk-test");
    EXPECT_EQ(json::parse(server.last_body)["model"], "test-chat");
    EXPECT_EQ(p.embed("hello").values, (std::vector<double>{0.6, -0.8, 0.0, 0.0}));
    EXPECT_EQ(json::parse(server.last_body)["model"], "test-embed");
}

TEST(HttpProvider, ServerErrorsAreRetried) {
    FakeServer server;
    server.status = 503;
    auto opts = server.options();
    opts.max_retries = 2;
    HttpProvider p(opts);
    try {
        p.chat_complete(exchange());
        FAIL();
    } catch (const ProviderError& e) {
        EXPECT_EQ(e.kind(), ProviderErrorKind::HttpStatus);
        EXPECT_EQ(e.http_status(), 503);
        EXPECT_TRUE(e.retryable());
    }
    EXPECT_EQ(server.chat_hits, 3);
}

TEST(HttpProvider, ClientErrorsAreNotRetried) {
    FakeServer server;
    server.status = 401;
    HttpProvider p(server.options());
    EXPECT_EQ(kind_of([&] { p.chat_complete(exchange()); }), ProviderErrorKind::HttpStatus);
    EXPECT_EQ(server.chat_hits, 1);
}

TEST(HttpProvider, SlowServerTimesOut) {
    FakeServer server;
    server.delay_ms = 800;
    auto opts = server.options();
    opts.timeout = std::chrono::milliseconds(200);
    opts.max_retries = 0;
    HttpProvider p(opts);
    EXPECT_EQ(kind_of([&] { p.chat_complete(exchange()); }), ProviderErrorKind::Timeout);
}

TEST(HttpProvider, UnreachableHostIsTransport) {
    HttpProviderOptions opts;
    opts.base_url = "http://127.0.0.1:1/v1";
    opts.max_retries = 0;
    opts.timeout = std::chrono::milliseconds(2000);
    HttpProvider p(opts);
    EXPECT_EQ(kind_of([&] { p.chat_complete(exchange()); }), ProviderErrorKind::Transport);
}

TEST(HttpProvider, EmbeddingDimensionMismatch) {
    FakeServer server;
    HttpProvider p(server.options(8));
    EXPECT_EQ(kind_of([&] { p.embed("hello"); }), ProviderErrorKind::MalformedResponse);
}
