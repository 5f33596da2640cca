#include "kgmem/provider.hpp"

#include "kgmem/config.hpp"
#include "kgmem/mock_rules.hpp"
#include "kgmem/tokens.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdlib>
#include <thread>

namespace kgmem {
namespace {

using json = nlohmann::json;

std::string slot_or(const ChatExchange& ex, const char* key, const std::string& fallback) {
    const auto it = ex.slots.find(key);
    return it == ex.slots.end() ? fallback : it->second;
}

std::string clip(const std::string& text, int max_tokens) {
    if (count_tokens(text) <= static_cast<std::size_t>(max_tokens)) return text;
    return first_tokens(text, static_cast<std::size_t>(max_tokens));
}

}  // namespace

const char* to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::Transport: return "transport";
        case ProviderErrorKind::HttpStatus: return "http_status";
        case ProviderErrorKind::MalformedResponse: return "malformed_response";
        case ProviderErrorKind::Timeout: return "timeout";
        case ProviderErrorKind::InvalidRequest: return "invalid_request";
    }
    return "unknown";
}

void ChatExchange::validate() const {
    if (trim(user_text).empty()) throw ValidationError("chat exchange needs non-empty user_text");
    if (max_output_tokens < 1) throw ValidationError("max_output_tokens must be >= 1");
    if (!(temperature >= 0.0 && temperature <= 2.0)) throw ValidationError("temperature must be in [0, 2]");
}

double Embedding::norm() const noexcept {
    double sum = 0.0;
    for (double v : values) sum += v * v;
    return std::sqrt(sum);
}

// ---------------------------------------------------------------------------
// MockProvider

MockProvider::MockProvider(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), seed_(seed) {
    if (dimension_ == 0) throw ValidationError("mock embedding dimension must be positive");
}

std::size_t MockProvider::bucket_of(std::string_view lowered_token) const {
    // FNV-1a, offset basis perturbed by the seed.
    std::uint64_t h = 14695981039346656037ULL ^ (seed_ * 0x9E3779B97F4A7C15ULL);
    for (unsigned char c : lowered_token) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return static_cast<std::size_t>(h % dimension_);
}

ChatResult MockProvider::chat_complete(const ChatExchange& exchange) {
    exchange.validate();
    std::string reply;
    switch (exchange.purpose) {
        case ChatPurpose::ExtractTriplets: {
            const auto triplets = mock::extract_pattern_triplets(slot_or(exchange, "message", exchange.user_text));
            reply = triplets.empty() ? std::string("NONE") : mock::render_triplet_lines(triplets);
            break;
        }
        case ChatPurpose::Summarize:
            reply = mock::fold_summary(slot_or(exchange, "prior_summary", ""), slot_or(exchange, "user_text", ""),
                                       slot_or(exchange, "assistant_text", ""),
                                       static_cast<std::size_t>(exchange.max_output_tokens));
            break;
        case ChatPurpose::Answer:
            reply = clip(mock::answer_from_context(slot_or(exchange, "context", ""),
                                                   slot_or(exchange, "question", exchange.user_text)),
                         exchange.max_output_tokens);
            break;
        case ChatPurpose::Judge:
            reply = mock::substring_judge(slot_or(exchange, "answer", ""), slot_or(exchange, "ground_truth", ""))
                        ? "yes"
                        : "no";
            break;
        case ChatPurpose::Generic:
            reply = clip("Mock reply: " + first_tokens(exchange.user_text, mock::kSnippetTokens),
                         exchange.max_output_tokens);
            break;
    }
    const auto prompt = static_cast<std::int64_t>(count_tokens(exchange.system_text) + count_tokens(exchange.user_text));
    const auto completion = static_cast<std::int64_t>(count_tokens(reply));
    return ChatResult{std::move(reply), TokenUsage::of(prompt, completion)};
}

Embedding MockProvider::embed(std::string_view text) {
    const auto tokens = split_whitespace(text);
    if (tokens.empty()) throw ValidationError("cannot embed empty text");
    Embedding e;
    e.values.assign(dimension_, 0.0);
    for (auto tok : tokens) e.values[bucket_of(to_lower(tok))] += 1.0;
    const double n = e.norm();
    for (double& v : e.values) v /= n;
    return e;
}

// ---------------------------------------------------------------------------
// HttpProvider

HttpProvider::HttpProvider(HttpProviderOptions options) : options_(std::move(options)) {
    const auto scheme_end = options_.base_url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("provider.base_url needs a scheme: " + options_.base_url);
    const auto path_start = options_.base_url.find('/', scheme_end + 3);
    origin_ = options_.base_url.substr(0, path_start);
    path_prefix_ = path_start == std::string::npos ? "" : options_.base_url.substr(path_start);
    while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
    if (options_.embed_dim == 0) throw ConfigError("provider.embed_dim must be positive");
}

std::string HttpProvider::chat_request_body(const ChatExchange& exchange) const {
    json messages = json::array();
    if (!exchange.system_text.empty()) {
        messages.push_back({{"role", "system"}, {"content", exchange.system_text}});
    }
    messages.push_back({{"role", "user"}, {"content", exchange.user_text}});
    const json body = {{"model", options_.chat_model},
                       {"messages", messages},
                       {"max_tokens", exchange.max_output_tokens},
                       {"temperature", exchange.temperature}};
    return body.dump();
}

std::string HttpProvider::embed_request_body(std::string_view text) const {
    const json body = {{"model", options_.embed_model}, {"input", std::string(text)}};
    return body.dump();
}

std::string HttpProvider::post_json(const std::string& path, const std::string& body) const {
    const int attempts = options_.max_retries + 1;
    for (int attempt = 1;; ++attempt) {
        try {
            httplib::Client client(origin_);
            const auto secs = options_.timeout.count() / 1000;
            const auto usecs = (options_.timeout.count() % 1000) * 1000;
            client.set_connection_timeout(secs, usecs);
            client.set_read_timeout(secs, usecs);
            client.set_write_timeout(secs, usecs);
            httplib::Headers headers;
            if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

            const auto started = std::chrono::steady_clock::now();
            auto res = client.Post(path_prefix_ + path, headers, body, "application/json");
            if (!res) {
                const auto err = res.error();
                const auto elapsed = std::chrono::steady_clock::now() - started;
                const bool timed_out = err == httplib::Error::ConnectionTimeout ||
                                       (err == httplib::Error::Read && elapsed >= options_.timeout * 9 / 10);
                throw ProviderError(timed_out ? ProviderErrorKind::Timeout : ProviderErrorKind::Transport,
                                    "request to " + origin_ + path_prefix_ + path + " failed: " +
                                        httplib::to_string(err));
            }
            if (res->status < 200 || res->status >= 300) {
                throw ProviderError(ProviderErrorKind::HttpStatus,
                                    "HTTP " + std::to_string(res->status) + " from " + path + ": " +
                                        res->body.substr(0, 512),
                                    res->status);
            }
            return res->body;
        } catch (const ProviderError& e) {
            if (!e.retryable() || attempt >= attempts) throw;
        }
    }
}

ChatResult HttpProvider::chat_complete(const ChatExchange& exchange) {
    exchange.validate();
    return parse_chat_response(post_json("/chat/completions", chat_request_body(exchange)));
}

Embedding HttpProvider::embed(std::string_view text) {
    if (trim(text).empty()) throw ValidationError("cannot embed empty text");
    auto e = parse_embedding_response(post_json("/embeddings", embed_request_body(text)));
    if (e.dimension() != options_.embed_dim) {
        throw ProviderError(ProviderErrorKind::MalformedResponse,
                            "embedding dimension " + std::to_string(e.dimension()) + " does not match configured " +
                                std::to_string(options_.embed_dim));
    }
    return e;
}

ChatResult parse_chat_response(std::string_view body) {
    try {
        const auto j = json::parse(body);
        const auto& choices = j.at("choices");
        if (!choices.is_array() || choices.empty()) {
            throw ProviderError(ProviderErrorKind::MalformedResponse, "response has no choices");
        }
        const auto& content = choices.at(0).at("message").at("content");
        if (!content.is_string() || trim(content.get<std::string>()).empty()) {
            throw ProviderError(ProviderErrorKind::MalformedResponse, "first choice has empty content");
        }
        ChatResult out;
        out.text = content.get<std::string>();
        if (j.contains("usage") && j["usage"].is_object()) {
            const auto& u = j["usage"];
            out.usage = TokenUsage::of(u.value("prompt_tokens", std::int64_t{0}),
                                       u.value("completion_tokens", std::int64_t{0}));
        }
        return out;
    } catch (const json::exception& e) {
        throw ProviderError(ProviderErrorKind::MalformedResponse, std::string("bad chat response: ") + e.what());
    }
}

Embedding parse_embedding_response(std::string_view body) {
    try {
        const auto j = json::parse(body);
        const auto& data = j.at("data");
        if (!data.is_array() || data.empty()) {
            throw ProviderError(ProviderErrorKind::MalformedResponse, "embedding response has no data");
        }
        Embedding e;
        e.values = data.at(0).at("embedding").get<std::vector<double>>();
        if (e.values.empty()) throw ProviderError(ProviderErrorKind::MalformedResponse, "empty embedding");
        for (double v : e.values) {
            if (!std::isfinite(v)) throw ProviderError(ProviderErrorKind::MalformedResponse, "non-finite embedding");
        }
        return e;
    } catch (const json::exception& e) {
        throw ProviderError(ProviderErrorKind::MalformedResponse, std::string("bad embedding response: ") + e.what());
    }
}

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
    if (config.kind == "mock") return std::make_unique<MockProvider>(config.embed_dim, config.mock_seed);
    if (config.kind != "http") throw ConfigError("unknown provider.kind " + config.kind);
    HttpProviderOptions opts;
    opts.base_url = config.base_url;
    if (!config.api_key_env.empty()) {
        if (const char* key = std::getenv(config.api_key_env.c_str())) opts.api_key = key;
    }
    opts.chat_model = config.chat_model;
    opts.embed_model = config.embed_model;
    opts.embed_dim = config.embed_dim;
    opts.timeout = std::chrono::milliseconds(config.timeout_ms);
    opts.max_retries = config.max_retries;
    return std::make_unique<HttpProvider>(std::move(opts));
}

}  // namespace kgmem
