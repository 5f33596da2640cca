#pragma once

#include "kgmem/error.hpp"

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem {

struct ProviderConfig;

struct TokenUsage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
    std::int64_t total_tokens = 0;

    static TokenUsage of(std::int64_t prompt, std::int64_t completion) {
        return TokenUsage{prompt, completion, prompt + completion};
    }
    bool operator==(const TokenUsage&) const = default;
};

// What an exchange is for. Live endpoints never see this; the mock provider
// dispatches on it.
enum class ChatPurpose { Generic, ExtractTriplets, Summarize, Answer, Judge };

struct ChatExchange {
    std::string system_text;
    std::string user_text;
    int max_output_tokens = 256;
    double temperature = 0.0;
    ChatPurpose purpose = ChatPurpose::Generic;
    // Raw values substituted into the prompt template, keyed by slot name.
    std::map<std::string, std::string> slots;

    void validate() const;
};

struct ChatResult {
    std::string text;
    TokenUsage usage;
};

struct Embedding {
    std::vector<double> values;

    std::size_t dimension() const noexcept { return values.size(); }
    double norm() const noexcept;
};

class Provider {
public:
    virtual ~Provider() = default;

    virtual ChatResult chat_complete(const ChatExchange& exchange) = 0;
    virtual Embedding embed(std::string_view text) = 0;
    virtual std::size_t embedding_dimension() const = 0;
    virtual std::string name() const = 0;
};

// Deterministic provider. Chat replies follow the rules in mock_rules.hpp;
// embeddings are hashed bag-of-words vectors, L2-normalized.
class MockProvider final : public Provider {
public:
    explicit MockProvider(std::size_t dimension = 256, std::uint64_t seed = 0);

    ChatResult chat_complete(const ChatExchange& exchange) override;
    Embedding embed(std::string_view text) override;
    std::size_t embedding_dimension() const override { return dimension_; }
    std::string name() const override { return "mock"; }

    // Bucket a lowercased token lands in.
    std::size_t bucket_of(std::string_view lowered_token) const;

private:
    std::size_t dimension_;
    std::uint64_t seed_;
};

struct HttpProviderOptions {
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key;
    std::string chat_model = "gpt-4.1-mini";
    std::string embed_model = "text-embedding-ada-002";
    std::size_t embed_dim = 1536;
    std::chrono::milliseconds timeout{30000};
    int max_retries = 1;
};

// OpenAI-compatible /chat/completions and /embeddings client.
class HttpProvider final : public Provider {
public:
    explicit HttpProvider(HttpProviderOptions options);

    ChatResult chat_complete(const ChatExchange& exchange) override;
    Embedding embed(std::string_view text) override;
    std::size_t embedding_dimension() const override { return options_.embed_dim; }
    std::string name() const override { return "http"; }

    const HttpProviderOptions& options() const noexcept { return options_; }

    std::string chat_request_body(const ChatExchange& exchange) const;
    std::string embed_request_body(std::string_view text) const;

private:
    std::string post_json(const std::string& path, const std::string& body) const;

    HttpProviderOptions options_;
    std::string origin_;       // scheme://host[:port]
    std::string path_prefix_;  // e.g. "/v1"
};

// Wire parsing, exposed for fixture tests.
ChatResult parse_chat_response(std::string_view body);
Embedding parse_embedding_response(std::string_view body);

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

}  // namespace kgmem
