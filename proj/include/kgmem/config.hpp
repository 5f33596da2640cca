#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>

namespace kgmem {

struct ProviderConfig {
    std::string kind = "mock";  // "mock" | "http"
    std::string base_url = "https://api.openai.com/v1";
    std::string api_key_env = "OPENAI_API_KEY";
    std::string chat_model = "gpt-4.1-mini";
    std::string embed_model = "text-embedding-ada-002";
    std::size_t embed_dim = 256;
    int timeout_ms = 30000;
    std::uint64_t mock_seed = 0;
    int max_retries = 1;
};

struct StoreConfig {
    std::string path = "kgmem.db";  // ":memory:" keeps everything in process
};

struct IndexConfig {
    std::string path = "kgmem.idx";  // empty keeps the index in memory only
};

struct RetrievalConfig {
    int k = 20;
    // 0 switches to uniform weights (recency ablation).
    double decay_rate = 0.02;
};

struct ContextConfig {
    std::size_t max_tokens = 400;
};

struct SummaryConfig {
    std::string prompt_path;  // empty uses the built-in template
    int max_tokens = 160;
};

struct ExtractionConfig {
    std::string prompt_path;
    int max_tokens = 256;
};

struct ServiceConfig {
    std::string host = "127.0.0.1";
    int port = 8080;
};

struct Config {
    ProviderConfig provider;
    StoreConfig store;
    IndexConfig index;
    RetrievalConfig retrieval;
    ContextConfig context;
    SummaryConfig summary;
    ExtractionConfig extraction;
    ServiceConfig service;

    // Throws ConfigError on the first invalid value.
    void validate() const;

    // Every key is optional; unknown keys are rejected.
    static Config from_json_text(const std::string& text);
    static Config load(const std::filesystem::path& path);
    std::string to_json_text() const;
};

}  // namespace kgmem
