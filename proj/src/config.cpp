#include "kgmem/config.hpp"

#include "kgmem/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace kgmem {
namespace {

using json = nlohmann::json;

template <typename T>
void read_key(const json& section, const std::string& name, const char* key, T& out) {
    if (!section.contains(key)) return;
    try {
        out = section.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(name + "." + key + ": " + e.what());
    }
}

void reject_unknown(const json& section, const std::string& name, std::initializer_list<const char*> known) {
    if (!section.is_object()) throw ConfigError(name + " must be an object");
    for (const auto& [key, _] : section.items()) {
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) throw ConfigError("unknown config key " + name + "." + key);
    }
}

}  // namespace

void Config::validate() const {
    if (provider.kind != "mock" && provider.kind != "http") {
        throw ConfigError("provider.kind must be 'mock' or 'http'");
    }
    if (provider.embed_dim == 0) throw ConfigError("provider.embed_dim must be positive");
    if (provider.timeout_ms <= 0) throw ConfigError("provider.timeout_ms must be positive");
    if (provider.max_retries < 0) throw ConfigError("provider.max_retries must be >= 0");
    if (provider.kind == "http" && provider.base_url.empty()) throw ConfigError("provider.base_url is required");
    if (store.path.empty()) throw ConfigError("store.path is required");
    if (retrieval.k < 1) throw ConfigError("retrieval.k must be >= 1");
    if (!(retrieval.decay_rate >= 0.0)) throw ConfigError("retrieval.decay_rate must be >= 0");
    if (context.max_tokens < 8) throw ConfigError("context.max_tokens must be >= 8");
    if (summary.max_tokens < 1) throw ConfigError("summary.max_tokens must be >= 1");
    if (extraction.max_tokens < 1) throw ConfigError("extraction.max_tokens must be >= 1");
    if (service.port < 0 || service.port > 65535) throw ConfigError("service.port out of range");
}

Config Config::from_json_text(const std::string& text) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    reject_unknown(root, "config",
                   {"provider", "store", "index", "retrieval", "context", "summary", "extraction", "service"});

    Config c;
    if (root.contains("provider")) {
        const auto& s = root["provider"];
        reject_unknown(s, "provider",
                       {"kind", "base_url", "api_key_env", "chat_model", "embed_model", "embed_dim", "timeout_ms",
                        "mock_seed", "max_retries"});
        read_key(s, "provider", "kind", c.provider.kind);
        read_key(s, "provider", "base_url", c.provider.base_url);
        read_key(s, "provider", "api_key_env", c.provider.api_key_env);
        read_key(s, "provider", "chat_model", c.provider.chat_model);
        read_key(s, "provider", "embed_model", c.provider.embed_model);
        read_key(s, "provider", "embed_dim", c.provider.embed_dim);
        read_key(s, "provider", "timeout_ms", c.provider.timeout_ms);
        read_key(s, "provider", "mock_seed", c.provider.mock_seed);
        read_key(s, "provider", "max_retries", c.provider.max_retries);
    }
    if (root.contains("store")) {
        reject_unknown(root["store"], "store", {"path"});
        read_key(root["store"], "store", "path", c.store.path);
    }
    if (root.contains("index")) {
        reject_unknown(root["index"], "index", {"path"});
        read_key(root["index"], "index", "path", c.index.path);
    }
    if (root.contains("retrieval")) {
        reject_unknown(root["retrieval"], "retrieval", {"k", "decay_rate"});
        read_key(root["retrieval"], "retrieval", "k", c.retrieval.k);
        read_key(root["retrieval"], "retrieval", "decay_rate", c.retrieval.decay_rate);
    }
    if (root.contains("context")) {
        reject_unknown(root["context"], "context", {"max_tokens"});
        read_key(root["context"], "context", "max_tokens", c.context.max_tokens);
    }
    if (root.contains("summary")) {
        reject_unknown(root["summary"], "summary", {"prompt_path", "max_tokens"});
        read_key(root["summary"], "summary", "prompt_path", c.summary.prompt_path);
        read_key(root["summary"], "summary", "max_tokens", c.summary.max_tokens);
    }
    if (root.contains("extraction")) {
        reject_unknown(root["extraction"], "extraction", {"prompt_path", "max_tokens"});
        read_key(root["extraction"], "extraction", "prompt_path", c.extraction.prompt_path);
        read_key(root["extraction"], "extraction", "max_tokens", c.extraction.max_tokens);
    }
    if (root.contains("service")) {
        reject_unknown(root["service"], "service", {"host", "port"});
        read_key(root["service"], "service", "host", c.service.host);
        read_key(root["service"], "service", "port", c.service.port);
    }
    c.validate();
    return c;
}

Config Config::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json_text(ss.str());
}

std::string Config::to_json_text() const {
    json j = {
        {"provider",
         {{"kind", provider.kind},
          {"base_url", provider.base_url},
          {"api_key_env", provider.api_key_env},
          {"chat_model", provider.chat_model},
          {"embed_model", provider.embed_model},
          {"embed_dim", provider.embed_dim},
          {"timeout_ms", provider.timeout_ms},
          {"mock_seed", provider.mock_seed},
          {"max_retries", provider.max_retries}}},
        {"store", {{"path", store.path}}},
        {"index", {{"path", index.path}}},
        {"retrieval", {{"k", retrieval.k}, {"decay_rate", retrieval.decay_rate}}},
        {"context", {{"max_tokens", context.max_tokens}}},
        {"summary", {{"prompt_path", summary.prompt_path}, {"max_tokens", summary.max_tokens}}},
        {"extraction", {{"prompt_path", extraction.prompt_path}, {"max_tokens", extraction.max_tokens}}},
        {"service", {{"host", service.host}, {"port", service.port}}},
    };
    return j.dump(2);
}

}  // namespace kgmem
