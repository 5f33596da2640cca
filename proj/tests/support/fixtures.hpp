#pragma once

#include "kgmem/config.hpp"
#include "kgmem/provider.hpp"
#include "kgmem/time.hpp"

#include <atomic>
#include <filesystem>
#include <optional>
#include <random>
#include <string>

namespace testing_support {

inline kgmem::Config memory_config() {
    kgmem::Config c;
    c.store.path = ":memory:";
    c.index.path.clear();
    return c;
}

inline kgmem::Timestamp t0() { return kgmem::parse_timestamp("2024-03-01T12:00:00Z"); }

// Unique scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("kgmem-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    std::filesystem::path path_;
};

// Mock provider whose calls can be made to fail on demand.
class FlakyProvider : public kgmem::Provider {
public:
    explicit FlakyProvider(std::size_t dim = 256) : inner_(dim) {}

    kgmem::ChatResult chat_complete(const kgmem::ChatExchange& ex) override {
        if (fail_chat_purpose && *fail_chat_purpose == ex.purpose) {
            throw kgmem::ProviderError(kgmem::ProviderErrorKind::Transport, "injected chat failure");
        }
        return inner_.chat_complete(ex);
    }
    kgmem::Embedding embed(std::string_view text) override {
        ++embed_calls;
        if (fail_embed_after >= 0 && embed_calls > fail_embed_after) {
            throw kgmem::ProviderError(kgmem::ProviderErrorKind::Timeout, "injected embedding failure");
        }
        return inner_.embed(text);
    }
    std::size_t embedding_dimension() const override { return inner_.embedding_dimension(); }
    std::string name() const override { return "flaky"; }

    std::optional<kgmem::ChatPurpose> fail_chat_purpose;
    int fail_embed_after = -1;  // fail every embed call after this many; -1 never
    int embed_calls = 0;

private:
    kgmem::MockProvider inner_;
};

}  // namespace testing_support
