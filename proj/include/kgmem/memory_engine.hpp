#pragma once

#include "kgmem/config.hpp"
#include "kgmem/conversation_store.hpp"
#include "kgmem/database.hpp"
#include "kgmem/embedding_index.hpp"
#include "kgmem/knowledge_graph.hpp"
#include "kgmem/provider.hpp"
#include "kgmem/summarizer.hpp"
#include "kgmem/types.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem {

enum class Scenario {
    NewUserNewSession = 1,
    RepeatUserNewSession = 2,
    RepeatUserOngoingSession = 3,
};

const char* to_string(Scenario s);

// (has history, has summary) -> scenario. A summary without history means the
// store is corrupt and throws CorruptionError.
Scenario classify_scenario(bool has_history, bool has_summary);

struct TurnRequest {
    std::string user_name;
    std::string session_id;
    std::string user_text;
    std::optional<Timestamp> timestamp;  // now when absent

    void validate() const;
};

struct MemoryContext {
    Scenario scenario = Scenario::NewUserNewSession;
    std::optional<std::string> session_summary;
    std::vector<WeightedTriplet> weighted_triplets;  // similarity order
    std::string rendered_context;
    std::size_t context_token_count = 0;
    std::size_t dropped_triplets = 0;  // removed to respect context.max_tokens
    std::vector<std::string> warnings;
};

struct StageFailure {
    std::string stage;  // "knowledge" | "summary"
    std::string error;
};

struct TurnReceipt {
    std::int64_t user_message_id = 0;
    std::int64_t assistant_message_id = 0;
    std::vector<std::int64_t> triplet_ids;
    std::optional<std::string> summary;
    std::int64_t turns_covered = 0;
    std::vector<StageFailure> failures;

    bool complete() const noexcept { return failures.empty(); }
};

// The bit-exact context block handed to the host application.
std::string render_context(const std::optional<std::string>& summary, std::span<const WeightedTriplet> triplets);

// Orchestrates the two-phase turn lifecycle: retrieve_context() before the host
// generates its answer, record_turn() afterwards.
class MemoryEngine {
public:
    MemoryEngine(Config config, std::shared_ptr<Provider> provider);
    explicit MemoryEngine(Config config);

    MemoryEngine(const MemoryEngine&) = delete;
    MemoryEngine& operator=(const MemoryEngine&) = delete;

    MemoryContext retrieve_context(const TurnRequest& request) const;
    TurnReceipt record_turn(const TurnRequest& request, std::string_view assistant_text,
                            std::optional<TokenUsage> assistant_usage = std::nullopt);

    Scenario classify(std::string_view user_name, std::string_view session_id) const;

    const Config& config() const noexcept { return config_; }
    ConversationStore& store() noexcept { return store_; }
    const ConversationStore& store() const noexcept { return store_; }
    KnowledgeGraph& graph() noexcept { return graph_; }
    const KnowledgeGraph& graph() const noexcept { return graph_; }
    Provider& provider() const noexcept { return *provider_; }

private:
    std::mutex& user_mutex(const std::string& user_name);

    Config config_;
    std::shared_ptr<Provider> provider_;
    Database db_;
    EmbeddingIndex index_;
    ConversationStore store_;
    KnowledgeGraph graph_;
    Summarizer summarizer_;

    std::mutex locks_guard_;
    std::map<std::string, std::unique_ptr<std::mutex>, std::less<>> user_locks_;
};

}  // namespace kgmem
