#pragma once

// JSON shapes shared by the HTTP service, the CLI and the Python module.

#include "kgmem/knowledge_graph.hpp"
#include "kgmem/memory_engine.hpp"

#include <nlohmann/json.hpp>

namespace kgmem {

nlohmann::json to_json(const WeightedTriplet& t);
nlohmann::json to_json(const MemoryContext& ctx);
nlohmann::json to_json(const TurnReceipt& receipt);
nlohmann::json to_json(const SummaryRecord& summary);
nlohmann::json to_json(const PersonaGraph& graph);
nlohmann::json to_json(const MessageRecord& message);
nlohmann::json to_json(const StoredTriplet& triplet);

// {"user_name", "session_id", "user_text", optional "timestamp"}. Throws
// ValidationError on missing or mistyped fields.
TurnRequest turn_request_from_json(const nlohmann::json& body);
std::optional<TokenUsage> usage_from_json(const nlohmann::json& body, const char* key);

}  // namespace kgmem
