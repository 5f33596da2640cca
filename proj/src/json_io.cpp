#include "kgmem/json_io.hpp"

#include "kgmem/error.hpp"

namespace kgmem {

using nlohmann::json;

namespace {

std::string required_string(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) {
        throw ValidationError(std::string("field '") + key + "' must be a string");
    }
    return body[key].get<std::string>();
}

}  // namespace

json to_json(const StoredTriplet& t) {
    return {{"triplet_id", t.triplet_id},
            {"subject", t.triplet.subject},
            {"predicate", t.triplet.predicate},
            {"object", t.triplet.object},
            {"user_name", t.user_name},
            {"session_id", t.session_id},
            {"source_message", t.source_message},
            {"created_at", to_iso8601(t.created_at)},
            {"embedding_ref", t.embedding_ref}};
}

json to_json(const WeightedTriplet& t) {
    json j = to_json(t.triplet);
    j["similarity"] = t.similarity;
    j["normalized_age"] = t.normalized_age;
    j["raw_weight"] = t.raw_weight;
    j["weight"] = t.weight;
    return j;
}

json to_json(const MemoryContext& ctx) {
    json triplets = json::array();
    for (const auto& t : ctx.weighted_triplets) triplets.push_back(to_json(t));
    return {{"scenario", to_string(ctx.scenario)},
            {"scenario_number", static_cast<int>(ctx.scenario)},
            {"session_summary", ctx.session_summary ? json(*ctx.session_summary) : json(nullptr)},
            {"weighted_triplets", triplets},
            {"rendered_context", ctx.rendered_context},
            {"context_token_count", ctx.context_token_count},
            {"dropped_triplets", ctx.dropped_triplets},
            {"warnings", ctx.warnings}};
}

json to_json(const TurnReceipt& r) {
    json failures = json::array();
    for (const auto& f : r.failures) failures.push_back({{"stage", f.stage}, {"error", f.error}});
    return {{"user_message_id", r.user_message_id},
            {"assistant_message_id", r.assistant_message_id},
            {"triplet_ids", r.triplet_ids},
            {"summary", r.summary ? json(*r.summary) : json(nullptr)},
            {"turns_covered", r.turns_covered},
            {"failures", failures},
            {"complete", r.complete()}};
}

json to_json(const SummaryRecord& s) {
    return {{"session_id", s.session_id},
            {"user_name", s.user_name},
            {"summary_text", s.summary_text},
            {"updated_at", to_iso8601(s.updated_at)},
            {"turns_covered", s.turns_covered}};
}

json to_json(const PersonaGraph& g) {
    json edges = json::array();
    for (const auto& e : g.edges) {
        edges.push_back({{"subject", e.subject_node},
                         {"predicate", e.predicate},
                         {"object", e.object_node},
                         {"triplet_id", e.triplet_id}});
    }
    return {{"user_name", g.user_name}, {"nodes", g.nodes}, {"edges", edges}};
}

json to_json(const MessageRecord& m) {
    json j = {{"message_id", m.message_id},
              {"user_name", m.user_name},
              {"session_id", m.session_id},
              {"role", to_string(m.role)},
              {"content", m.content},
              {"created_at", to_iso8601(m.created_at)}};
    if (m.usage) {
        j["usage"] = {{"prompt_tokens", m.usage->prompt_tokens},
                      {"completion_tokens", m.usage->completion_tokens},
                      {"total_tokens", m.usage->total_tokens}};
    }
    return j;
}

TurnRequest turn_request_from_json(const json& body) {
    if (!body.is_object()) throw ValidationError("request body must be a JSON object");
    TurnRequest r;
    r.user_name = required_string(body, "user_name");
    r.session_id = required_string(body, "session_id");
    r.user_text = required_string(body, "user_text");
    if (body.contains("timestamp") && !body["timestamp"].is_null()) {
        if (!body["timestamp"].is_string()) throw ValidationError("field 'timestamp' must be an ISO-8601 string");
        r.timestamp = parse_timestamp(body["timestamp"].get<std::string>());
    }
    r.validate();
    return r;
}

std::optional<TokenUsage> usage_from_json(const json& body, const char* key) {
    if (!body.contains(key) || body[key].is_null()) return std::nullopt;
    const auto& u = body[key];
    if (!u.is_object()) throw ValidationError(std::string("field '") + key + "' must be an object");
    try {
        return TokenUsage::of(u.value("prompt_tokens", std::int64_t{0}), u.value("completion_tokens", std::int64_t{0}));
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad usage object: ") + e.what());
    }
}

}  // namespace kgmem
