#include "kgmem/memory_engine.hpp"

#include "kgmem/decay.hpp"
#include "kgmem/error.hpp"
#include "kgmem/prompts.hpp"
#include "kgmem/tokens.hpp"

#include <algorithm>
#include <cstdio>

namespace kgmem {
namespace {

// "[SESSION", "SUMMARY]", "[USER", "KNOWLEDGE]" plus the "none" under knowledge.
constexpr std::size_t kFrameTokens = 5;

std::string format_weight(double w) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", w);
    return buf;
}

void renormalize(std::vector<WeightedTriplet>& triplets) {
    if (triplets.empty()) return;
    std::vector<double> raw;
    raw.reserve(triplets.size());
    for (const auto& t : triplets) raw.push_back(t.raw_weight);
    const auto w = decay::normalize_weights(raw);
    for (std::size_t i = 0; i < triplets.size(); ++i) triplets[i].weight = w[i];
}

}  // namespace

const char* to_string(Scenario s) {
    switch (s) {
        case Scenario::NewUserNewSession: return "new_user_new_session";
        case Scenario::RepeatUserNewSession: return "repeat_user_new_session";
        case Scenario::RepeatUserOngoingSession: return "repeat_user_ongoing_session";
    }
    return "unknown";
}

Scenario classify_scenario(bool has_history, bool has_summary) {
    if (!has_history && has_summary) {
        throw CorruptionError("session summary exists for a user with no recorded history");
    }
    if (!has_history) return Scenario::NewUserNewSession;
    return has_summary ? Scenario::RepeatUserOngoingSession : Scenario::RepeatUserNewSession;
}

void TurnRequest::validate() const {
    if (user_name.empty()) throw ValidationError("user_name must be non-empty");
    if (session_id.empty()) throw ValidationError("session_id must be non-empty");
    if (trim(user_text).empty()) throw ValidationError("user_text must be non-empty");
}

std::string render_context(const std::optional<std::string>& summary, std::span<const WeightedTriplet> triplets) {
    std::string out = "[SESSION SUMMARY]\n";
    out += summary && !trim(*summary).empty() ? *summary : std::string("none");
    out += "\n[USER KNOWLEDGE]";
    if (triplets.empty()) {
        out += "\nnone";
    }
    for (const auto& t : triplets) {
        out += "\n(" + t.triplet.triplet.subject + ", " + t.triplet.triplet.predicate + ", " +
               t.triplet.triplet.object + ") [weight=" + format_weight(t.weight) + "]";
    }
    return out;
}

MemoryEngine::MemoryEngine(Config config) : MemoryEngine(config, std::shared_ptr<Provider>(make_provider(config.provider))) {}

MemoryEngine::MemoryEngine(Config config, std::shared_ptr<Provider> provider)
    : config_((config.validate(), std::move(config))),
      provider_(std::move(provider)),
      db_(config_.store.path),
      index_(provider_->embedding_dimension(), config_.index.path),
      store_(db_),
      graph_(db_, index_,
             PromptTemplate::load_or(config_.extraction.prompt_path, prompts::extraction(), {"message"}),
             config_.extraction.max_tokens),
      summarizer_(PromptTemplate::load_or(config_.summary.prompt_path, prompts::summary(), {"prior_summary", "turn"}),
                  config_.summary.max_tokens) {
    if (provider_->embedding_dimension() != config_.provider.embed_dim) {
        throw ConfigError("provider embedding dimension " + std::to_string(provider_->embedding_dimension()) +
                          " differs from provider.embed_dim " + std::to_string(config_.provider.embed_dim));
    }
}

std::mutex& MemoryEngine::user_mutex(const std::string& user_name) {
    std::lock_guard guard(locks_guard_);
    auto& slot = user_locks_[user_name];
    if (!slot) slot = std::make_unique<std::mutex>();
    return *slot;
}

Scenario MemoryEngine::classify(std::string_view user_name, std::string_view session_id) const {
    const bool history = store_.has_user_history(user_name);
    const auto summary = store_.get_summary(session_id);
    if (summary && summary->user_name != user_name) {
        throw ValidationError("session " + std::string(session_id) + " belongs to another user");
    }
    return classify_scenario(history, summary.has_value());
}

MemoryContext MemoryEngine::retrieve_context(const TurnRequest& request) const {
    request.validate();
    const Timestamp now = request.timestamp.value_or(Timestamp::now());

    MemoryContext ctx;
    const bool history = store_.has_user_history(request.user_name);
    auto summary = store_.get_summary(request.session_id);
    if (summary && summary->user_name != request.user_name) {
        throw ValidationError("session " + request.session_id + " belongs to another user");
    }
    ctx.scenario = classify_scenario(history, summary.has_value());
    if (summary) ctx.session_summary = summary->summary_text;

    if (history) {
        try {
            const Embedding query = provider_->embed(request.user_text);
            const auto hits =
                index_.query_top_k(query, request.user_name, static_cast<std::size_t>(config_.retrieval.k));
            std::vector<decay::Candidate> batch;
            batch.reserve(hits.size());
            Timestamp reference = now;
            for (const auto& hit : hits) {
                auto stored = graph_.find_by_embedding_ref(hit.entry_id);
                if (!stored) throw CorruptionError("index entry " + std::to_string(hit.entry_id) + " has no row");
                reference = std::max(reference, stored->created_at);
                batch.push_back(decay::Candidate{std::move(*stored), hit.similarity});
            }
            if (!batch.empty()) ctx.weighted_triplets = decay::weigh(batch, reference, config_.retrieval.decay_rate);
        } catch (const ProviderError& e) {
            ctx.warnings.push_back(std::string("embedding failed, context is summary-only: ") + e.what());
        }
    }

    // Fit the token budget: clip the summary to what the frame leaves, then
    // drop triplets lowest weight first (later position on ties).
    const std::size_t budget = config_.context.max_tokens;
    if (ctx.session_summary && count_tokens(*ctx.session_summary) + kFrameTokens > budget) {
        ctx.session_summary = last_tokens(*ctx.session_summary, budget - kFrameTokens);
        ctx.warnings.push_back("session summary clipped to fit context.max_tokens");
    }
    std::string rendered = render_context(ctx.session_summary, ctx.weighted_triplets);
    while (count_tokens(rendered) > budget && !ctx.weighted_triplets.empty()) {
        auto victim = ctx.weighted_triplets.begin();
        for (auto it = ctx.weighted_triplets.begin(); it != ctx.weighted_triplets.end(); ++it) {
            if (it->weight <= victim->weight) victim = it;
        }
        ctx.weighted_triplets.erase(victim);
        ++ctx.dropped_triplets;
        renormalize(ctx.weighted_triplets);
        rendered = render_context(ctx.session_summary, ctx.weighted_triplets);
    }
    ctx.rendered_context = std::move(rendered);
    ctx.context_token_count = count_tokens(ctx.rendered_context);
    return ctx;
}

TurnReceipt MemoryEngine::record_turn(const TurnRequest& request, std::string_view assistant_text,
                                      std::optional<TokenUsage> assistant_usage) {
    request.validate();
    if (trim(assistant_text).empty()) throw ValidationError("assistant_text must be non-empty");
    const Timestamp ts = request.timestamp.value_or(Timestamp::now());

    std::lock_guard user_guard(user_mutex(request.user_name));
    const auto prior = store_.get_summary(request.session_id);
    if (prior && prior->user_name != request.user_name) {
        throw ValidationError("session " + request.session_id + " belongs to another user");
    }

    TurnReceipt receipt;

    // Stage 1: raw log. Failure here aborts the turn.
    const MessageRecord messages[] = {
        MessageRecord{0, request.user_name, request.session_id, Role::User, request.user_text, ts, std::nullopt},
        MessageRecord{0, request.user_name, request.session_id, Role::Assistant, std::string(assistant_text), ts,
                      assistant_usage},
    };
    const auto ids = store_.append_messages(messages);
    receipt.user_message_id = ids[0];
    receipt.assistant_message_id = ids[1];

    const auto warn = [&](const std::string& stage, const std::string& detail) {
        receipt.failures.push_back(StageFailure{stage, detail});
        try {
            store_.record_warning(WarningRow{request.user_name, request.session_id, stage, detail, ts});
        } catch (const Error&) {
        }
    };

    // Stage 2: knowledge triplets, from the user's text only.
    try {
        const auto extraction = graph_.extract_triplets(request.user_text, *provider_);
        store_.record_usage(
            UsageRow{request.user_name, request.session_id, receipt.user_message_id, "extraction", extraction.usage, ts});
        receipt.triplet_ids = graph_.store_triplets(extraction.triplets, request.user_name, request.session_id,
                                                    request.user_text, ts, *provider_);
    } catch (const Error& e) {
        warn("knowledge", e.what());
    }

    // Stage 3: session summary. On failure the stale summary stays.
    try {
        SummaryUpdate update;
        if (prior) update.prior_summary = prior->summary_text;
        update.user_text = request.user_text;
        update.assistant_text = std::string(assistant_text);
        const auto result = summarizer_.update_summary(update, *provider_);
        const std::int64_t turns = (prior ? prior->turns_covered : 0) + 1;
        store_.upsert_summary(SummaryRecord{request.session_id, request.user_name, result.text, ts, turns});
        store_.record_usage(
            UsageRow{request.user_name, request.session_id, receipt.assistant_message_id, "summary", result.usage, ts});
        receipt.summary = result.text;
        receipt.turns_covered = turns;
    } catch (const Error& e) {
        warn("summary", e.what());
        if (prior) {
            receipt.summary = prior->summary_text;
            receipt.turns_covered = prior->turns_covered;
        }
    }
    return receipt;
}

}  // namespace kgmem
