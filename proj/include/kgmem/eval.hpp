#pragma once

#include "kgmem/config.hpp"
#include "kgmem/provider.hpp"
#include "kgmem/time.hpp"
#include "kgmem/types.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace kgmem::eval {

inline constexpr const char* kSingleSessionUser = "single_session_user";
inline constexpr const char* kKnowledgeUpdate = "knowledge_update";

struct EvalTurn {
    Role role = Role::User;
    std::string content;
};

struct EvalSession {
    std::string session_id;
    std::optional<Timestamp> date;
    std::vector<EvalTurn> turns;
};

struct EvalInstance {
    std::string question_id;
    std::string question_type;  // normalized: lowercase, '-' -> '_'
    std::string question;
    std::string answer;
    std::optional<Timestamp> question_date;
    std::vector<EvalSession> sessions;
};

struct Skipped {
    std::string question_id;
    std::string reason;
};

struct Dataset {
    std::vector<EvalInstance> instances;
    std::vector<Skipped> skipped;
};

// LongMemEval JSON array. Instances that fail to parse or belong to an
// unsupported category land in `skipped`.
Dataset parse_longmemeval(const std::string& json_text);
Dataset load_longmemeval(const std::filesystem::path& path);

enum class Mode { Memory, FullContext };
const char* to_string(Mode m);
Mode mode_from_string(const std::string& text);

struct Options {
    Mode mode = Mode::Memory;
    std::optional<std::string> category;
    // LLM judge when true; case-insensitive substring match otherwise.
    bool llm_judge = false;
    int answer_max_tokens = 128;
};

struct InstanceResult {
    std::string question_id;
    std::string question_type;
    bool correct = false;
    std::string answer;
    std::optional<std::string> error;
    std::size_t context_tokens = 0;
    std::size_t turns_ingested = 0;
    double ingest_ms = 0.0;
    double retrieval_ms = 0.0;
    double answer_ms = 0.0;
};

struct CategoryStats {
    std::size_t total = 0;
    std::size_t correct = 0;
};

struct Report {
    Mode mode = Mode::Memory;
    std::vector<InstanceResult> results;
    std::vector<Skipped> skipped;
    std::map<std::string, CategoryStats> categories;
    std::size_t total = 0;
    std::size_t correct = 0;
    nlohmann::json config_echo;

    std::optional<double> accuracy() const;
    std::optional<double> category_accuracy(const std::string& category) const;
    double mean_context_tokens() const;
    double mean_retrieval_ms() const;
    double mean_answer_ms() const;

    // Timing is the only non-deterministic part of a report; leave it out to
    // compare runs byte for byte.
    nlohmann::json to_json(bool include_timing = true) const;
    std::string table() const;
};

// Per-category accuracy difference (with - without) between two reports.
nlohmann::json ablation_delta(const Report& with_decay, const Report& without_decay);

// Replays each instance into a fresh in-memory engine, asks the question and
// judges the answer.
Report replay(const Dataset& dataset, const Config& config, const Options& options,
              std::shared_ptr<Provider> provider);
Report replay(const Dataset& dataset, const Config& config, const Options& options);

// Timestamps the harness assigns to each (user, assistant) pair of an instance,
// in ingestion order.
std::vector<Timestamp> ingestion_schedule(const EvalInstance& instance);

}  // namespace kgmem::eval
