#include "kgmem/eval.hpp"

#include "kgmem/error.hpp"
#include "kgmem/memory_engine.hpp"
#include "kgmem/mock_rules.hpp"
#include "kgmem/prompts.hpp"
#include "kgmem/tokens.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace kgmem::eval {

using nlohmann::json;

namespace {

constexpr const char* kUserName = "user";
constexpr const char* kNoReply = "(no reply)";
// Used only when a dataset gives no dates at all.
constexpr Timestamp kFallbackEpoch{1672531200000};  // 2023-01-01T00:00:00Z

std::string normalize_category(std::string text) {
    text = to_lower(text);
    std::replace(text.begin(), text.end(), '-', '_');
    return text;
}

bool replayed_category(const std::string& category) {
    return category == kSingleSessionUser || category == kKnowledgeUpdate;
}

std::string scalar_text(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number() || v.is_boolean()) return v.dump();
    throw ValidationError("expected a string or number");
}

EvalInstance parse_instance(const json& j, std::size_t position) {
    if (!j.is_object()) throw ValidationError("instance is not an object");
    EvalInstance inst;
    inst.question_id = j.contains("question_id") ? scalar_text(j["question_id"]) : "#" + std::to_string(position);
    inst.question_type = normalize_category(j.at("question_type").get<std::string>());
    inst.question = j.at("question").get<std::string>();
    if (trim(inst.question).empty()) throw ValidationError("empty question");
    inst.answer = scalar_text(j.at("answer"));
    if (j.contains("question_date") && j["question_date"].is_string()) {
        inst.question_date = parse_timestamp(j["question_date"].get<std::string>());
    }
    const auto& sessions = j.at("haystack_sessions");
    if (!sessions.is_array() || sessions.empty()) throw ValidationError("no haystack sessions");
    const json dates = j.value("haystack_dates", json::array());
    const json ids = j.value("haystack_session_ids", json::array());
    for (std::size_t s = 0; s < sessions.size(); ++s) {
        EvalSession session;
        session.session_id = s < ids.size() ? scalar_text(ids[s]) : "session_" + std::to_string(s);
        if (s < dates.size() && dates[s].is_string()) session.date = parse_timestamp(dates[s].get<std::string>());
        for (const auto& turn : sessions[s]) {
            EvalTurn t;
            t.role = role_from_string(turn.at("role").get<std::string>());
            t.content = turn.at("content").get<std::string>();
            if (!trim(t.content).empty()) session.turns.push_back(std::move(t));
        }
        inst.sessions.push_back(std::move(session));
    }
    return inst;
}

struct PlannedTurn {
    std::string session_id;
    std::string user_text;
    std::string assistant_text;
    Timestamp at;
};

// Sessions in date order, one entry per (user, assistant) pair, each pair one
// minute after the previous within a session and never earlier than the last.
std::vector<PlannedTurn> plan(const EvalInstance& inst) {
    struct Dated {
        const EvalSession* session;
        Timestamp date;
    };
    std::vector<Dated> dated;
    Timestamp running = kFallbackEpoch;
    for (const auto& s : inst.sessions) {
        if (s.date) running = *s.date;
        dated.push_back(Dated{&s, running});
    }
    std::stable_sort(dated.begin(), dated.end(), [](const Dated& a, const Dated& b) { return a.date < b.date; });

    std::vector<PlannedTurn> out;
    Timestamp last = dated.empty() ? kFallbackEpoch : dated.front().date;
    for (const auto& d : dated) {
        const auto& turns = d.session->turns;
        std::size_t pair = 0;
        for (std::size_t i = 0; i < turns.size(); ++i) {
            if (turns[i].role != Role::User) continue;
            PlannedTurn p;
            p.session_id = d.session->session_id;
            p.user_text = turns[i].content;
            if (i + 1 < turns.size() && turns[i + 1].role == Role::Assistant) {
                p.assistant_text = turns[i + 1].content;
                ++i;
            } else {
                p.assistant_text = kNoReply;
            }
            p.at = std::max(d.date.plus_minutes(static_cast<double>(pair)), last);
            last = p.at;
            ++pair;
            out.push_back(std::move(p));
        }
    }
    return out;
}

std::string full_context(const EvalInstance& inst) {
    std::string out;
    std::string current;
    for (const auto& p : plan(inst)) {
        if (p.session_id != current) {
            current = p.session_id;
            out += "[session " + current + " " + to_iso8601(p.at) + "]\n";
        }
        out += "user: " + p.user_text + "\n";
        out += "assistant: " + p.assistant_text + "\n";
    }
    return out;
}

double elapsed_ms(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - since).count();
}

bool judge(Provider& provider, const PromptTemplate& prompt, const EvalInstance& inst, const std::string& answer,
           bool llm) {
    if (!llm) return mock::substring_judge(answer, inst.answer);
    ChatExchange ex;
    ex.system_text = "You grade answers strictly against the reference answer.";
    ex.slots = {{"question", inst.question}, {"ground_truth", inst.answer}, {"answer", answer}};
    ex.user_text = prompt.render(ex.slots);
    ex.max_output_tokens = 4;
    ex.purpose = ChatPurpose::Judge;
    const auto verdict = to_lower(trim(provider.chat_complete(ex).text));
    return verdict.rfind("yes", 0) == 0;
}

}  // namespace

Dataset parse_longmemeval(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("dataset is not valid JSON: ") + e.what());
    }
    if (!root.is_array()) throw ValidationError("dataset must be a JSON array of instances");
    Dataset ds;
    for (std::size_t i = 0; i < root.size(); ++i) {
        const std::string fallback_id =
            root[i].is_object() && root[i].contains("question_id") && root[i]["question_id"].is_string()
                ? root[i]["question_id"].get<std::string>()
                : "#" + std::to_string(i);
        try {
            auto inst = parse_instance(root[i], i);
            if (!replayed_category(inst.question_type)) {
                ds.skipped.push_back({inst.question_id, "category " + inst.question_type + " is not replayed"});
                continue;
            }
            ds.instances.push_back(std::move(inst));
        } catch (const std::exception& e) {
            ds.skipped.push_back({fallback_id, std::string("parse error: ") + e.what()});
        }
    }
    return ds;
}

Dataset load_longmemeval(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_longmemeval(ss.str());
}

const char* to_string(Mode m) { return m == Mode::Memory ? "memoria" : "full-context"; }

Mode mode_from_string(const std::string& text) {
    if (text == "memoria") return Mode::Memory;
    if (text == "full-context") return Mode::FullContext;
    throw ValidationError("unknown mode '" + text + "' (expected memoria or full-context)");
}

std::vector<Timestamp> ingestion_schedule(const EvalInstance& instance) {
    std::vector<Timestamp> out;
    for (const auto& p : plan(instance)) out.push_back(p.at);
    return out;
}

std::optional<double> Report::accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
}

std::optional<double> Report::category_accuracy(const std::string& category) const {
    const auto it = categories.find(category);
    if (it == categories.end() || it->second.total == 0) return std::nullopt;
    return static_cast<double>(it->second.correct) / static_cast<double>(it->second.total);
}

double Report::mean_context_tokens() const {
    if (results.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : results) sum += static_cast<double>(r.context_tokens);
    return sum / static_cast<double>(results.size());
}

double Report::mean_retrieval_ms() const {
    if (results.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : results) sum += r.retrieval_ms;
    return sum / static_cast<double>(results.size());
}

double Report::mean_answer_ms() const {
    if (results.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : results) sum += r.answer_ms;
    return sum / static_cast<double>(results.size());
}

json Report::to_json(bool include_timing) const {
    const auto acc = [](std::optional<double> a) { return a ? json(*a) : json("n/a"); };
    json cats = json::object();
    for (const auto& [name, stats] : categories) {
        cats[name] = {{"total", stats.total}, {"correct", stats.correct}, {"accuracy", acc(category_accuracy(name))}};
    }
    json instances = json::array();
    for (const auto& r : results) {
        json item = {{"question_id", r.question_id},
                     {"question_type", r.question_type},
                     {"correct", r.correct},
                     {"answer", r.answer},
                     {"context_tokens", r.context_tokens},
                     {"turns_ingested", r.turns_ingested},
                     {"error", r.error ? json(*r.error) : json(nullptr)}};
        if (include_timing) {
            item["ingest_ms"] = r.ingest_ms;
            item["retrieval_ms"] = r.retrieval_ms;
            item["answer_ms"] = r.answer_ms;
        }
        instances.push_back(std::move(item));
    }
    json skipped_items = json::array();
    for (const auto& s : skipped) skipped_items.push_back({{"question_id", s.question_id}, {"reason", s.reason}});

    json out = {{"mode", eval::to_string(mode)},
                {"total", total},
                {"correct", correct},
                {"accuracy", acc(accuracy())},
                {"categories", cats},
                {"mean_context_tokens", mean_context_tokens()},
                {"instances", instances},
                {"skipped", skipped_items},
                {"config", config_echo}};
    if (include_timing) {
        out["timing"] = {{"mean_retrieval_ms", mean_retrieval_ms()}, {"mean_answer_ms", mean_answer_ms()}};
    }
    return out;
}

std::string Report::table() const {
    std::ostringstream out;
    char line[160];
    out << "mode: " << eval::to_string(mode) << "\n";
    std::snprintf(line, sizeof line, "%-24s %7s %8s %9s\n", "category", "total", "correct", "accuracy");
    out << line;
    const auto row = [&](const std::string& name, std::size_t t, std::size_t c) {
        if (t == 0) {
            std::snprintf(line, sizeof line, "%-24s %7zu %8zu %9s\n", name.c_str(), t, c, "n/a");
        } else {
            std::snprintf(line, sizeof line, "%-24s %7zu %8zu %9.3f\n", name.c_str(), t, c,
                          static_cast<double>(c) / static_cast<double>(t));
        }
        out << line;
    };
    for (const auto& [name, stats] : categories) row(name, stats.total, stats.correct);
    row("overall", total, correct);
    std::snprintf(line, sizeof line, "mean context tokens: %.1f\n", mean_context_tokens());
    out << line;
    std::snprintf(line, sizeof line, "mean retrieval latency: %.3f ms, mean answer latency: %.3f ms\n",
                  mean_retrieval_ms(), mean_answer_ms());
    out << line;
    out << "skipped: " << skipped.size() << "\n";
    return out.str();
}

json ablation_delta(const Report& with_decay, const Report& without_decay) {
    json out = json::object();
    const auto delta = [](std::optional<double> a, std::optional<double> b) {
        return a && b ? json(*a - *b) : json("n/a");
    };
    for (const auto& [name, _] : with_decay.categories) {
        out[name] = delta(with_decay.category_accuracy(name), without_decay.category_accuracy(name));
    }
    out["overall"] = delta(with_decay.accuracy(), without_decay.accuracy());
    return out;
}

Report replay(const Dataset& dataset, const Config& config, const Options& options) {
    return replay(dataset, config, options, std::shared_ptr<Provider>(make_provider(config.provider)));
}

Report replay(const Dataset& dataset, const Config& config, const Options& options,
              std::shared_ptr<Provider> provider) {
    config.validate();
    Report report;
    report.mode = options.mode;
    report.skipped = dataset.skipped;
    report.config_echo = json::parse(config.to_json_text());
    report.config_echo["mode"] = to_string(options.mode);
    if (options.category) report.config_echo["category"] = *options.category;

    const auto answer_prompt = PromptTemplate::load_or("", prompts::answer(), {"context", "question"});
    const auto judge_prompt = PromptTemplate::load_or("", prompts::judge(), {"answer", "ground_truth"});

    for (const auto& inst : dataset.instances) {
        if (options.category && normalize_category(*options.category) != inst.question_type) continue;
        InstanceResult r;
        r.question_id = inst.question_id;
        r.question_type = inst.question_type;
        try {
            const auto planned = plan(inst);
            std::string context;
            Timestamp last = planned.empty() ? inst.question_date.value_or(kFallbackEpoch) : planned.back().at;
            if (options.mode == Mode::Memory) {
                Config instance_config = config;
                instance_config.store.path = ":memory:";
                instance_config.index.path.clear();
                MemoryEngine engine(instance_config, provider);
                auto started = std::chrono::steady_clock::now();
                for (const auto& p : planned) {
                    engine.record_turn(TurnRequest{kUserName, p.session_id, p.user_text, p.at}, p.assistant_text);
                }
                r.turns_ingested = planned.size();
                r.ingest_ms = elapsed_ms(started);

                const Timestamp asked = std::max(inst.question_date.value_or(last), last);
                started = std::chrono::steady_clock::now();
                const auto ctx =
                    engine.retrieve_context(TurnRequest{kUserName, "question:" + inst.question_id, inst.question, asked});
                r.retrieval_ms = elapsed_ms(started);
                context = ctx.rendered_context;
                r.context_tokens = ctx.context_token_count;
            } else {
                context = full_context(inst);
                r.context_tokens = count_tokens(context);
            }

            ChatExchange ex;
            ex.system_text = "You answer questions about the user from remembered context.";
            ex.slots = {{"context", context}, {"question", inst.question}};
            ex.user_text = answer_prompt.render(ex.slots);
            ex.max_output_tokens = options.answer_max_tokens;
            ex.purpose = ChatPurpose::Answer;
            const auto started = std::chrono::steady_clock::now();
            r.answer = provider->chat_complete(ex).text;
            r.answer_ms = elapsed_ms(started);
            r.correct = judge(*provider, judge_prompt, inst, r.answer, options.llm_judge);
        } catch (const std::exception& e) {
            r.correct = false;
            r.error = e.what();
        }
        auto& stats = report.categories[inst.question_type];
        ++stats.total;
        ++report.total;
        if (r.correct) {
            ++stats.correct;
            ++report.correct;
        }
        report.results.push_back(std::move(r));
    }
    return report;
}

}  // namespace kgmem::eval
