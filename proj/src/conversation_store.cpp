#include "kgmem/conversation_store.hpp"

#include "kgmem/error.hpp"
#include "kgmem/tokens.hpp"

namespace kgmem {
namespace {

constexpr const char* kMessageColumns =
    "m.message_id, m.user_name, m.session_id, m.role, m.content, m.created_at_ms, "
    "u.prompt_tokens, u.completion_tokens, u.total_tokens";

constexpr const char* kUsageJoin =
    " FROM messages m LEFT JOIN usage u ON u.message_id = m.message_id AND u.stage = 'message' ";

void validate(const MessageRecord& r) {
    if (r.user_name.empty() || r.session_id.empty()) {
        throw ValidationError("message needs user_name and session_id");
    }
    if (trim(r.content).empty()) throw ValidationError("message content must be non-empty");
    if (r.message_id < 0) throw ValidationError("message_id must be positive");
    if (r.usage && r.usage->total_tokens != r.usage->prompt_tokens + r.usage->completion_tokens) {
        throw ValidationError("usage total_tokens must equal prompt + completion");
    }
}

}  // namespace

MessageRecord ConversationStore::read_message(Statement& st) const {
    MessageRecord r;
    r.message_id = st.column_int64(0);
    r.user_name = st.column_text(1);
    r.session_id = st.column_text(2);
    r.role = role_from_string(st.column_text(3));
    r.content = st.column_text(4);
    r.created_at = Timestamp::from_ms(st.column_int64(5));
    if (!st.column_is_null(6)) {
        r.usage = TokenUsage{st.column_int64(6), st.column_int64(7), st.column_int64(8)};
    }
    return r;
}

std::int64_t ConversationStore::append_message(const MessageRecord& record) {
    return append_messages(std::span(&record, 1)).front();
}

std::vector<std::int64_t> ConversationStore::append_messages(std::span<const MessageRecord> records) {
    for (const auto& r : records) validate(r);
    Transaction tx(db_);
    std::vector<std::int64_t> ids;
    ids.reserve(records.size());
    for (const auto& record : records) {
        std::int64_t id = record.message_id;
        if (id == 0) {
            auto next = db_.prepare("SELECT coalesce(max(message_id), 0) + 1 FROM messages");
            next.step();
            id = next.column_int64(0);
        } else {
            auto dup = db_.prepare("SELECT 1 FROM messages WHERE message_id = ?");
            dup.bind(1, id);
            if (dup.step()) throw ValidationError("duplicate message_id " + std::to_string(id));
        }
        db_.prepare(
               "INSERT INTO messages (message_id, user_name, session_id, role, content, created_at_ms) "
               "VALUES (?, ?, ?, ?, ?, ?)")
            .bind(1, id)
            .bind(2, record.user_name)
            .bind(3, record.session_id)
            .bind(4, to_string(record.role))
            .bind(5, record.content)
            .bind(6, record.created_at.ms)
            .run();
        if (record.usage) {
            record_usage(
                UsageRow{record.user_name, record.session_id, id, "message", *record.usage, record.created_at});
        }
        ids.push_back(id);
    }
    tx.commit();
    return ids;
}

std::vector<MessageRecord> ConversationStore::get_session_messages(std::string_view session_id) const {
    auto guard = db_.lock();
    auto st = db_.prepare(std::string("SELECT ") + kMessageColumns + kUsageJoin +
                          "WHERE m.session_id = ? ORDER BY m.created_at_ms, m.seq");
    st.bind(1, session_id);
    std::vector<MessageRecord> out;
    while (st.step()) out.push_back(read_message(st));
    return out;
}

std::vector<MessageRecord> ConversationStore::get_user_messages(std::string_view user_name) const {
    auto guard = db_.lock();
    auto st = db_.prepare(std::string("SELECT ") + kMessageColumns + kUsageJoin +
                          "WHERE m.user_name = ? ORDER BY m.created_at_ms, m.seq");
    st.bind(1, user_name);
    std::vector<MessageRecord> out;
    while (st.step()) out.push_back(read_message(st));
    return out;
}

std::int64_t ConversationStore::message_count() const {
    auto guard = db_.lock();
    auto st = db_.prepare("SELECT count(*) FROM messages");
    st.step();
    return st.column_int64(0);
}

void ConversationStore::upsert_summary(const SummaryRecord& record) {
    if (trim(record.summary_text).empty()) throw ValidationError("summary_text must be non-empty");
    if (record.session_id.empty() || record.user_name.empty()) {
        throw ValidationError("summary needs session_id and user_name");
    }
    if (record.turns_covered < 0) throw ValidationError("turns_covered must be >= 0");
    Transaction tx(db_);
    auto prior = db_.prepare("SELECT turns_covered, user_name FROM summaries WHERE session_id = ?");
    prior.bind(1, record.session_id);
    if (prior.step()) {
        if (record.turns_covered < prior.column_int64(0)) {
            throw ValidationError("turns_covered may not decrease for session " + record.session_id);
        }
        if (prior.column_text(1) != record.user_name) {
            throw ValidationError("session " + record.session_id + " belongs to another user");
        }
    }
    db_.prepare(
           "INSERT INTO summaries (session_id, user_name, summary_text, updated_at_ms, turns_covered) "
           "VALUES (?, ?, ?, ?, ?) "
           "ON CONFLICT(session_id) DO UPDATE SET summary_text = excluded.summary_text, "
           "updated_at_ms = excluded.updated_at_ms, turns_covered = excluded.turns_covered")
        .bind(1, record.session_id)
        .bind(2, record.user_name)
        .bind(3, record.summary_text)
        .bind(4, record.updated_at.ms)
        .bind(5, record.turns_covered)
        .run();
    tx.commit();
}

std::optional<SummaryRecord> ConversationStore::get_summary(std::string_view session_id) const {
    auto guard = db_.lock();
    auto st = db_.prepare(
        "SELECT session_id, user_name, summary_text, updated_at_ms, turns_covered FROM summaries "
        "WHERE session_id = ?");
    st.bind(1, session_id);
    if (!st.step()) return std::nullopt;
    return SummaryRecord{st.column_text(0), st.column_text(1), st.column_text(2),
                         Timestamp::from_ms(st.column_int64(3)), st.column_int64(4)};
}

bool ConversationStore::has_user_history(std::string_view user_name) const {
    auto guard = db_.lock();
    auto st = db_.prepare(
        "SELECT EXISTS (SELECT 1 FROM messages WHERE user_name = ?1) "
        "OR EXISTS (SELECT 1 FROM triplets WHERE user_name = ?1)");
    st.bind(1, user_name);
    st.step();
    return st.column_int64(0) != 0;
}

void ConversationStore::record_usage(const UsageRow& row) {
    auto guard = db_.lock();
    db_.prepare(
           "INSERT INTO usage (user_name, session_id, message_id, stage, prompt_tokens, completion_tokens, "
           "total_tokens, created_at_ms) VALUES (?, ?, ?, ?, ?, ?, ?, ?)")
        .bind(1, row.user_name)
        .bind(2, row.session_id)
        .bind(3, row.message_id)
        .bind(4, row.stage)
        .bind(5, row.usage.prompt_tokens)
        .bind(6, row.usage.completion_tokens)
        .bind(7, row.usage.total_tokens)
        .bind(8, row.created_at.ms)
        .run();
}

std::vector<UsageRow> ConversationStore::usage_for_session(std::string_view session_id) const {
    auto guard = db_.lock();
    auto st = db_.prepare(
        "SELECT user_name, session_id, message_id, stage, prompt_tokens, completion_tokens, total_tokens, "
        "created_at_ms FROM usage WHERE session_id = ? ORDER BY usage_id");
    st.bind(1, session_id);
    std::vector<UsageRow> out;
    while (st.step()) {
        UsageRow r;
        r.user_name = st.column_text(0);
        r.session_id = st.column_text(1);
        if (!st.column_is_null(2)) r.message_id = st.column_int64(2);
        r.stage = st.column_text(3);
        r.usage = TokenUsage{st.column_int64(4), st.column_int64(5), st.column_int64(6)};
        r.created_at = Timestamp::from_ms(st.column_int64(7));
        out.push_back(std::move(r));
    }
    return out;
}

void ConversationStore::record_warning(const WarningRow& row) {
    auto guard = db_.lock();
    db_.prepare(
           "INSERT INTO warnings (user_name, session_id, stage, detail, created_at_ms) VALUES (?, ?, ?, ?, ?)")
        .bind(1, row.user_name)
        .bind(2, row.session_id)
        .bind(3, row.stage)
        .bind(4, row.detail)
        .bind(5, row.created_at.ms)
        .run();
}

std::vector<WarningRow> ConversationStore::warnings_for_session(std::string_view session_id) const {
    auto guard = db_.lock();
    auto st = db_.prepare(
        "SELECT user_name, session_id, stage, detail, created_at_ms FROM warnings WHERE session_id = ? "
        "ORDER BY warning_id");
    st.bind(1, session_id);
    std::vector<WarningRow> out;
    while (st.step()) {
        out.push_back(WarningRow{st.column_text(0), st.column_text(1), st.column_text(2), st.column_text(3),
                                 Timestamp::from_ms(st.column_int64(4))});
    }
    return out;
}

std::vector<std::string> ConversationStore::list_users() const {
    auto guard = db_.lock();
    auto st = db_.prepare(
        "SELECT user_name FROM messages UNION SELECT user_name FROM triplets ORDER BY 1");
    std::vector<std::string> out;
    while (st.step()) out.push_back(st.column_text(0));
    return out;
}

}  // namespace kgmem
