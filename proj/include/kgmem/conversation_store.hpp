#pragma once

#include "kgmem/database.hpp"
#include "kgmem/types.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem {

struct UsageRow {
    std::string user_name;
    std::string session_id;
    std::optional<std::int64_t> message_id;
    std::string stage;  // "message", "extraction", "summary", ...
    TokenUsage usage;
    Timestamp created_at;
};

struct WarningRow {
    std::string user_name;
    std::string session_id;
    std::string stage;
    std::string detail;
    Timestamp created_at;
};

// Raw turn log, session summaries and token statistics.
class ConversationStore {
public:
    explicit ConversationStore(Database& db) : db_(db) {}

    // Assigns an id when record.message_id == 0. Throws ValidationError on an
    // invalid record or a duplicate id.
    std::int64_t append_message(const MessageRecord& record);
    // All records in one transaction; returns the ids in input order.
    std::vector<std::int64_t> append_messages(std::span<const MessageRecord> records);

    // Sorted by created_at, then insertion order.
    std::vector<MessageRecord> get_session_messages(std::string_view session_id) const;
    std::vector<MessageRecord> get_user_messages(std::string_view user_name) const;
    std::int64_t message_count() const;

    void upsert_summary(const SummaryRecord& record);
    std::optional<SummaryRecord> get_summary(std::string_view session_id) const;

    // True iff a message or a stored triplet exists for the user.
    bool has_user_history(std::string_view user_name) const;

    void record_usage(const UsageRow& row);
    std::vector<UsageRow> usage_for_session(std::string_view session_id) const;

    void record_warning(const WarningRow& row);
    std::vector<WarningRow> warnings_for_session(std::string_view session_id) const;

    std::vector<std::string> list_users() const;

private:
    MessageRecord read_message(Statement& st) const;

    Database& db_;
};

}  // namespace kgmem
