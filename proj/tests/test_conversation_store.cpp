#include "kgmem/conversation_store.hpp"
#include "kgmem/database.hpp"
#include "kgmem/error.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>
#include <thread>

using namespace kgmem;
using testing_support::t0;
using testing_support::TempDir;

namespace {

MessageRecord msg(std::string user, std::string session, Role role, std::string content, Timestamp at) {
    MessageRecord r;
    r.user_name = std::move(user);
    r.session_id = std::move(session);
    r.role = role;
    r.content = std::move(content);
    r.created_at = at;
    return r;
}

SummaryRecord summary(std::string session, std::string text, std::int64_t turns, std::string user = "alice") {
    return SummaryRecord{std::move(session), std::move(user), std::move(text), t0(), turns};
}

}  // namespace

TEST(ConversationStore, AppendThenReadBack) {
    Database db(":memory:");
    ConversationStore store(db);
    const auto id = store.append_message(msg("alice", "s1", Role::User, "Hi", t0()));
    const auto got = store.get_session_messages("s1");
    ASSERT_EQ(got.size(), 1u);
    EXPECT_EQ(got[0].message_id, id);
    EXPECT_EQ(got[0].content, "Hi");
    EXPECT_EQ(got[0].role, Role::User);
    EXPECT_EQ(got[0].created_at, t0());
}

TEST(ConversationStore, OrdersByTimestampNotInsertion) {
    Database db(":memory:");
    ConversationStore store(db);
    store.append_message(msg("alice", "s1", Role::User, "second", t0().plus_minutes(1)));
    store.append_message(msg("alice", "s1", Role::User, "first", t0()));
    store.append_message(msg("alice", "s1", Role::Assistant, "also second", t0().plus_minutes(1)));
    const auto got = store.get_session_messages("s1");
    ASSERT_EQ(got.size(), 3u);
    EXPECT_EQ(got[0].content, "first");
    EXPECT_EQ(got[1].content, "second");
    EXPECT_EQ(got[2].content, "also second");
}

TEST(ConversationStore, UnknownSessionIsEmptyNotError) {
    Database db(":memory:");
    ConversationStore store(db);
    EXPECT_TRUE(store.get_session_messages("missing").empty());
    EXPECT_FALSE(store.get_summary("missing").has_value());
    EXPECT_FALSE(store.has_user_history("nobody"));
}

TEST(ConversationStore, ThousandAppendsAllRetrievable) {
    Database db(":memory:");
    ConversationStore store(db);
    for (int i = 0; i < 1000; ++i) {
        store.append_message(msg("alice", "big", i % 2 ? Role::Assistant : Role::User, "m" + std::to_string(i),
                                 t0().plus_minutes(i)));
    }
    const auto got = store.get_session_messages("big");
    ASSERT_EQ(got.size(), 1000u);
    EXPECT_EQ(store.message_count(), 1000);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(got[i].content, "m" + std::to_string(i));
}

TEST(ConversationStore, RejectsBadRecords) {
    Database db(":memory:");
    ConversationStore store(db);
    EXPECT_THROW(store.append_message(msg("alice", "s", Role::User, "  ", t0())), ValidationError);
    EXPECT_THROW(store.append_message(msg("", "s", Role::User, "x", t0())), ValidationError);
    auto r = msg("alice", "s", Role::User, "x", t0());
    r.message_id = 42;
    store.append_message(r);
    EXPECT_THROW(store.append_message(r), ValidationError);
    r.message_id = 0;
    r.usage = TokenUsage{1, 2, 4};
    EXPECT_THROW(store.append_message(r), ValidationError);
}

TEST(ConversationStore, BatchIsAllOrNothing) {
    Database db(":memory:");
    ConversationStore store(db);
    auto taken = msg("alice", "s", Role::User, "existing", t0());
    taken.message_id = 7;
    store.append_message(taken);
    std::vector<MessageRecord> batch{msg("alice", "s", Role::User, "new one", t0()), taken};
    EXPECT_THROW(store.append_messages(batch), ValidationError);
    EXPECT_EQ(store.message_count(), 1);
}

TEST(ConversationStore, UsageIsKeptWithMessage) {
    Database db(":memory:");
    ConversationStore store(db);
    auto r = msg("alice", "s", Role::Assistant, "reply", t0());
    r.usage = TokenUsage{10, 5, 15};
    store.append_message(r);
    const auto got = store.get_session_messages("s");
    ASSERT_TRUE(got[0].usage.has_value());
    EXPECT_EQ(*got[0].usage, (TokenUsage{10, 5, 15}));
    const auto usage = store.usage_for_session("s");
    ASSERT_EQ(usage.size(), 1u);
    EXPECT_EQ(usage[0].stage, "message");
}

TEST(ConversationStore, SummaryUpsertOverwrites) {
    Database db(":memory:");
    ConversationStore store(db);
    store.upsert_summary(summary("s1", "v1", 1));
    store.upsert_summary(summary("s1", "v2", 2));
    const auto s = store.get_summary("s1");
    ASSERT_TRUE(s.has_value());
    EXPECT_EQ(s->summary_text, "v2");
    EXPECT_EQ(s->turns_covered, 2);
}

TEST(ConversationStore, SummaryInvariants) {
    Database db(":memory:");
    ConversationStore store(db);
    store.upsert_summary(summary("s1", "v1", 3));
    EXPECT_THROW(store.upsert_summary(summary("s1", "v0", 2)), ValidationError);
    EXPECT_THROW(store.upsert_summary(summary("s1", "v9", 4, "mallory")), ValidationError);
    EXPECT_THROW(store.upsert_summary(summary("s2", "  ", 1)), ValidationError);
    EXPECT_EQ(store.get_summary("s1")->summary_text, "v1");
}

TEST(ConversationStore, ConcurrentUpsertsOnDifferentSessions) {
    TempDir dir;
    Database db(dir.file("c.db"));
    ConversationStore store(db);
    auto writer = [&](const std::string& session) {
        for (int i = 1; i <= 200; ++i) {
            store.upsert_summary(summary(session, session + " v" + std::to_string(i), i));
            store.append_message(msg("alice", session, Role::User, "turn " + std::to_string(i), t0().plus_minutes(i)));
        }
    };
    std::thread a(writer, "sA");
    std::thread b(writer, "sB");
    a.join();
    b.join();
    EXPECT_EQ(store.get_summary("sA")->summary_text, "sA v200");
    EXPECT_EQ(store.get_summary("sB")->summary_text, "sB v200");
    EXPECT_EQ(store.get_summary("sA")->turns_covered, 200);
    EXPECT_EQ(store.message_count(), 400);
}

TEST(ConversationStore, RandomRoundTrip) {
    Database db(":memory:");
    ConversationStore store(db);
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> minute(0, 10'000);
    std::vector<MessageRecord> expected;
    for (int i = 0; i < 300; ++i) {
        auto r = msg("u" + std::to_string(i % 3), "s", i % 2 ? Role::Assistant : Role::User,
                     "content number " + std::to_string(i), t0().plus_minutes(minute(rng)));
        if (i % 5 == 0) r.usage = TokenUsage::of(i, 1);
        r.message_id = store.append_message(r);
        expected.push_back(r);
    }
    std::stable_sort(expected.begin(), expected.end(),
                     [](const auto& a, const auto& b) { return a.created_at < b.created_at; });
    EXPECT_EQ(store.get_session_messages("s"), expected);
    EXPECT_EQ(store.list_users(), (std::vector<std::string>{"u0", "u1", "u2"}));
}

TEST(ConversationStore, PersistsAcrossReopen) {
    TempDir dir;
    const auto path = dir.file("p.db");
    {
        Database db(path);
        ConversationStore store(db);
        store.append_message(msg("alice", "s", Role::User, "remember me", t0()));
        store.upsert_summary(summary("s", "sum", 1));
    }
    Database db(path);
    ConversationStore store(db);
    EXPECT_EQ(store.get_session_messages("s").at(0).content, "remember me");
    EXPECT_TRUE(store.has_user_history("alice"));
    EXPECT_EQ(db.schema_version(), kSchemaVersion);
}

TEST(Database, RefusesOtherSchemaVersion) {
    TempDir dir;
    const auto path = dir.file("v.db");
    {
        Database db(path);
        db.exec("UPDATE schema_meta SET value = '99' WHERE key = 'version'");
    }
    EXPECT_THROW(Database{path}, StorageError);
}

TEST(Database, RefusesForeignDatabase) {
    TempDir dir;
    const auto path = dir.file("f.db");
    {
        Database db(path);
        db.exec("DROP TABLE schema_meta");
    }
    EXPECT_THROW(Database{path}, StorageError);
}

TEST(ConversationStore, WarningsRoundTrip) {
    Database db(":memory:");
    ConversationStore store(db);
    store.record_warning(WarningRow{"alice", "s", "summary", "provider timed out", t0()});
    const auto w = store.warnings_for_session("s");
    ASSERT_EQ(w.size(), 1u);
    EXPECT_EQ(w[0].stage, "summary");
    EXPECT_EQ(w[0].detail, "provider timed out");
}
