#include "kgmem/database.hpp"
#include "kgmem/embedding_index.hpp"
#include "kgmem/error.hpp"
#include "kgmem/knowledge_graph.hpp"
#include "kgmem/prompts.hpp"
#include "support/fixtures.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace kgmem;
using testing_support::FlakyProvider;
using testing_support::t0;
using testing_support::TempDir;

namespace {

struct Graph {
    explicit Graph(const std::string& db_path = ":memory:", const std::string& idx_path = {})
        : db(db_path), index(256, idx_path), kg(db, index, PromptTemplate(std::string(prompts::extraction()))) {}
    Database db;
    EmbeddingIndex index;
    KnowledgeGraph kg;
    MockProvider provider;

    std::vector<std::int64_t> store(std::vector<Triplet> t, const std::string& user = "alice",
                                    Timestamp at = t0()) {
        return kg.store_triplets(t, user, "s1", "source", at, provider);
    }
};

}  // namespace

TEST(KnowledgeGraph, ExtractsFromUserText) {
    Graph g;
    const auto ex = g.kg.extract_triplets("I live in Paris. My dog is Rex", g.provider);
    ASSERT_EQ(ex.triplets.size(), 2u);
    EXPECT_EQ(ex.triplets[0], (Triplet{"I", "live in", "Paris"}));
    EXPECT_EQ(ex.triplets[1], (Triplet{"My dog", "is", "Rex"}));
    EXPECT_GT(ex.usage.total_tokens, 0);
}

TEST(KnowledgeGraph, NoiseYieldsNothing) {
    Graph g;
    EXPECT_TRUE(g.kg.extract_triplets("????", g.provider).triplets.empty());
    EXPECT_THROW(g.kg.extract_triplets("  ", g.provider), ValidationError);
}

TEST(KnowledgeGraph, OneTripletTwoNodesOneEdge) {
    Graph g;
    g.store({{"Alice", "likes", "tea"}});
    const auto p = g.kg.get_persona("alice");
    EXPECT_EQ(p.nodes, (std::set<std::string>{"alice", "tea"}));
    ASSERT_EQ(p.edges.size(), 1u);
    EXPECT_EQ(p.edges[0].predicate, "likes");
}

TEST(KnowledgeGraph, SharedNodesMerge) {
    Graph g;
    g.store({{"A", "p", "B"}, {"b", "q", "C"}});
    const auto p = g.kg.get_persona("alice");
    EXPECT_EQ(p.nodes.size(), 3u);
    EXPECT_EQ(p.edges.size(), 2u);
}

TEST(KnowledgeGraph, FiftyTripletsFiftyEdges) {
    Graph g;
    std::vector<Triplet> t;
    for (int i = 0; i < 50; ++i) t.push_back({"user", "owns", "item " + std::to_string(i)});
    g.store(t);
    EXPECT_EQ(g.kg.get_persona("alice").edges.size(), 50u);
    EXPECT_EQ(g.kg.triplet_count("alice"), 50u);
}

TEST(KnowledgeGraph, UnknownUserIsEmpty) {
    Graph g;
    const auto p = g.kg.get_persona("ghost");
    EXPECT_TRUE(p.nodes.empty());
    EXPECT_TRUE(p.edges.empty());
}

TEST(KnowledgeGraph, ContradictionsKeepBothEdges) {
    Graph g;
    g.store({{"shoes", "are in", "closet"}});
    g.store({{"shoes", "are in", "garage"}}, "alice", t0().plus_minutes(10));
    const auto p = g.kg.get_persona("alice");
    ASSERT_EQ(p.edges.size(), 2u);
    EXPECT_EQ(p.edges[0].object_node, "closet");
    EXPECT_EQ(p.edges[1].object_node, "garage");
}

TEST(KnowledgeGraph, CanonicalLabelIdempotent) {
    for (const std::string s : {"  My  Dog ", "TEA", "a\tb  c", ""}) {
        EXPECT_EQ(canonical_label(canonical_label(s)), canonical_label(s));
    }
    EXPECT_EQ(canonical_label("  My  Dog "), "my dog");
}

TEST(KnowledgeGraph, ParseSkipsMalformedLines) {
    const auto t = parse_triplet_lines("a|b|c\nnot a triplet\nx|y\n|p|o\n1|2|3|4\n d | e | f ");
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1], (Triplet{"d", "e", "f"}));
}

TEST(KnowledgeGraph, RowsAndIndexStayInStep) {
    Graph g;
    std::mt19937 rng(9);
    for (int round = 0; round < 40; ++round) {
        const std::string user = "u" + std::to_string(rng() % 4);
        std::vector<Triplet> batch;
        for (unsigned i = 0; i < rng() % 4; ++i) batch.push_back({"thing " + std::to_string(round), "is", "x"});
        g.store(batch, user);
    }
    for (int u = 0; u < 4; ++u) {
        const std::string user = "u" + std::to_string(u);
        EXPECT_EQ(g.kg.triplet_count(user), g.index.size_for_user(user));
        for (const auto& t : g.kg.triplets_for_user(user)) {
            EXPECT_TRUE(g.index.contains(t.embedding_ref));
            EXPECT_EQ(g.kg.find_by_embedding_ref(t.embedding_ref)->triplet_id, t.triplet_id);
        }
    }
}

TEST(KnowledgeGraph, EmbedFailureLeavesEarlierTripletsOnly) {
    Database db(":memory:");
    EmbeddingIndex index(256);
    KnowledgeGraph kg(db, index, PromptTemplate(std::string(prompts::extraction())));
    FlakyProvider flaky;
    flaky.fail_embed_after = 1;
    const std::vector<Triplet> t{{"a", "is", "b"}, {"c", "is", "d"}};
    EXPECT_THROW(kg.store_triplets(t, "alice", "s", "src", t0(), flaky), ProviderError);
    EXPECT_EQ(kg.triplet_count("alice"), 1u);
    EXPECT_EQ(index.size_for_user("alice"), 1u);
}

TEST(KnowledgeGraph, RejectsInvalidTriplets) {
    Graph g;
    EXPECT_THROW(g.store({{"a", "", "b"}}), ValidationError);
    EXPECT_THROW(g.store({{"a|x", "p", "b"}}), ValidationError);
    EXPECT_EQ(g.kg.triplet_count("alice"), 0u);
}

TEST(KnowledgeGraph, ReopenHidesOrphanIndexEntries) {
    TempDir dir;
    const auto db_path = dir.file("kg.db");
    const auto idx_path = dir.file("kg.idx");
    {
        Graph g(db_path, idx_path);
        g.store({{"a", "is", "b"}});
        // An index entry with no row, as a crash between index append and commit would leave.
        g.index.add(g.index.make_entry(g.index.next_entry_id(), "alice", g.provider.embed("orphan"), 999, t0()));
    }
    Graph g(db_path, idx_path);
    EXPECT_EQ(g.index.size_for_user("alice"), 1u);
    EXPECT_EQ(g.kg.triplet_count("alice"), 1u);
    // New ids never reuse the orphan's.
    g.store({{"c", "is", "d"}});
    EXPECT_EQ(g.index.size_for_user("alice"), 2u);
}

TEST(KnowledgeGraph, MissingIndexEntryIsCorruption) {
    TempDir dir;
    const auto db_path = dir.file("kg.db");
    const auto idx_path = dir.file("kg.idx");
    {
        Graph g(db_path, idx_path);
        g.store({{"a", "is", "b"}});
    }
    std::filesystem::remove(idx_path);
    EXPECT_THROW(Graph(db_path, idx_path), CorruptionError);
}
