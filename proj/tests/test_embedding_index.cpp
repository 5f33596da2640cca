#include "kgmem/embedding_index.hpp"
#include "kgmem/error.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

using namespace kgmem;
using testing_support::t0;
using testing_support::TempDir;

namespace {

Embedding unit(std::vector<double> v) {
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
    return Embedding{std::move(v)};
}

Embedding random_vec(std::mt19937_64& rng, std::size_t dim) {
    std::normal_distribution<double> d;
    std::vector<double> v(dim);
    for (auto& x : v) x = d(rng);
    return unit(std::move(v));
}

void add(EmbeddingIndex& idx, std::uint64_t id, const std::string& user, const Embedding& e, Timestamp at = t0()) {
    idx.add(idx.make_entry(id, user, e, id * 10, at));
}

}  // namespace

TEST(Cosine, ZeroNormIsZeroAndClamped) {
    const std::vector<double> a{0, 0, 0};
    const std::vector<float> b{1, 0, 0};
    EXPECT_EQ(cosine_similarity(a, b), 0.0);
    const std::vector<double> c{1, 0, 0};
    EXPECT_LE(cosine_similarity(c, b), 1.0);
    EXPECT_DOUBLE_EQ(cosine_similarity(c, b), 1.0);
}

TEST(EmbeddingIndex, SelfIsTopHit) {
    EmbeddingIndex idx(4);
    const auto v = unit({1, 2, 3, 4});
    add(idx, 1, "alice", v);
    add(idx, 2, "alice", unit({4, 3, 2, 1}));
    const auto hits = idx.query_top_k(v, "alice", 1);
    ASSERT_EQ(hits.size(), 1u);
    EXPECT_EQ(hits[0].entry_id, 1u);
    EXPECT_EQ(hits[0].payload_id, 10u);
    EXPECT_NEAR(hits[0].similarity, 1.0, 1e-6);
}

TEST(EmbeddingIndex, FiltersByUser) {
    EmbeddingIndex idx(4);
    const auto v = unit({1, 0, 0, 0});
    add(idx, 1, "bob", v);
    EXPECT_TRUE(idx.query_top_k(v, "alice", 5).empty());
    EXPECT_EQ(idx.size_for_user("bob"), 1u);
    EXPECT_EQ(idx.size_for_user("alice"), 0u);
}

TEST(EmbeddingIndex, HundredEntries) {
    EmbeddingIndex idx(8);
    std::mt19937_64 rng(1);
    for (std::uint64_t i = 1; i <= 100; ++i) add(idx, i, "alice", random_vec(rng, 8));
    EXPECT_EQ(idx.size(), 100u);
    EXPECT_EQ(idx.next_entry_id(), 101u);
}

TEST(EmbeddingIndex, EmptyAndShortResults) {
    EmbeddingIndex idx(4);
    EXPECT_TRUE(idx.query_top_k(unit({1, 1, 1, 1}), "alice", 20).empty());
    add(idx, 1, "alice", unit({1, 0, 0, 0}));
    add(idx, 2, "alice", unit({0, 1, 0, 0}));
    add(idx, 3, "alice", unit({0, 0, 1, 0}));
    EXPECT_EQ(idx.query_top_k(unit({1, 1, 1, 1}), "alice", 20).size(), 3u);
    EXPECT_THROW(idx.query_top_k(unit({1, 1, 1, 1}), "alice", 0), ValidationError);
}

TEST(EmbeddingIndex, RejectsBadInput) {
    EmbeddingIndex idx(4);
    EXPECT_THROW(add(idx, 1, "alice", unit({1, 0, 0})), ValidationError);
    add(idx, 1, "alice", unit({1, 0, 0, 0}));
    EXPECT_THROW(add(idx, 1, "alice", unit({0, 1, 0, 0})), ValidationError);
    EXPECT_THROW(add(idx, 2, "alice", Embedding{{NAN, 0, 0, 0}}), ValidationError);
    EXPECT_THROW(idx.query_top_k(unit({1, 0, 0}), "alice", 1), ValidationError);
}

TEST(EmbeddingIndex, TieBreakNewerThenLowerId) {
    EmbeddingIndex idx(4);
    const auto v = unit({1, 1, 0, 0});
    add(idx, 5, "alice", v, t0());
    add(idx, 3, "alice", v, t0());
    add(idx, 9, "alice", v, t0().plus_minutes(5));
    const auto hits = idx.query_top_k(v, "alice", 3);
    ASSERT_EQ(hits.size(), 3u);
    EXPECT_EQ(hits[0].entry_id, 9u);
    EXPECT_EQ(hits[1].entry_id, 3u);
    EXPECT_EQ(hits[2].entry_id, 5u);
}

TEST(EmbeddingIndex, MatchesBruteForceOracle) {
    std::mt19937_64 rng(23);
    const std::size_t dim = 16;
    EmbeddingIndex idx(dim);
    std::vector<oracle::Vec> all;
    for (std::uint64_t i = 1; i <= 200; ++i) {
        const auto e = (i % 7 == 0 && i > 7) ? Embedding{std::vector<double>(all[i - 8].values.begin(),
                                                                             all[i - 8].values.end())}
                                             : random_vec(rng, dim);
        const std::string user = i % 3 ? "alice" : "bob";
        const auto at = t0().plus_minutes(static_cast<std::int64_t>(i % 11));
        add(idx, i, user, e, at);
        all.push_back(oracle::Vec{i, user, at.ms, idx.make_entry(i, user, e, 0, at).vector});
    }
    for (int q = 0; q < 50; ++q) {
        const auto query = q % 5 == 0 ? Embedding{std::vector<double>(all[q].values.begin(), all[q].values.end())}
                                      : random_vec(rng, dim);
        for (const std::string user : {"alice", "bob"}) {
            const auto got = idx.query_top_k(query, user, 20);
            const auto want = oracle::top_k(query.values, all, user, 20);
            ASSERT_EQ(got.size(), want.size());
            for (std::size_t i = 0; i < got.size(); ++i) {
                ASSERT_EQ(got[i].entry_id, want[i].id) << "query " << q << " rank " << i;
                ASSERT_NEAR(got[i].similarity, static_cast<double>(want[i].similarity), 1e-9);
            }
        }
    }
}

TEST(EmbeddingIndex, PersistsAndReloads) {
    TempDir dir;
    const auto path = dir.file("kg.idx");
    {
        EmbeddingIndex idx(4, path);
        add(idx, 1, "alice", unit({1, 0, 0, 0}));
        add(idx, 2, "bob", unit({0, 1, 0, 0}), t0().plus_minutes(3));
    }
    {
        std::ifstream in(path, std::ios::binary);
        char magic[4];
        in.read(magic, 4);
        EXPECT_EQ(std::string(magic, 4), "KGIX");
    }
    EmbeddingIndex idx(4, path);
    EXPECT_EQ(idx.size(), 2u);
    EXPECT_TRUE(idx.contains(2));
    const auto e = idx.entries();
    EXPECT_EQ(e[1].user_name, "bob");
    EXPECT_EQ(e[1].payload_id, 20u);
    EXPECT_EQ(e[1].created_at, t0().plus_minutes(3));
    add(idx, 3, "alice", unit({0, 0, 1, 0}));
    EmbeddingIndex again(4, path);
    EXPECT_EQ(again.size(), 3u);
}

TEST(EmbeddingIndex, TruncatesTornTail) {
    TempDir dir;
    const auto path = dir.file("torn.idx");
    {
        EmbeddingIndex idx(4, path);
        add(idx, 1, "alice", unit({1, 0, 0, 0}));
        add(idx, 2, "alice", unit({0, 1, 0, 0}));
    }
    std::filesystem::resize_file(path, std::filesystem::file_size(path) - 5);
    {
        EmbeddingIndex idx(4, path);
        EXPECT_EQ(idx.size(), 1u);
        add(idx, 2, "alice", unit({0, 1, 0, 0}));
    }
    EmbeddingIndex idx(4, path);
    EXPECT_EQ(idx.size(), 2u);
}

TEST(EmbeddingIndex, RejectsWrongHeader) {
    TempDir dir;
    const auto path = dir.file("bad.idx");
    {
        EmbeddingIndex idx(4, path);
        add(idx, 1, "alice", unit({1, 0, 0, 0}));
    }
    EXPECT_THROW(EmbeddingIndex(8, path), StorageError);
    {
        std::ofstream out(dir.file("junk.idx"), std::ios::binary);
        out << "JUNKJUNKJUNKJUNK";
    }
    EXPECT_THROW(EmbeddingIndex(4, dir.file("junk.idx")), StorageError);
}

TEST(EmbeddingIndex, RetainIfHidesEntries) {
    EmbeddingIndex idx(4);
    add(idx, 1, "alice", unit({1, 0, 0, 0}));
    add(idx, 2, "alice", unit({0, 1, 0, 0}));
    EXPECT_EQ(idx.retain_if([](const IndexEntry& e) { return e.entry_id != 1; }), 1u);
    EXPECT_EQ(idx.size(), 1u);
    EXPECT_FALSE(idx.contains(1));
    EXPECT_EQ(idx.next_entry_id(), 3u);
    EXPECT_TRUE(idx.query_top_k(unit({1, 0, 0, 0}), "alice", 5).size() == 1);
}
