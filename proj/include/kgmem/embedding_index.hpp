#pragma once

#include "kgmem/provider.hpp"
#include "kgmem/time.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace kgmem {

struct IndexEntry {
    std::uint64_t entry_id = 0;
    std::string user_name;
    std::vector<float> vector;
    std::uint64_t payload_id = 0;  // triplet_id
    Timestamp created_at;
};

struct ScoredEntry {
    std::uint64_t entry_id = 0;
    std::string user_name;
    std::uint64_t payload_id = 0;
    Timestamp created_at;
    double similarity = 0.0;
};

// dot(a, b) / (|a| |b|), 0 when either norm is 0, clamped to [-1, 1].
double cosine_similarity(std::span<const double> a, std::span<const float> b);

// Exact cosine top-k over per-user filtered entries, persisted as an
// append-only segment file (layout in docs/index_format.md).
class EmbeddingIndex {
public:
    static constexpr char kMagic[4] = {'K', 'G', 'I', 'X'};
    static constexpr std::uint32_t kFormatVersion = 1;

    // An empty path keeps the index in memory only. An existing file is
    // replayed; a dimension mismatch with its header throws StorageError.
    explicit EmbeddingIndex(std::size_t dimension, std::filesystem::path path = {});

    EmbeddingIndex(const EmbeddingIndex&) = delete;
    EmbeddingIndex& operator=(const EmbeddingIndex&) = delete;

    void add(IndexEntry entry);
    IndexEntry make_entry(std::uint64_t entry_id, std::string user_name, const Embedding& vector,
                          std::uint64_t payload_id, Timestamp created_at) const;

    // Sorted by similarity descending, then newer created_at, then entry_id ascending.
    std::vector<ScoredEntry> query_top_k(const Embedding& query, std::string_view user_name, std::size_t k) const;

    std::size_t size() const;
    std::size_t size_for_user(std::string_view user_name) const;
    bool contains(std::uint64_t entry_id) const;
    // One past the largest id ever added, hidden entries included.
    std::uint64_t next_entry_id() const;
    std::size_t dimension() const noexcept { return dimension_; }

    // Hides entries whose payload fails `keep`. The file is left untouched, so
    // the same reconciliation has to run after every reopen.
    std::size_t retain_if(const std::function<bool(const IndexEntry&)>& keep);

    // Snapshot of every live entry, in insertion order.
    std::vector<IndexEntry> entries() const;

private:
    struct Slot {
        IndexEntry entry;
        bool live = true;
    };

    void load();
    void append_to_file(const IndexEntry& entry);
    void insert_locked(IndexEntry entry);

    std::size_t dimension_;
    std::filesystem::path path_;
    std::ofstream out_;
    mutable std::shared_mutex mutex_;
    std::vector<Slot> slots_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_user_;
    std::unordered_set<std::uint64_t> ids_;
    std::uint64_t max_id_ = 0;
};

}  // namespace kgmem
