#include "kgmem/embedding_index.hpp"

#include "kgmem/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <mutex>

namespace kgmem {
namespace {

static_assert(std::endian::native == std::endian::little, "index file layout is little-endian");

template <typename T>
void put(std::ofstream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

template <typename T>
bool get(std::ifstream& in, T& v) {
    return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof v));
}

bool ranks_before(const ScoredEntry& a, const ScoredEntry& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    if (a.created_at != b.created_at) return a.created_at > b.created_at;
    return a.entry_id < b.entry_id;
}

}  // namespace

double cosine_similarity(std::span<const double> a, std::span<const float> b) {
    if (a.size() != b.size()) throw ValidationError("cosine_similarity: dimension mismatch");
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double bi = static_cast<double>(b[i]);
        dot += a[i] * bi;
        na += a[i] * a[i];
        nb += bi * bi;
    }
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

EmbeddingIndex::EmbeddingIndex(std::size_t dimension, std::filesystem::path path)
    : dimension_(dimension), path_(std::move(path)) {
    if (dimension_ == 0) throw ValidationError("index dimension must be positive");
    if (path_.empty()) return;
    if (std::filesystem::exists(path_) && std::filesystem::file_size(path_) > 0) {
        load();
        out_.open(path_, std::ios::binary | std::ios::app);
    } else {
        out_.open(path_, std::ios::binary | std::ios::trunc);
        if (!out_) throw StorageError("cannot create index file " + path_.string());
        out_.write(kMagic, sizeof kMagic);
        put(out_, kFormatVersion);
        put(out_, static_cast<std::uint32_t>(dimension_));
        out_.flush();
    }
    if (!out_) throw StorageError("cannot open index file " + path_.string());
}

void EmbeddingIndex::load() {
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw StorageError("cannot read index file " + path_.string());
    char magic[4];
    std::uint32_t version = 0;
    std::uint32_t dim = 0;
    if (!in.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
        throw StorageError("index file " + path_.string() + " has a bad magic header");
    }
    if (!get(in, version) || version != kFormatVersion) {
        throw StorageError("index file " + path_.string() + " has unsupported version " + std::to_string(version));
    }
    if (!get(in, dim) || dim != dimension_) {
        throw StorageError("index file " + path_.string() + " has dimension " + std::to_string(dim) +
                           ", expected " + std::to_string(dimension_));
    }
    std::uintmax_t good_end = static_cast<std::uintmax_t>(in.tellg());
    for (;;) {
        IndexEntry e;
        std::int64_t created = 0;
        std::uint32_t name_len = 0;
        if (!get(in, e.entry_id) || !get(in, e.payload_id) || !get(in, created) || !get(in, name_len)) break;
        if (name_len > (1u << 20)) throw StorageError("index file " + path_.string() + " is corrupt");
        e.user_name.resize(name_len);
        if (!in.read(e.user_name.data(), name_len)) break;
        e.vector.resize(dimension_);
        if (!in.read(reinterpret_cast<char*>(e.vector.data()),
                     static_cast<std::streamsize>(dimension_ * sizeof(float)))) {
            break;
        }
        e.created_at = Timestamp::from_ms(created);
        if (ids_.count(e.entry_id) != 0) {
            throw StorageError("index file " + path_.string() + " repeats entry " + std::to_string(e.entry_id));
        }
        insert_locked(std::move(e));
        good_end = static_cast<std::uintmax_t>(in.tellg());
    }
    in.close();
    // A torn final record from an interrupted append is dropped.
    if (std::filesystem::file_size(path_) != good_end) std::filesystem::resize_file(path_, good_end);
}

IndexEntry EmbeddingIndex::make_entry(std::uint64_t entry_id, std::string user_name, const Embedding& vector,
                                      std::uint64_t payload_id, Timestamp created_at) const {
    IndexEntry e;
    e.entry_id = entry_id;
    e.user_name = std::move(user_name);
    e.vector.assign(vector.values.begin(), vector.values.end());
    e.payload_id = payload_id;
    e.created_at = created_at;
    return e;
}

void EmbeddingIndex::append_to_file(const IndexEntry& e) {
    put(out_, e.entry_id);
    put(out_, e.payload_id);
    put(out_, e.created_at.ms);
    put(out_, static_cast<std::uint32_t>(e.user_name.size()));
    out_.write(e.user_name.data(), static_cast<std::streamsize>(e.user_name.size()));
    out_.write(reinterpret_cast<const char*>(e.vector.data()),
               static_cast<std::streamsize>(e.vector.size() * sizeof(float)));
    out_.flush();
    if (!out_) throw StorageError("write to index file " + path_.string() + " failed");
}

void EmbeddingIndex::insert_locked(IndexEntry entry) {
    ids_.insert(entry.entry_id);
    max_id_ = std::max(max_id_, entry.entry_id);
    by_user_[entry.user_name].push_back(slots_.size());
    slots_.push_back(Slot{std::move(entry), true});
}

void EmbeddingIndex::add(IndexEntry entry) {
    if (entry.vector.size() != dimension_) {
        throw ValidationError("index entry has dimension " + std::to_string(entry.vector.size()) + ", index expects " +
                              std::to_string(dimension_));
    }
    if (entry.user_name.empty()) throw ValidationError("index entry needs a user_name");
    for (float v : entry.vector) {
        if (!std::isfinite(v)) throw ValidationError("index entry has a non-finite component");
    }
    std::unique_lock lock(mutex_);
    if (ids_.count(entry.entry_id) != 0) {
        throw ValidationError("duplicate index entry id " + std::to_string(entry.entry_id));
    }
    if (out_.is_open()) append_to_file(entry);
    insert_locked(std::move(entry));
}

std::vector<ScoredEntry> EmbeddingIndex::query_top_k(const Embedding& query, std::string_view user_name,
                                                     std::size_t k) const {
    if (k == 0) throw ValidationError("k must be >= 1");
    if (query.dimension() != dimension_) {
        throw ValidationError("query has dimension " + std::to_string(query.dimension()) + ", index expects " +
                              std::to_string(dimension_));
    }
    std::shared_lock lock(mutex_);
    const auto it = by_user_.find(std::string(user_name));
    if (it == by_user_.end()) return {};

    std::vector<ScoredEntry> scored;
    scored.reserve(it->second.size());
    for (std::size_t idx : it->second) {
        const Slot& s = slots_[idx];
        if (!s.live) continue;
        scored.push_back(ScoredEntry{s.entry.entry_id, s.entry.user_name, s.entry.payload_id, s.entry.created_at,
                                     cosine_similarity(query.values, s.entry.vector)});
    }
    const std::size_t n = std::min(k, scored.size());
    std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(n), scored.end(), ranks_before);
    scored.resize(n);
    return scored;
}

std::size_t EmbeddingIndex::size() const {
    std::shared_lock lock(mutex_);
    return static_cast<std::size_t>(
        std::count_if(slots_.begin(), slots_.end(), [](const Slot& s) { return s.live; }));
}

std::size_t EmbeddingIndex::size_for_user(std::string_view user_name) const {
    std::shared_lock lock(mutex_);
    const auto it = by_user_.find(std::string(user_name));
    if (it == by_user_.end()) return 0;
    return static_cast<std::size_t>(
        std::count_if(it->second.begin(), it->second.end(), [&](std::size_t i) { return slots_[i].live; }));
}

bool EmbeddingIndex::contains(std::uint64_t entry_id) const {
    std::shared_lock lock(mutex_);
    if (ids_.count(entry_id) == 0) return false;
    return std::any_of(slots_.begin(), slots_.end(),
                       [&](const Slot& s) { return s.live && s.entry.entry_id == entry_id; });
}

std::uint64_t EmbeddingIndex::next_entry_id() const {
    std::shared_lock lock(mutex_);
    return max_id_ + 1;
}

std::size_t EmbeddingIndex::retain_if(const std::function<bool(const IndexEntry&)>& keep) {
    std::unique_lock lock(mutex_);
    std::size_t hidden = 0;
    for (auto& s : slots_) {
        if (s.live && !keep(s.entry)) {
            s.live = false;
            ++hidden;
        }
    }
    return hidden;
}

std::vector<IndexEntry> EmbeddingIndex::entries() const {
    std::shared_lock lock(mutex_);
    std::vector<IndexEntry> out;
    for (const auto& s : slots_) {
        if (s.live) out.push_back(s.entry);
    }
    return out;
}

}  // namespace kgmem
