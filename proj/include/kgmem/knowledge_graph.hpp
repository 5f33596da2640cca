#pragma once

#include "kgmem/database.hpp"
#include "kgmem/embedding_index.hpp"
#include "kgmem/prompts.hpp"
#include "kgmem/provider.hpp"
#include "kgmem/types.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem {

// Lowercase, trim, collapse internal whitespace.
std::string canonical_label(std::string_view text);

// Parses "subject|predicate|object" lines; anything else is skipped.
std::vector<Triplet> parse_triplet_lines(std::string_view text);

struct PersonaEdge {
    std::string subject_node;
    std::string predicate;
    std::string object_node;
    std::int64_t triplet_id = 0;

    auto operator<=>(const PersonaEdge&) const = default;
};

struct PersonaGraph {
    std::string user_name;
    std::set<std::string> nodes;
    std::vector<PersonaEdge> edges;  // in triplet_id order
};

struct Extraction {
    std::vector<Triplet> triplets;
    TokenUsage usage;
};

// Per-user triplet store: relational rows in `triplets` plus one vector index
// entry per row.
class KnowledgeGraph {
public:
    KnowledgeGraph(Database& db, EmbeddingIndex& index, PromptTemplate extraction_prompt, int max_output_tokens = 256);

    // Only ever given user-authored text.
    Extraction extract_triplets(std::string_view user_message, Provider& provider) const;

    // Each triplet is stored and indexed, or neither. Triplets before a
    // failing one stay stored.
    std::vector<std::int64_t> store_triplets(std::span<const Triplet> triplets, std::string_view user_name,
                                             std::string_view session_id, std::string_view source_message,
                                             Timestamp created_at, Provider& provider);

    PersonaGraph get_persona(std::string_view user_name) const;

    std::vector<StoredTriplet> triplets_for_user(std::string_view user_name) const;
    std::optional<StoredTriplet> find_by_embedding_ref(std::uint64_t embedding_ref) const;
    std::size_t triplet_count(std::string_view user_name) const;

    const EmbeddingIndex& index() const noexcept { return index_; }

private:
    // Hides index entries that have no relational row (left by a failed commit).
    std::size_t reconcile();

    Database& db_;
    EmbeddingIndex& index_;
    PromptTemplate prompt_;
    int max_output_tokens_;
};

}  // namespace kgmem
