#include "kgmem/knowledge_graph.hpp"

#include "kgmem/error.hpp"
#include "kgmem/tokens.hpp"

#include <sstream>
#include <unordered_set>

namespace kgmem {
namespace {

constexpr const char* kTripletColumns =
    "triplet_id, subject, predicate, object, user_name, session_id, source_message, created_at_ms, embedding_ref";

StoredTriplet read_triplet(Statement& st) {
    StoredTriplet t;
    t.triplet_id = st.column_int64(0);
    t.triplet = Triplet{st.column_text(1), st.column_text(2), st.column_text(3)};
    t.user_name = st.column_text(4);
    t.session_id = st.column_text(5);
    t.source_message = st.column_text(6);
    t.created_at = Timestamp::from_ms(st.column_int64(7));
    t.embedding_ref = static_cast<std::uint64_t>(st.column_int64(8));
    return t;
}

}  // namespace

std::string canonical_label(std::string_view text) {
    std::string out;
    for (auto tok : split_whitespace(text)) {
        if (!out.empty()) out += ' ';
        out += to_lower(tok);
    }
    return out;
}

std::vector<Triplet> parse_triplet_lines(std::string_view text) {
    std::vector<Triplet> out;
    std::istringstream in{std::string(text)};
    for (std::string line; std::getline(in, line);) {
        const auto first = line.find(kTripletSeparator);
        if (first == std::string::npos) continue;
        const auto second = line.find(kTripletSeparator, first + 1);
        if (second == std::string::npos || line.find(kTripletSeparator, second + 1) != std::string::npos) continue;
        auto t = make_triplet(std::string_view(line).substr(0, first),
                              std::string_view(line).substr(first + 1, second - first - 1),
                              std::string_view(line).substr(second + 1));
        if (t) out.push_back(std::move(*t));
    }
    return out;
}

KnowledgeGraph::KnowledgeGraph(Database& db, EmbeddingIndex& index, PromptTemplate extraction_prompt,
                               int max_output_tokens)
    : db_(db), index_(index), prompt_(std::move(extraction_prompt)), max_output_tokens_(max_output_tokens) {
    reconcile();
}

std::size_t KnowledgeGraph::reconcile() {
    std::unordered_set<std::uint64_t> refs;
    {
        auto guard = db_.lock();
        auto st = db_.prepare("SELECT embedding_ref FROM triplets");
        while (st.step()) refs.insert(static_cast<std::uint64_t>(st.column_int64(0)));
    }
    for (std::uint64_t ref : refs) {
        if (!index_.contains(ref)) {
            throw CorruptionError("triplet row references missing index entry " + std::to_string(ref));
        }
    }
    return index_.retain_if([&](const IndexEntry& e) { return refs.count(e.entry_id) != 0; });
}

Extraction KnowledgeGraph::extract_triplets(std::string_view user_message, Provider& provider) const {
    if (trim(user_message).empty()) throw ValidationError("extract_triplets: empty user message");
    ChatExchange ex;
    ex.system_text = "You extract structured facts about a user for a long-term memory store.";
    ex.slots = {{"message", std::string(user_message)}};
    ex.user_text = prompt_.render(ex.slots);
    ex.max_output_tokens = max_output_tokens_;
    ex.temperature = 0.0;
    ex.purpose = ChatPurpose::ExtractTriplets;
    auto result = provider.chat_complete(ex);
    return Extraction{parse_triplet_lines(result.text), result.usage};
}

std::vector<std::int64_t> KnowledgeGraph::store_triplets(std::span<const Triplet> triplets,
                                                         std::string_view user_name, std::string_view session_id,
                                                         std::string_view source_message, Timestamp created_at,
                                                         Provider& provider) {
    if (user_name.empty() || session_id.empty()) throw ValidationError("store_triplets needs user and session");
    for (const auto& t : triplets) {
        if (!make_triplet(t.subject, t.predicate, t.object)) {
            throw ValidationError("invalid triplet (" + t.subject + ", " + t.predicate + ", " + t.object + ")");
        }
    }
    std::vector<std::int64_t> ids;
    ids.reserve(triplets.size());
    for (const auto& raw : triplets) {
        const Triplet t = *make_triplet(raw.subject, raw.predicate, raw.object);
        const Embedding vec = provider.embed(t.rendered());
        if (vec.dimension() != index_.dimension()) {
            throw ValidationError("provider embedding dimension " + std::to_string(vec.dimension()) +
                                  " does not match index dimension " + std::to_string(index_.dimension()));
        }

        Transaction tx(db_);
        const std::uint64_t ref = index_.next_entry_id();
        db_.prepare(
               "INSERT INTO triplets (user_name, session_id, subject, predicate, object, source_message, "
               "created_at_ms, embedding_ref) VALUES (?, ?, ?, ?, ?, ?, ?, ?)")
            .bind(1, user_name)
            .bind(2, session_id)
            .bind(3, t.subject)
            .bind(4, t.predicate)
            .bind(5, t.object)
            .bind(6, source_message)
            .bind(7, created_at.ms)
            .bind(8, static_cast<std::int64_t>(ref))
            .run();
        const std::int64_t id = db_.last_insert_rowid();
        index_.add(index_.make_entry(ref, std::string(user_name), vec, static_cast<std::uint64_t>(id), created_at));
        try {
            tx.commit();
        } catch (...) {
            index_.retain_if([ref](const IndexEntry& e) { return e.entry_id != ref; });
            throw;
        }
        ids.push_back(id);
    }
    return ids;
}

std::vector<StoredTriplet> KnowledgeGraph::triplets_for_user(std::string_view user_name) const {
    auto guard = db_.lock();
    auto st = db_.prepare(std::string("SELECT ") + kTripletColumns +
                          " FROM triplets WHERE user_name = ? ORDER BY triplet_id");
    st.bind(1, user_name);
    std::vector<StoredTriplet> out;
    while (st.step()) out.push_back(read_triplet(st));
    return out;
}

std::optional<StoredTriplet> KnowledgeGraph::find_by_embedding_ref(std::uint64_t embedding_ref) const {
    auto guard = db_.lock();
    auto st = db_.prepare(std::string("SELECT ") + kTripletColumns + " FROM triplets WHERE embedding_ref = ?");
    st.bind(1, static_cast<std::int64_t>(embedding_ref));
    if (!st.step()) return std::nullopt;
    return read_triplet(st);
}

std::size_t KnowledgeGraph::triplet_count(std::string_view user_name) const {
    auto guard = db_.lock();
    auto st = db_.prepare("SELECT count(*) FROM triplets WHERE user_name = ?");
    st.bind(1, user_name);
    st.step();
    return static_cast<std::size_t>(st.column_int64(0));
}

PersonaGraph KnowledgeGraph::get_persona(std::string_view user_name) const {
    PersonaGraph g;
    g.user_name = std::string(user_name);
    for (const auto& t : triplets_for_user(user_name)) {
        PersonaEdge e{canonical_label(t.triplet.subject), canonical_label(t.triplet.predicate),
                      canonical_label(t.triplet.object), t.triplet_id};
        g.nodes.insert(e.subject_node);
        g.nodes.insert(e.object_node);
        g.edges.push_back(std::move(e));
    }
    return g;
}

}  // namespace kgmem
