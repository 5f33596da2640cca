#pragma once

#include "kgmem/provider.hpp"
#include "kgmem/time.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace kgmem {

enum class Role { User, Assistant };

const char* to_string(Role role);
Role role_from_string(std::string_view text);

struct MessageRecord {
    std::int64_t message_id = 0;  // 0 asks the store to assign one
    std::string user_name;
    std::string session_id;
    Role role = Role::User;
    std::string content;
    Timestamp created_at;
    std::optional<TokenUsage> usage;

    bool operator==(const MessageRecord&) const = default;
};

struct SummaryRecord {
    std::string session_id;
    std::string user_name;
    std::string summary_text;
    Timestamp updated_at;
    std::int64_t turns_covered = 0;

    bool operator==(const SummaryRecord&) const = default;
};

struct Triplet {
    std::string subject;
    std::string predicate;
    std::string object;

    // "subject predicate object"; the text that gets embedded.
    std::string rendered() const { return subject + ' ' + predicate + ' ' + object; }

    bool operator==(const Triplet&) const = default;
};

inline constexpr char kTripletSeparator = '|';

// Trims every field; returns nullopt when a field is empty or contains the separator.
std::optional<Triplet> make_triplet(std::string_view subject, std::string_view predicate, std::string_view object);

struct StoredTriplet {
    std::int64_t triplet_id = 0;
    Triplet triplet;
    std::string user_name;
    std::string session_id;
    std::string source_message;
    Timestamp created_at;
    std::uint64_t embedding_ref = 0;

    bool operator==(const StoredTriplet&) const = default;
};

struct WeightedTriplet {
    StoredTriplet triplet;
    double similarity = 0.0;
    double normalized_age = 0.0;
    double raw_weight = 1.0;
    double weight = 0.0;
};

}  // namespace kgmem
