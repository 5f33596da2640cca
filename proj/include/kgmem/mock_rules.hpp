#pragma once

// Rules the mock provider applies to each chat purpose. They are plain
// functions so that tests can build expected values from them directly.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem::mock {

inline constexpr std::size_t kSnippetTokens = 12;

struct PatternTriplet {
    std::string subject;
    std::string predicate;
    std::string object;
};

// Splits `message` into sentences and matches each against
//   "<subject> is|are|was|were|am [preposition] <object>"   (covers "my X is Y")
//   "I <verb> [preposition] <object>"
// Questions (ending in '?' or starting with an interrogative) never match.
std::vector<PatternTriplet> extract_pattern_triplets(std::string_view message);

// One line per triplet: "subject|predicate|object".
std::string render_triplet_lines(const std::vector<PatternTriplet>& triplets);

// "User said: <first 12 tokens>. Assistant said: <first 12 tokens>."
std::string turn_sentence(std::string_view user_text, std::string_view assistant_text);

// Prior summary lines followed by the new turn sentence, one sentence per
// line. Oldest lines are dropped while the result exceeds `max_tokens`.
std::string fold_summary(std::string_view prior_summary, std::string_view user_text,
                         std::string_view assistant_text, std::size_t max_tokens);

// Reads the "(s, p, o) [weight=w]" lines of a rendered context. Candidates are
// the lines sharing the most content words with the question; the highest
// weight wins and ties go to the earliest line. Returns "Answer: <object>" or
// "I don't know." when nothing overlaps.
std::string answer_from_context(std::string_view context, std::string_view question);

// Case-insensitive substring test of the ground truth in the answer.
bool substring_judge(std::string_view answer, std::string_view ground_truth);

}  // namespace kgmem::mock
