#include "kgmem/mock_rules.hpp"

#include "kgmem/tokens.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <optional>
#include <set>
#include <sstream>

namespace kgmem::mock {
namespace {

const std::set<std::string, std::less<>> kCopulas = {"is", "are", "was", "were", "am"};

const std::set<std::string, std::less<>> kPrepositions = {
    "in",   "on",    "under", "at",   "near", "from",   "behind", "inside", "to",      "with",
    "by",   "above", "below", "into", "over", "beside", "for",    "of",     "outside", "about"};

const std::set<std::string, std::less<>> kInterrogatives = {
    "what", "where", "who",   "whom",   "whose", "when", "why", "how", "which", "do",   "does",
    "did",  "can",   "could", "would",  "should", "will", "is",  "are", "was",   "were", "am"};

const std::set<std::string, std::less<>> kStopwords = {
    "a",    "an",    "the",  "is",   "are",  "was",   "were", "am",  "be",    "do",   "does", "did",
    "what", "where", "who",  "whom", "whose", "when", "why",  "how", "which", "my",   "i",    "me",
    "mine", "your",  "you",  "of",   "to",   "in",   "on",   "at",  "for",   "now",  "currently",
    "called", "name", "tell", "remember", "again", "it", "that", "this", "and", "or", "there"};

bool is_edge_punct(char c) {
    return c == ',' || c == ';' || c == ':' || c == '"' || c == '(' || c == ')' || c == '[' || c == ']' ||
           c == '\'' || c == '`';
}

std::string strip_edges(std::string_view token) {
    std::size_t b = 0;
    std::size_t e = token.size();
    while (b < e && is_edge_punct(token[b])) ++b;
    while (e > b && is_edge_punct(token[e - 1])) --e;
    return std::string(token.substr(b, e - b));
}

std::string join(const std::vector<std::string>& tokens, std::size_t begin, std::size_t end) {
    std::string out;
    for (std::size_t i = begin; i < end; ++i) {
        if (i > begin) out += ' ';
        out += tokens[i];
    }
    return out;
}

struct Sentence {
    std::string text;
    bool question = false;
};

std::vector<Sentence> split_sentences(std::string_view message) {
    std::vector<Sentence> out;
    std::string current;
    for (char c : message) {
        if (c == '.' || c == '!' || c == '?' || c == ';' || c == '\n') {
            if (!trim(current).empty()) {
                out.push_back({current, c == '?'});
            }
            current.clear();
        } else {
            current += c;
        }
    }
    if (!trim(current).empty()) out.push_back({current, false});
    return out;
}

std::optional<PatternTriplet> match_sentence(const Sentence& sentence) {
    if (sentence.question || sentence.text.find('|') != std::string::npos) return std::nullopt;

    std::vector<std::string> tokens;
    for (auto raw : split_whitespace(sentence.text)) {
        auto t = strip_edges(raw);
        if (!t.empty()) tokens.push_back(std::move(t));
    }
    if (tokens.size() < 3) return std::nullopt;
    if (kInterrogatives.count(to_lower(tokens[0])) != 0) return std::nullopt;

    const auto predicate_from = [&](std::size_t verb) -> std::optional<PatternTriplet> {
        std::size_t j = verb + 1;
        std::string predicate = tokens[verb];
        if (j + 1 < tokens.size() && kPrepositions.count(to_lower(tokens[j])) != 0) {
            predicate += ' ';
            predicate += tokens[j];
            ++j;
        }
        if (j >= tokens.size()) return std::nullopt;
        return PatternTriplet{join(tokens, 0, verb), predicate, join(tokens, j, tokens.size())};
    };

    // "I <verb> X"
    if (to_lower(tokens[0]) == "i" && kCopulas.count(to_lower(tokens[1])) == 0) {
        return predicate_from(1);
    }
    // "<subject> <copula> Y"
    for (std::size_t i = 1; i + 1 < tokens.size(); ++i) {
        if (kCopulas.count(to_lower(tokens[i])) != 0) return predicate_from(i);
    }
    return std::nullopt;
}

std::string strip_terminal_punct(std::string s) {
    while (!s.empty() && (s.back() == '.' || s.back() == '!' || s.back() == '?')) s.pop_back();
    return s;
}

std::string normalize_word(std::string_view raw) {
    std::string w = to_lower(raw);
    std::size_t b = 0;
    std::size_t e = w.size();
    const auto alnum = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; };
    while (b < e && !alnum(w[b])) ++b;
    while (e > b && !alnum(w[e - 1])) --e;
    w = w.substr(b, e - b);
    if (w.size() > 2 && w.compare(w.size() - 2, 2, "'s") == 0) w.resize(w.size() - 2);
    return w;
}

std::set<std::string> content_words(std::string_view text) {
    std::set<std::string> out;
    for (auto raw : split_whitespace(text)) {
        auto w = normalize_word(raw);
        if (!w.empty() && kStopwords.count(w) == 0) out.insert(std::move(w));
    }
    return out;
}

struct ContextLine {
    std::string subject;
    std::string predicate;
    std::string object;
    double weight = 0.0;
};

std::optional<ContextLine> parse_context_line(std::string_view line) {
    const auto tag = line.rfind(") [weight=");
    if (line.empty() || line.front() != '(' || tag == std::string_view::npos || line.back() != ']') {
        return std::nullopt;
    }
    const std::string_view inner = line.substr(1, tag - 1);
    const auto first = inner.find(", ");
    const auto last = inner.rfind(", ");
    if (first == std::string_view::npos || first == last) return std::nullopt;
    ContextLine out;
    out.subject = std::string(inner.substr(0, first));
    out.predicate = std::string(inner.substr(first + 2, last - first - 2));
    out.object = std::string(inner.substr(last + 2));
    const std::string weight(line.substr(tag + 10, line.size() - tag - 11));
    char* end = nullptr;
    out.weight = std::strtod(weight.c_str(), &end);
    if (end == weight.c_str()) return std::nullopt;
    return out;
}

}  // namespace

std::vector<PatternTriplet> extract_pattern_triplets(std::string_view message) {
    std::vector<PatternTriplet> out;
    for (const auto& sentence : split_sentences(message)) {
        if (auto t = match_sentence(sentence)) out.push_back(std::move(*t));
    }
    return out;
}

std::string render_triplet_lines(const std::vector<PatternTriplet>& triplets) {
    std::string out;
    for (const auto& t : triplets) {
        if (!out.empty()) out += '\n';
        out += t.subject + '|' + t.predicate + '|' + t.object;
    }
    return out;
}

std::string turn_sentence(std::string_view user_text, std::string_view assistant_text) {
    return "User said: " + strip_terminal_punct(first_tokens(user_text, kSnippetTokens)) +
           ". Assistant said: " + strip_terminal_punct(first_tokens(assistant_text, kSnippetTokens)) + ".";
}

std::string fold_summary(std::string_view prior_summary, std::string_view user_text,
                         std::string_view assistant_text, std::size_t max_tokens) {
    std::vector<std::string> lines;
    std::istringstream in{std::string(prior_summary)};
    for (std::string line; std::getline(in, line);) {
        auto t = trim(line);
        if (!t.empty()) lines.push_back(std::move(t));
    }
    lines.push_back(turn_sentence(user_text, assistant_text));

    std::size_t total = 0;
    for (const auto& l : lines) total += count_tokens(l);
    std::size_t drop = 0;
    while (total > max_tokens && lines.size() - drop > 1) {
        total -= count_tokens(lines[drop]);
        ++drop;
    }
    lines.erase(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(drop));
    if (total > max_tokens) lines.back() = first_tokens(lines.back(), max_tokens);

    std::string out;
    for (const auto& l : lines) {
        if (!out.empty()) out += '\n';
        out += l;
    }
    return out;
}

std::string answer_from_context(std::string_view context, std::string_view question) {
    const auto wanted = content_words(question);
    std::optional<ContextLine> best;
    std::size_t best_overlap = 0;

    std::istringstream in{std::string(context)};
    for (std::string line; std::getline(in, line);) {
        auto parsed = parse_context_line(trim(line));
        if (!parsed) continue;
        std::set<std::string> words;
        for (const auto* field : {&parsed->subject, &parsed->predicate, &parsed->object}) {
            for (auto raw : split_whitespace(*field)) words.insert(normalize_word(raw));
        }
        std::size_t overlap = 0;
        for (const auto& w : wanted) overlap += words.count(w);
        if (overlap == 0) continue;
        if (!best || overlap > best_overlap || (overlap == best_overlap && parsed->weight > best->weight)) {
            best = std::move(parsed);
            best_overlap = overlap;
        }
    }
    if (!best) return "I don't know.";
    return "Answer: " + best->object;
}

bool substring_judge(std::string_view answer, std::string_view ground_truth) {
    const auto needle = to_lower(trim(ground_truth));
    if (needle.empty()) return false;
    return to_lower(answer).find(needle) != std::string::npos;
}

}  // namespace kgmem::mock
