#pragma once

#include "kgmem/prompts.hpp"
#include "kgmem/provider.hpp"

#include <optional>
#include <string>

namespace kgmem {

struct SummaryUpdate {
    std::optional<std::string> prior_summary;
    std::string user_text;
    std::string assistant_text;
};

struct SummaryResult {
    std::string text;
    TokenUsage usage;
};

// Folds one (user, assistant) exchange into the session summary with a single
// provider call. Never looks at earlier turns.
class Summarizer {
public:
    Summarizer(PromptTemplate prompt, int max_output_tokens);

    SummaryResult update_summary(const SummaryUpdate& input, Provider& provider) const;

    int max_output_tokens() const noexcept { return max_output_tokens_; }

private:
    PromptTemplate prompt_;
    int max_output_tokens_;
};

}  // namespace kgmem
