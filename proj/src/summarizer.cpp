#include "kgmem/summarizer.hpp"

#include "kgmem/error.hpp"
#include "kgmem/tokens.hpp"

namespace kgmem {

Summarizer::Summarizer(PromptTemplate prompt, int max_output_tokens)
    : prompt_(std::move(prompt)), max_output_tokens_(max_output_tokens) {
    if (max_output_tokens_ < 1) throw ConfigError("summary.max_tokens must be >= 1");
}

SummaryResult Summarizer::update_summary(const SummaryUpdate& input, Provider& provider) const {
    if (trim(input.user_text).empty() || trim(input.assistant_text).empty()) {
        throw ValidationError("summary update needs both user and assistant text");
    }
    ChatExchange ex;
    ex.system_text = "You summarize conversations for a long-term memory store.";
    ex.slots = {
        {"prior_summary", input.prior_summary.value_or("")},
        {"user_text", input.user_text},
        {"assistant_text", input.assistant_text},
        {"turn", "User: " + input.user_text + "\nAssistant: " + input.assistant_text},
    };
    std::map<std::string, std::string> shown = ex.slots;
    if (!input.prior_summary) shown["prior_summary"] = "(none yet)";
    ex.user_text = prompt_.render(shown);
    ex.max_output_tokens = max_output_tokens_;
    ex.temperature = 0.0;
    ex.purpose = ChatPurpose::Summarize;

    auto result = provider.chat_complete(ex);
    auto text = trim(result.text);
    if (text.empty()) {
        throw ProviderError(ProviderErrorKind::MalformedResponse, "summarizer returned empty text");
    }
    return SummaryResult{std::move(text), result.usage};
}

}  // namespace kgmem
