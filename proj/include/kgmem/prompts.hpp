#pragma once

#include <map>
#include <string>
#include <string_view>

namespace kgmem {

// Text with "{{slot}}" placeholders.
class PromptTemplate {
public:
    PromptTemplate() = default;
    explicit PromptTemplate(std::string text) : text_(std::move(text)) {}

    // Reads `path` when non-empty, otherwise uses `fallback`. Throws
    // ConfigError when the file is unreadable or lacks a required slot.
    static PromptTemplate load_or(const std::string& path, std::string_view fallback,
                                  std::initializer_list<std::string_view> required_slots = {});

    std::string render(const std::map<std::string, std::string>& slots) const;
    bool has_slot(std::string_view name) const;
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
};

namespace prompts {
std::string_view extraction();
std::string_view summary();
std::string_view answer();
std::string_view judge();
}  // namespace prompts

}  // namespace kgmem
