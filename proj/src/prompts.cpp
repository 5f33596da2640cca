#include "kgmem/prompts.hpp"

#include "kgmem/error.hpp"
#include "kgmem_embedded_prompts.hpp"

#include <fstream>
#include <sstream>

namespace kgmem {

PromptTemplate PromptTemplate::load_or(const std::string& path, std::string_view fallback,
                                       std::initializer_list<std::string_view> required_slots) {
    PromptTemplate t;
    if (path.empty()) {
        t.text_ = std::string(fallback);
    } else {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read prompt template " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        t.text_ = ss.str();
    }
    for (auto slot : required_slots) {
        if (!t.has_slot(slot)) {
            throw ConfigError("prompt template " + (path.empty() ? std::string("<built-in>") : path) +
                              " lacks slot {{" + std::string(slot) + "}}");
        }
    }
    return t;
}

bool PromptTemplate::has_slot(std::string_view name) const {
    return text_.find("{{" + std::string(name) + "}}") != std::string::npos;
}

std::string PromptTemplate::render(const std::map<std::string, std::string>& slots) const {
    std::string out;
    out.reserve(text_.size());
    std::size_t pos = 0;
    while (pos < text_.size()) {
        const auto open = text_.find("{{", pos);
        if (open == std::string::npos) break;
        const auto close = text_.find("}}", open + 2);
        if (close == std::string::npos) break;
        out.append(text_, pos, open - pos);
        const std::string name = text_.substr(open + 2, close - open - 2);
        const auto it = slots.find(name);
        if (it != slots.end()) {
            out += it->second;
        } else {
            out.append(text_, open, close + 2 - open);
        }
        pos = close + 2;
    }
    out.append(text_, pos, std::string::npos);
    return out;
}

namespace prompts {
std::string_view extraction() { return embedded::kExtractTriplets; }
std::string_view summary() { return embedded::kSummarize; }
std::string_view answer() { return embedded::kAnswer; }
std::string_view judge() { return embedded::kJudge; }
}  // namespace prompts

}  // namespace kgmem
