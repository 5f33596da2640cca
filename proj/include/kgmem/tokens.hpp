#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace kgmem {

std::vector<std::string_view> split_whitespace(std::string_view text);

// Token accounting used everywhere in the engine: number of whitespace-separated tokens.
std::size_t count_tokens(std::string_view text);

std::string to_lower(std::string_view text);
std::string trim(std::string_view text);

// First `n` whitespace tokens joined by single spaces.
std::string first_tokens(std::string_view text, std::size_t n);
// Last `n` whitespace tokens joined by single spaces.
std::string last_tokens(std::string_view text, std::size_t n);

}  // namespace kgmem
