#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace t4p {

// Shell-like splitting of a derived command line into argv tokens: unquoted
// whitespace separates tokens, `"` groups, and inside a group `\` escapes
// the next character. Outside groups a backslash is an ordinary character.
std::vector<std::string> tokenize(std::string_view line);

// Inverse of tokenize up to whitespace normalization: tokens joined by one
// space, quoting only the tokens that need it.
std::string detokenize(const std::vector<std::string>& tokens);

}  // namespace t4p
