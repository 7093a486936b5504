#include "t4p/tokenize.hpp"

#include <algorithm>

namespace t4p {
namespace {

bool is_blank(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f'; }

bool needs_quoting(const std::string& token) {
  return token.empty() || std::any_of(token.begin(), token.end(), [](char c) {
           return is_blank(c) || c == '"';
         });
}

}  // namespace

std::vector<std::string> tokenize(std::string_view line) {
  std::vector<std::string> tokens;
  std::string current;
  bool in_token = false;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '\\' && i + 1 < line.size()) {
        current += line[++i];
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
      in_token = true;
    } else if (is_blank(c)) {
      if (in_token) tokens.push_back(std::move(current));
      current.clear();
      in_token = false;
    } else {
      current += c;
      in_token = true;
    }
  }
  if (in_token) tokens.push_back(std::move(current));
  return tokens;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (t > 0) out += ' ';
    const auto& token = tokens[t];
    if (!needs_quoting(token)) {
      out += token;
      continue;
    }
    out += '"';
    for (char c : token) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  return out;
}

}  // namespace t4p
