#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace t4p {

// Small portable pattern dialect for oracles: literal characters, `\x`
// (literal x), `.`, `[...]` classes with ranges and leading `^` negation,
// `*` after any single atom, `^` at the start and `$` at the end. `.` does
// not match a newline; `$` also matches before one final newline. Matching
// searches for the pattern anywhere unless anchored.
class Pattern {
 public:
  /// Throws Error(kOracle) on constructs outside the dialect.
  explicit Pattern(std::string_view source);

  bool search(std::string_view text) const;
  const std::string& source() const noexcept { return source_; }

 private:
  struct Atom {
    enum class Kind { kLiteral, kAny, kClass };
    Kind kind = Kind::kLiteral;
    char literal = 0;
    bool negated = false;
    std::vector<std::pair<char, char>> ranges;
    bool star = false;

    bool accepts(char c) const;
  };

  bool match_here(std::size_t atom, std::string_view text, std::size_t pos) const;

  std::string source_;
  std::vector<Atom> atoms_;
  bool anchored_start_ = false;
  bool anchored_end_ = false;
};

}  // namespace t4p
