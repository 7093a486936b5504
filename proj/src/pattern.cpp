#include "t4p/pattern.hpp"

#include "t4p/error.hpp"

namespace t4p {
namespace {

[[noreturn]] void bad_pattern(std::string_view source, const std::string& why) {
  throw Error(ErrorKind::kOracle, "unsupported pattern '" + std::string(source) + "': " + why);
}

}  // namespace

Pattern::Pattern(std::string_view source) : source_(source) {
  std::size_t i = 0;
  std::size_t end = source.size();
  if (i < end && source[i] == '^') {
    anchored_start_ = true;
    ++i;
  }
  if (end > i && source[end - 1] == '$' && !(end >= 2 && source[end - 2] == '\\')) {
    anchored_end_ = true;
    --end;
  }
  while (i < end) {
    char c = source[i];
    Atom atom;
    switch (c) {
      case '.':
        atom.kind = Atom::Kind::kAny;
        ++i;
        break;
      case '\\':
        if (i + 1 >= end) bad_pattern(source, "dangling escape");
        atom.literal = source[i + 1];
        i += 2;
        break;
      case '[': {
        atom.kind = Atom::Kind::kClass;
        ++i;
        if (i < end && source[i] == '^') {
          atom.negated = true;
          ++i;
        }
        bool first = true;
        while (i < end && (source[i] != ']' || first)) {
          char lo = source[i];
          if (lo == '\\') {
            if (i + 1 >= end) bad_pattern(source, "dangling escape in class");
            lo = source[++i];
          }
          char hi = lo;
          if (i + 2 < end && source[i + 1] == '-' && source[i + 2] != ']') {
            hi = source[i + 2];
            i += 2;
            if (hi < lo) bad_pattern(source, "reversed range in class");
          }
          atom.ranges.emplace_back(lo, hi);
          ++i;
          first = false;
        }
        if (i >= end) bad_pattern(source, "unterminated class");
        ++i;
        break;
      }
      case '*':
        bad_pattern(source, "'*' must follow an atom");
      case '^':
      case '$':
        bad_pattern(source, "anchors are only allowed at the ends");
      case '+':
      case '?':
      case '(':
      case ')':
      case '|':
      case '{':
      case '}':
        bad_pattern(source, std::string("operator '") + c + "' is not supported");
      default:
        atom.literal = c;
        ++i;
    }
    if (i < end && source[i] == '*') {
      atom.star = true;
      ++i;
    }
    atoms_.push_back(std::move(atom));
  }
}

bool Pattern::Atom::accepts(char c) const {
  switch (kind) {
    case Kind::kLiteral:
      return c == literal;
    case Kind::kAny:
      return c != '\n';
    case Kind::kClass: {
      bool in = false;
      for (auto [lo, hi] : ranges) {
        if (c >= lo && c <= hi) {
          in = true;
          break;
        }
      }
      return in != negated;
    }
  }
  return false;
}

bool Pattern::match_here(std::size_t atom, std::string_view text, std::size_t pos) const {
  while (atom < atoms_.size()) {
    const Atom& a = atoms_[atom];
    if (a.star) {
      // Greedy with backtracking; bounded by the remaining text.
      std::size_t run = pos;
      while (run < text.size() && a.accepts(text[run])) ++run;
      for (std::size_t stop = run + 1; stop-- > pos;) {
        if (match_here(atom + 1, text, stop)) return true;
      }
      return false;
    }
    if (pos >= text.size() || !a.accepts(text[pos])) return false;
    ++atom;
    ++pos;
  }
  if (!anchored_end_) return true;
  return pos == text.size() || (pos + 1 == text.size() && text[pos] == '\n');
}

bool Pattern::search(std::string_view text) const {
  if (anchored_start_) return match_here(0, text, 0);
  for (std::size_t start = 0; start <= text.size(); ++start) {
    if (match_here(0, text, start)) return true;
  }
  return false;
}

}  // namespace t4p
