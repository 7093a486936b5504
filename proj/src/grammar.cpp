#include "t4p/grammar.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "t4p/error.hpp"

namespace t4p {
namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();

bool is_name_start(char c) {
  return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || c == '_';
}

bool is_name_char(char c) { return is_name_start(c) || (c >= '0' && c <= '9') || c == '-'; }

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

[[noreturn]] void syntax_error(std::size_t line, std::size_t column, const std::string& what) {
  throw GrammarError(ErrorKind::kGrammarSyntax, line,
                     "grammar syntax error at line " + std::to_string(line) + ", column " +
                         std::to_string(column + 1) + ": " + what);
}

// Cursor over a single rule line.
class LineParser {
 public:
  LineParser(std::string_view text, std::size_t line) : text_(text), line_(line) {}

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  std::string name() {
    if (done() || peek() != '<') syntax_error(line_, pos_, "expected '<'");
    ++pos_;
    std::size_t begin = pos_;
    if (done() || !is_name_start(peek())) syntax_error(line_, pos_, "invalid nonterminal name");
    while (!done() && is_name_char(peek())) ++pos_;
    if (done() || peek() != '>') syntax_error(line_, pos_, "expected '>'");
    std::string result(text_.substr(begin, pos_ - begin));
    ++pos_;
    return result;
  }

  std::string quoted() {
    std::size_t open = pos_;
    ++pos_;
    std::string result;
    while (true) {
      if (done()) syntax_error(line_, open, "unterminated terminal string");
      char c = text_[pos_++];
      if (c == '"') break;
      if (c != '\\') {
        result += c;
        continue;
      }
      if (done()) syntax_error(line_, pos_, "dangling escape");
      char e = text_[pos_++];
      switch (e) {
        case '"': result += '"'; break;
        case '\\': result += '\\'; break;
        case 'n': result += '\n'; break;
        case 't': result += '\t'; break;
        default: syntax_error(line_, pos_ - 1, std::string("unknown escape \\") + e);
      }
    }
    return result;
  }

  void expect_define() {
    skip_space();
    if (text_.substr(pos_, 3) != "::=") syntax_error(line_, pos_, "expected '::='");
    pos_ += 3;
  }

  std::vector<Expansion> alternatives() {
    std::vector<Expansion> alts(1);
    while (true) {
      skip_space();
      if (done()) break;
      char c = peek();
      if (c == '|') {
        ++pos_;
        alts.emplace_back();
      } else if (c == '"') {
        alts.back().push_back(Symbol::terminal(quoted()));
      } else if (c == '<') {
        alts.back().push_back(Symbol::nonterminal(name()));
      } else {
        syntax_error(line_, pos_, std::string("unexpected character '") + c + "'");
      }
    }
    return alts;
  }

 private:
  std::string_view text_;
  std::size_t line_;
  std::size_t pos_ = 0;
};

std::string escape_terminal(const std::string& text) {
  std::string out = "\"";
  for (char c : text) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::vector<std::size_t> compute_min_depths(const std::vector<Rule>& rules,
                                            const std::map<std::string, std::size_t, std::less<>>& index) {
  std::vector<std::size_t> depth(rules.size(), kUnbounded);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t r = 0; r < rules.size(); ++r) {
      for (const auto& alt : rules[r].alternatives) {
        std::size_t worst = 0;
        for (const auto& sym : alt) {
          if (sym.is_terminal()) continue;
          worst = std::max(worst, depth[index.find(sym.text)->second]);
          if (worst == kUnbounded) break;
        }
        if (worst != kUnbounded && worst + 1 < depth[r]) {
          depth[r] = worst + 1;
          changed = true;
        }
      }
    }
  }
  return depth;
}

}  // namespace

Grammar Grammar::make(std::vector<Rule> rules) {
  Grammar g;
  for (auto& rule : rules) {
    auto [it, inserted] = g.index_.try_emplace(rule.name, g.rules_.size());
    if (inserted) {
      g.rules_.push_back(std::move(rule));
    } else {
      auto& alts = g.rules_[it->second].alternatives;
      std::move(rule.alternatives.begin(), rule.alternatives.end(), std::back_inserter(alts));
    }
  }
  if (g.rules_.empty()) throw GrammarError(ErrorKind::kGrammarSyntax, 0, "grammar has no rules");

  for (const auto& rule : g.rules_) {
    for (const auto& alt : rule.alternatives) {
      for (const auto& sym : alt) {
        if (sym.is_nonterminal() && !g.index_.contains(sym.text)) {
          throw GrammarError(ErrorKind::kUndefinedNonterminal, 0,
                             "undefined nonterminal <" + sym.text + "> used in <" + rule.name + ">");
        }
      }
    }
  }

  std::vector<bool> reached(g.rules_.size(), false);
  std::deque<std::size_t> queue{0};
  reached[0] = true;
  while (!queue.empty()) {
    std::size_t r = queue.front();
    queue.pop_front();
    for (const auto& alt : g.rules_[r].alternatives) {
      for (const auto& sym : alt) {
        if (!sym.is_nonterminal()) continue;
        std::size_t target = g.index_.find(sym.text)->second;
        if (!reached[target]) {
          reached[target] = true;
          queue.push_back(target);
        }
      }
    }
  }
  for (std::size_t r = 0; r < g.rules_.size(); ++r) {
    if (!reached[r]) {
      throw GrammarError(ErrorKind::kUnreachableNonterminal, 0,
                         "nonterminal <" + g.rules_[r].name + "> is unreachable from <" +
                             g.start() + ">");
    }
  }

  auto depth = compute_min_depths(g.rules_, g.index_);
  for (std::size_t r = 0; r < g.rules_.size(); ++r) {
    if (depth[r] == kUnbounded) {
      throw GrammarError(ErrorKind::kNonproductiveNonterminal, 0,
                         "nonterminal <" + g.rules_[r].name + "> derives no finite string");
    }
  }
  g.compiled_ = detail::compile(g);
  return g;
}

std::size_t Grammar::rule_index(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    throw Error(ErrorKind::kUndefinedNonterminal, "no rule for <" + std::string(name) + ">");
  }
  return it->second;
}

bool Grammar::has_rule(std::string_view name) const { return index_.find(name) != index_.end(); }

Grammar load_grammar(std::string_view text) {
  std::vector<Rule> rules;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);

    std::size_t first = 0;
    while (first < line.size() && is_space(line[first])) ++first;
    if (first == line.size() || line[first] == '#') continue;

    LineParser parser(line, line_no);
    parser.skip_space();
    Rule rule;
    rule.name = parser.name();
    parser.expect_define();
    rule.alternatives = parser.alternatives();
    rules.push_back(std::move(rule));
  }
  return Grammar::make(std::move(rules));
}

Grammar load_grammar_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::kLoad, "cannot read grammar file " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return load_grammar(buffer.str());
}

std::string serialize_grammar(const Grammar& g) {
  std::string out;
  for (const auto& rule : g.rules()) {
    out += "<" + rule.name + "> ::=";
    for (std::size_t a = 0; a < rule.alternatives.size(); ++a) {
      if (a > 0) out += " |";
      for (const auto& sym : rule.alternatives[a]) {
        out += ' ';
        out += sym.is_terminal() ? escape_terminal(sym.text) : "<" + sym.text + ">";
      }
    }
    out += '\n';
  }
  return out;
}

std::string frontier(const DerivationTree& tree) {
  if (tree.symbol.is_terminal()) return tree.symbol.text;
  std::string out;
  for (const auto& child : tree.children) out += frontier(child);
  return out;
}

std::size_t tree_depth(const DerivationTree& tree) {
  if (tree.symbol.is_terminal()) return 0;
  std::size_t deepest = 0;
  for (const auto& child : tree.children) deepest = std::max(deepest, tree_depth(child));
  return deepest + 1;
}

bool is_valid_derivation(const Grammar& g, const DerivationTree& tree) {
  if (tree.symbol.is_terminal()) return tree.children.empty();
  if (!g.has_rule(tree.symbol.text)) return false;
  const auto& alts = g.rule(tree.symbol.text).alternatives;
  bool shape_ok = std::any_of(alts.begin(), alts.end(), [&](const Expansion& alt) {
    if (alt.size() != tree.children.size()) return false;
    for (std::size_t i = 0; i < alt.size(); ++i) {
      if (!(alt[i] == tree.children[i].symbol)) return false;
    }
    return true;
  });
  if (!shape_ok) return false;
  return std::all_of(tree.children.begin(), tree.children.end(),
                     [&](const DerivationTree& child) { return is_valid_derivation(g, child); });
}

namespace {

// Returns the subtree frontier so each node's text is computed once.
std::string collect_features(const DerivationTree& tree, FeatureMap& out) {
  if (tree.symbol.is_terminal()) return tree.symbol.text;
  auto& slot = out[tree.symbol.text];
  std::size_t position = slot.size();
  slot.emplace_back();
  std::string text;
  for (const auto& child : tree.children) text += collect_features(child, out);
  out[tree.symbol.text][position] = text;
  return text;
}

}  // namespace

FeatureMap features(const DerivationTree& tree) {
  FeatureMap out;
  collect_features(tree, out);
  return out;
}

std::map<std::string, std::size_t> min_depths(const Grammar& g) {
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t r = 0; r < g.rules().size(); ++r) index.emplace(g.rules()[r].name, r);
  auto depth = compute_min_depths(g.rules(), index);
  std::map<std::string, std::size_t> out;
  for (std::size_t r = 0; r < g.rules().size(); ++r) out.emplace(g.rules()[r].name, depth[r]);
  return out;
}

std::map<std::string, bool> nullable_nonterminals(const Grammar& g) {
  std::map<std::string, bool> nullable;
  for (const auto& rule : g.rules()) nullable[rule.name] = false;
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : g.rules()) {
      if (nullable[rule.name]) continue;
      for (const auto& alt : rule.alternatives) {
        bool all = std::all_of(alt.begin(), alt.end(), [&](const Symbol& s) {
          return s.is_terminal() ? s.text.empty() : nullable[s.text];
        });
        if (all) {
          nullable[rule.name] = true;
          changed = true;
          break;
        }
      }
    }
  }
  return nullable;
}

}  // namespace t4p
