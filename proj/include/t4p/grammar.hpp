#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace t4p {

/// A grammar symbol: either a literal terminal string or a reference to a
/// nonterminal by name (without the angle brackets).
struct Symbol {
  enum class Kind { kTerminal, kNonterminal };

  Kind kind = Kind::kTerminal;
  std::string text;

  static Symbol terminal(std::string text) { return {Kind::kTerminal, std::move(text)}; }
  static Symbol nonterminal(std::string name) { return {Kind::kNonterminal, std::move(name)}; }

  bool is_terminal() const noexcept { return kind == Kind::kTerminal; }
  bool is_nonterminal() const noexcept { return kind == Kind::kNonterminal; }

  friend bool operator==(const Symbol&, const Symbol&) = default;
};

using Expansion = std::vector<Symbol>;

struct Rule {
  std::string name;
  std::vector<Expansion> alternatives;

  friend bool operator==(const Rule&, const Rule&) = default;
};

class Grammar;
struct ParseResult;

namespace detail {
struct CompiledGrammar;
std::shared_ptr<const CompiledGrammar> compile(const Grammar& g);
}  // namespace detail

/// A validated context-free grammar. Rules keep file order and alternatives
/// keep declaration order; both are significant (tie-breaking in parsing and
/// generation depends on them). Construct through load_grammar or
/// Grammar::make, which run the same validation.
class Grammar {
 public:
  /// Validates and builds. Throws GrammarError on undefined, unreachable or
  /// nonproductive nonterminals. The start symbol is the first rule's name.
  static Grammar make(std::vector<Rule> rules);

  const std::string& start() const noexcept { return rules_.front().name; }
  const std::vector<Rule>& rules() const noexcept { return rules_; }
  std::size_t rule_index(std::string_view name) const;
  const Rule& rule(std::string_view name) const { return rules_[rule_index(name)]; }
  bool has_rule(std::string_view name) const;

  friend bool operator==(const Grammar& a, const Grammar& b) { return a.rules_ == b.rules_; }

 private:
  Grammar() = default;
  friend ParseResult parse_input(const Grammar& g, std::string_view input);

  std::vector<Rule> rules_;
  std::map<std::string, std::size_t, std::less<>> index_;
  // Parser tables, built once by make() and shared between copies.
  std::shared_ptr<const detail::CompiledGrammar> compiled_;
};

/// Parses the BNF text format: one rule per line, `<name> ::= alt | alt`,
/// quoted terminals with \" \\ \n \t escapes, `#` comments.
Grammar load_grammar(std::string_view text);
Grammar load_grammar_file(const std::string& path);

/// Canonical text; load_grammar(serialize_grammar(g)) == g.
std::string serialize_grammar(const Grammar& g);

struct DerivationTree {
  Symbol symbol;
  std::vector<DerivationTree> children;

  friend bool operator==(const DerivationTree&, const DerivationTree&) = default;
};

/// Left-to-right concatenation of the terminal leaves.
std::string frontier(const DerivationTree& tree);

/// Height with terminal leaves at 0, matching min_depths.
std::size_t tree_depth(const DerivationTree& tree);

/// Checks the structural invariant: every nonterminal node's children match
/// one alternative of its rule, in order.
bool is_valid_derivation(const Grammar& g, const DerivationTree& tree);

struct ParseResult {
  std::optional<DerivationTree> tree;
  /// Furthest input position the recognizer reached; meaningful on failure.
  std::size_t furthest = 0;

  explicit operator bool() const noexcept { return tree.has_value(); }
};

/// Earley recognition followed by deterministic tree extraction: the lowest
/// alternative index wins, then the earliest split of each child span.
ParseResult parse_input(const Grammar& g, std::string_view input);

using FeatureMap = std::map<std::string, std::vector<std::string>>;

/// Nonterminal name -> frontier of every subtree labelled with it, in
/// pre-order (leftmost occurrence first, outer before inner).
FeatureMap features(const DerivationTree& tree);

/// Least fixpoint of the minimal derivation height of each nonterminal.
std::map<std::string, std::size_t> min_depths(const Grammar& g);

/// Nonterminals that derive the empty string.
std::map<std::string, bool> nullable_nonterminals(const Grammar& g);

struct PrecisionRecall {
  double precision = 0.0;
  double recall = 0.0;
};

/// Sampling estimate: precision is the share of `samples` seeded candidate
/// derivations accepted by `truth`; recall the share of truth derivations
/// accepted by `candidate`.
PrecisionRecall grammar_precision_recall(const Grammar& candidate, const Grammar& truth,
                                         std::size_t samples, std::uint64_t seed);

}  // namespace t4p
