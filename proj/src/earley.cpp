#include <algorithm>
#include <cstdint>
#include <unordered_map>

#include <absl/container/flat_hash_map.h>
#include <absl/container/flat_hash_set.h>

#include "t4p/grammar.hpp"

namespace t4p {
namespace detail {

// Grammar flattened to integer ids. Symbols >= 0 are nonterminal ids,
// symbols < 0 are ~terminal_id.
struct CompiledGrammar {
  std::vector<std::string> names;
  std::vector<std::string> terminals;
  std::vector<std::vector<std::uint32_t>> alts_of;  // nonterminal -> alt ids
  std::vector<std::uint32_t> lhs;                   // alt id -> nonterminal
  std::vector<std::vector<std::int32_t>> body;      // alt id -> symbols
  std::vector<bool> nullable;

  explicit CompiledGrammar(const Grammar& g) {
    std::unordered_map<std::string, std::int32_t> terminal_ids;
    for (const auto& rule : g.rules()) names.push_back(rule.name);
    alts_of.resize(names.size());
    for (std::size_t r = 0; r < g.rules().size(); ++r) {
      for (const auto& alt : g.rules()[r].alternatives) {
        std::vector<std::int32_t> symbols;
        for (const auto& sym : alt) {
          if (sym.is_nonterminal()) {
            symbols.push_back(static_cast<std::int32_t>(g.rule_index(sym.text)));
            continue;
          }
          auto [it, inserted] =
              terminal_ids.try_emplace(sym.text, static_cast<std::int32_t>(terminals.size()));
          if (inserted) terminals.push_back(sym.text);
          symbols.push_back(~it->second);
        }
        alts_of[r].push_back(static_cast<std::uint32_t>(body.size()));
        lhs.push_back(static_cast<std::uint32_t>(r));
        body.push_back(std::move(symbols));
      }
    }
    auto flags = nullable_nonterminals(g);
    for (const auto& name : names) nullable.push_back(flags[name]);
  }
};

std::shared_ptr<const CompiledGrammar> compile(const Grammar& g) { return std::make_shared<CompiledGrammar>(g); }

}  // namespace detail

namespace {

using detail::CompiledGrammar;

struct Item {
  std::uint32_t alt;
  std::uint32_t dot;
  std::uint32_t origin;
};

std::uint64_t pack(const Item& item) {
  return (static_cast<std::uint64_t>(item.alt) << 40) |
         (static_cast<std::uint64_t>(item.dot) << 32) | item.origin;
}

std::uint64_t span_key(std::uint32_t nt, std::size_t begin, std::size_t end) {
  return (static_cast<std::uint64_t>(nt) << 44) | (static_cast<std::uint64_t>(begin) << 22) | end;
}

class Chart {
 public:
  Chart(const CompiledGrammar& cg, std::string_view input)
      : cg_(cg), input_(input), sets_(input.size() + 1) {}

  void run(std::uint32_t start) {
    for (auto alt : cg_.alts_of[start]) add({alt, 0, 0}, 0);
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      for (std::size_t k = 0; k < sets_[i].size(); ++k) {
        Item item = sets_[i][k];
        const auto& body = cg_.body[item.alt];
        if (item.dot == body.size()) {
          complete(item, i);
          continue;
        }
        std::int32_t next = body[item.dot];
        if (next >= 0) {
          for (auto alt : cg_.alts_of[next]) add({alt, 0, static_cast<std::uint32_t>(i)}, i);
          if (cg_.nullable[next]) add(advance(item), i);
        } else {
          const auto& text = cg_.terminals[~next];
          if (i + text.size() <= input_.size() && input_.compare(i, text.size(), text) == 0) {
            add(advance(item), i + text.size());
          }
        }
      }
    }
  }

  bool completed(std::uint32_t nt, std::size_t begin, std::size_t end) const {
    return completed_.contains(span_key(nt, begin, end));
  }

  // Ascending end positions of completed spans of `nt` starting at `begin`.
  const std::vector<std::size_t>& ends(std::uint32_t nt, std::size_t begin) {
    static const std::vector<std::size_t> kNone;
    auto it = ends_.find((static_cast<std::uint64_t>(nt) << 32) | begin);
    return it == ends_.end() ? kNone : it->second;
  }

  void index_ends() {
    for (auto& [key, list] : ends_) std::sort(list.begin(), list.end());
  }

  std::size_t furthest() const {
    std::size_t last = 0;
    for (std::size_t i = 0; i < sets_.size(); ++i) {
      if (!sets_[i].empty()) last = i;
    }
    return last;
  }

 private:
  Item advance(Item item) const { return {item.alt, item.dot + 1, item.origin}; }

  static std::uint64_t at_key(std::size_t at, std::uint64_t low) { return (static_cast<std::uint64_t>(at) << 32) | low; }

  void add(Item item, std::size_t at) {
    if (!seen_.insert({at, pack(item)}).second) return;
    sets_[at].push_back(item);
    const auto& body = cg_.body[item.alt];
    if (item.dot < body.size() && body[item.dot] >= 0) {
      waiting_[at_key(at, static_cast<std::uint32_t>(body[item.dot]))].push_back(item);
    }
  }

  void complete(const Item& item, std::size_t end) {
    std::uint32_t nt = cg_.lhs[item.alt];
    if (completed_.insert(span_key(nt, item.origin, end)).second) {
      ends_[(static_cast<std::uint64_t>(nt) << 32) | item.origin].push_back(end);
    }
    std::uint64_t key = at_key(item.origin, nt);
    if (!waiting_.contains(key)) return;
    // `add` may append to this list (and rehash) when origin == end, so
    // look it up again on every step.
    for (std::size_t k = 0; k < waiting_.at(key).size(); ++k) {
      Item parent = waiting_.at(key)[k];
      add(advance(parent), end);
    }
  }

  const CompiledGrammar& cg_;
  std::string_view input_;
  std::vector<std::vector<Item>> sets_;
  absl::flat_hash_set<std::pair<std::size_t, std::uint64_t>> seen_;
  absl::flat_hash_map<std::uint64_t, std::vector<Item>> waiting_;
  absl::flat_hash_set<std::uint64_t> completed_;
  absl::flat_hash_map<std::uint64_t, std::vector<std::size_t>> ends_;
};

// Top-down extraction over the completed spans. Each span's choice (the
// alternative and the end of every child) is memoized; the tree is built once
// at the end. A span that is already on the stack is blocked (unit/epsilon
// cycles); failures observed while something was blocked are not memoized
// since they depend on the stack.
class Extractor {
 public:
  Extractor(const CompiledGrammar& cg, Chart& chart, std::string_view input)
      : cg_(cg), chart_(chart), input_(input) {}

  bool solve(std::uint32_t nt, std::size_t begin, std::size_t end, bool& tainted) {
    if (!chart_.completed(nt, begin, end)) return false;
    std::uint64_t key = span_key(nt, begin, end);
    if (done_.contains(key)) return true;
    if (failed_.contains(key)) return false;
    if (active_.contains(key)) {
      tainted = true;
      return false;
    }
    active_.insert(key);
    bool local_taint = false;
    for (auto alt : cg_.alts_of[nt]) {
      std::size_t base = scratch_.size();
      if (match(alt, 0, begin, end, ++attempts_, local_taint)) {
        active_.erase(key);
        done_.emplace(key, Choice{alt, pool_.size()});
        pool_.insert(pool_.end(), scratch_.begin() + static_cast<std::ptrdiff_t>(base), scratch_.end());
        scratch_.resize(base);
        return true;
      }
    }
    active_.erase(key);
    if (local_taint) {
      tainted = true;
    } else {
      failed_.insert(key);
    }
    return false;
  }

  DerivationTree tree(std::uint32_t nt, std::size_t begin, std::size_t end) const {
    const Choice& choice = done_.at(span_key(nt, begin, end));
    const auto& body = cg_.body[choice.alt];
    DerivationTree node{Symbol::nonterminal(cg_.names[nt]), {}};
    node.children.reserve(body.size());
    std::size_t pos = begin;
    for (std::size_t k = 0; k < body.size(); ++k) {
      std::size_t child_end = pool_[choice.ends + k];
      if (body[k] < 0) {
        node.children.push_back({Symbol::terminal(cg_.terminals[~body[k]]), {}});
      } else {
        node.children.push_back(tree(static_cast<std::uint32_t>(body[k]), pos, child_end));
      }
      pos = child_end;
    }
    return node;
  }

 private:
  // Child end positions live in pool_ starting at `ends`.
  struct Choice {
    std::uint32_t alt;
    std::size_t ends;
  };

  // Matches body[k..] of `alt` against [pos, end), pushing child ends onto
  // scratch_. Dead (k, pos) states are remembered per attempt.
  bool match(std::uint32_t alt, std::size_t k, std::size_t pos, std::size_t end, std::uint64_t attempt,
             bool& tainted) {
    const auto& body = cg_.body[alt];
    if (k == body.size()) return pos == end;
    std::pair<std::uint64_t, std::uint64_t> state{attempt, (static_cast<std::uint64_t>(k) << 32) | pos};
    if (dead_.contains(state)) return false;
    std::int32_t sym = body[k];
    if (sym < 0) {
      const auto& text = cg_.terminals[~sym];
      if (pos + text.size() <= end && input_.compare(pos, text.size(), text) == 0) {
        scratch_.push_back(pos + text.size());
        if (match(alt, k + 1, pos + text.size(), end, attempt, tainted)) return true;
        scratch_.pop_back();
      }
    } else {
      auto nt = static_cast<std::uint32_t>(sym);
      for (std::size_t e : chart_.ends(nt, pos)) {
        if (e > end) break;
        if (!solve(nt, pos, e, tainted)) continue;
        scratch_.push_back(e);
        if (match(alt, k + 1, e, end, attempt, tainted)) return true;
        scratch_.pop_back();
      }
    }
    dead_.insert(state);
    return false;
  }

  const CompiledGrammar& cg_;
  Chart& chart_;
  std::string_view input_;
  absl::flat_hash_map<std::uint64_t, Choice> done_;
  absl::flat_hash_set<std::uint64_t> failed_;
  absl::flat_hash_set<std::uint64_t> active_;
  absl::flat_hash_set<std::pair<std::uint64_t, std::uint64_t>> dead_;
  std::vector<std::size_t> scratch_;
  std::vector<std::size_t> pool_;
  std::uint64_t attempts_ = 0;
};

}  // namespace

ParseResult parse_input(const Grammar& g, std::string_view input) {
  const CompiledGrammar& cg = *g.compiled_;
  Chart chart(cg, input);
  chart.run(0);
  chart.index_ends();
  ParseResult result;
  result.furthest = chart.furthest();
  if (!chart.completed(0, 0, input.size())) return result;
  Extractor extractor(cg, chart, input);
  bool tainted = false;
  if (extractor.solve(0, 0, input.size(), tainted)) {
    result.tree = extractor.tree(0, 0, input.size());
    result.furthest = input.size();
  }
  return result;
}

}  // namespace t4p
