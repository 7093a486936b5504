#include "support.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#ifndef T4P_TEST_DATA
#error "T4P_TEST_DATA must point at tests/data"
#endif

namespace t4p::testing {
namespace fs = std::filesystem;

fs::path data_dir() { return T4P_TEST_DATA; }
fs::path registry_dir() { return data_dir() / "registry"; }

const Registry& stub_registry() {
  static const Registry registry = load_registry(registry_dir());
  return registry;
}

Workspace compiled_workspace(const std::string& project, Variant variant, const fs::path& dest) {
  Workspace ws = checkout(get_bug(stub_registry(), project, 1), variant, dest);
  compile(ws);
  return ws;
}
fs::path grammar_path(const std::string& name) { return data_dir() / "grammars" / (name + ".bnf"); }
Grammar toy_grammar(const std::string& name) { return load_grammar_file(grammar_path(name).string()); }

const std::vector<std::string>& toy_grammar_names() {
  static const std::vector<std::string> names = {"digit", "calc", "markup", "middle", "nullable"};
  return names;
}

std::set<std::string> enumerate_language(const Grammar& g, std::size_t depth) {
  std::map<std::string, std::set<std::string>> prev;
  for (const auto& rule : g.rules()) prev[rule.name];
  for (std::size_t d = 1; d <= depth; ++d) {
    std::map<std::string, std::set<std::string>> next;
    for (const auto& rule : g.rules()) {
      auto& out = next[rule.name];
      for (const auto& alt : rule.alternatives) {
        std::set<std::string> partial = {""};
        for (const auto& sym : alt) {
          std::set<std::string> grown;
          if (sym.is_terminal()) {
            for (const auto& p : partial) grown.insert(p + sym.text);
          } else {
            for (const auto& p : partial) {
              for (const auto& s : prev[sym.text]) grown.insert(p + s);
            }
          }
          partial = std::move(grown);
        }
        out.insert(partial.begin(), partial.end());
      }
    }
    prev = std::move(next);
  }
  return prev[g.start()];
}

bool fixpoint_member(const Grammar& g, const std::string& w) {
  const std::size_t n = w.size();
  // spans[A][i] = set of j with A =>* w[i, j)
  std::map<std::string, std::vector<std::set<std::size_t>>> spans;
  for (const auto& rule : g.rules()) spans[rule.name].resize(n + 1);
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& rule : g.rules()) {
      for (std::size_t i = 0; i <= n; ++i) {
        for (const auto& alt : rule.alternatives) {
          std::set<std::size_t> at = {i};
          for (const auto& sym : alt) {
            std::set<std::size_t> next;
            for (std::size_t p : at) {
              if (sym.is_terminal()) {
                if (w.compare(p, sym.text.size(), sym.text) == 0 && p + sym.text.size() <= n) {
                  next.insert(p + sym.text.size());
                }
              } else {
                const auto& ends = spans[sym.text][p];
                next.insert(ends.begin(), ends.end());
              }
            }
            at = std::move(next);
          }
          for (std::size_t j : at) changed |= spans[rule.name][i].insert(j).second;
        }
      }
    }
  }
  return spans[g.start()][0].count(n) > 0;
}

std::string terminal_alphabet(const Grammar& g) {
  std::set<char> chars;
  for (const auto& rule : g.rules()) {
    for (const auto& alt : rule.alternatives) {
      for (const auto& sym : alt) {
        if (sym.is_terminal()) chars.insert(sym.text.begin(), sym.text.end());
      }
    }
  }
  return std::string(chars.begin(), chars.end());
}

std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len) {
  std::vector<std::string> out = {""};
  std::size_t begin = 0;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::size_t end = out.size();
    for (std::size_t k = begin; k < end; ++k) {
      for (char c : alphabet) out.push_back(out[k] + c);
    }
    begin = end;
  }
  return out;
}

std::vector<OracleCase> observation_corpus() {
  struct Exit {
    std::optional<int> code;
    bool timed_out;
  };
  const std::vector<Exit> exits = {{0, false}, {1, false}, {2, false}, {139, false}, {std::nullopt, true}};
  const std::vector<std::string> stdouts = {"", "2\n", "error: boom\n", "ok  \n"};
  const std::vector<std::string> stderrs = {"", "Traceback (most recent call last):\nValueError\n"};
  const std::vector<std::vector<std::string>> files = {{}, {"out.txt"}, {"logs/run.log"}};
  const std::vector<FeatureMap> feature_sets = {
      {}, {{"int", {"1", "2", "3"}}}, {{"op", {"-", "-"}}, {"int", {"8", "2", "3"}}}};
  enum class Ref { kNone, kSame, kDifferent, kTrailingSpace };
  const std::vector<Ref> refs = {Ref::kNone, Ref::kSame, Ref::kDifferent, Ref::kTrailingSpace};

  std::vector<OracleCase> corpus;
  std::size_t i = 0;
  for (const auto& exit : exits) {
    for (const auto& out : stdouts) {
      for (Ref ref : refs) {
        OracleCase c;
        c.obs.exit_code = exit.code;
        c.obs.timed_out = exit.timed_out;
        c.obs.stdout_text = out;
        c.obs.stderr_text = stderrs[i % stderrs.size()];
        c.obs.created_files = files[i % files.size()];
        c.obs.duration_ms = static_cast<long long>(i);
        c.features = feature_sets[(i / 2) % feature_sets.size()];
        if (ref != Ref::kNone) {
          c.has_reference = true;
          c.reference.exit_code = 0;
          c.reference.stderr_text = ref == Ref::kDifferent ? "warning\n" : c.obs.stderr_text;
          c.reference.stdout_text = ref == Ref::kSame            ? out
                                    : ref == Ref::kTrailingSpace ? out + "  \n\n"
                                                                 : out + "3\n";
        }
        std::ostringstream name;
        name << "case" << i;
        c.name = name.str();
        corpus.push_back(std::move(c));
        ++i;
      }
    }
  }
  // A killed run that still reported an exit status.
  OracleCase killed;
  killed.name = "timed_out_with_status";
  killed.obs.exit_code = 137;
  killed.obs.timed_out = true;
  killed.obs.stdout_text = "2\n";
  corpus.push_back(killed);
  return corpus;
}

std::vector<std::pair<std::string, Predicate>> predicate_catalogue() {
  using namespace pred;
  return {
      {"exit_eq_0", exit_code(Relation::kEq, 0)},
      {"exit_neq_0", exit_code(Relation::kNeq, 0)},
      {"exit_eq_139", exit_code(Relation::kEq, 139)},
      {"stdout_contains_2", stdout_contains("2")},
      {"stdout_contains_empty", stdout_contains("")},
      {"stderr_contains_traceback", stderr_contains("Traceback")},
      {"stdout_matches_number", stdout_matches("^[0-9]*$")},
      {"stdout_matches_err", stdout_matches("err.r")},
      {"stdout_matches_ok_spaces", stdout_matches("ok *$")},
      {"file_exists_out", file_exists("out.txt")},
      {"file_exists_log", file_exists("logs/run.log")},
      {"feature_present_int", feature_present("int")},
      {"feature_present_none", feature_present("missing")},
      {"feature_equals_op", feature_equals("op", "-")},
      {"feature_equals_int", feature_equals("int", "3")},
      {"ref_differs_stdout", ref_differs(Channel::kStdout)},
      {"ref_differs_stderr", ref_differs(Channel::kStderr)},
      {"all_empty", all({})},
      {"any_empty", any({})},
      {"all_exit_stdout", all({exit_code(Relation::kEq, 0), stdout_contains("2")})},
      {"any_files", any({file_exists("out.txt"), file_exists("logs/run.log")})},
      {"not_exit", negate(exit_code(Relation::kEq, 0))},
      {"not_not_feature", negate(negate(feature_present("op")))},
      {"nested_ref", any({all({exit_code(Relation::kEq, 0), ref_differs(Channel::kStdout)}),
                          negate(stdout_matches("."))})},
  };
}

ScopedEnv::ScopedEnv(std::string name, const std::string& value) : name_(std::move(name)) {
  if (const char* old = std::getenv(name_.c_str())) {
    had_ = true;
    old_ = old;
  }
  ::setenv(name_.c_str(), value.c_str(), 1);
}

ScopedEnv::~ScopedEnv() {
  if (had_) {
    ::setenv(name_.c_str(), old_.c_str(), 1);
  } else {
    ::unsetenv(name_.c_str());
  }
}

}  // namespace t4p::testing
