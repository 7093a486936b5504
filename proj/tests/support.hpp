#pragma once

// Shared helpers for the unit and acceptance suites: fixture locations, the
// independent grammar oracles, and the synthetic observation corpus.

#include <cstddef>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "t4p/execution.hpp"
#include "t4p/grammar.hpp"
#include "t4p/oracle.hpp"

namespace t4p::testing {

std::filesystem::path data_dir();
std::filesystem::path registry_dir();
std::filesystem::path grammar_path(const std::string& name);
Grammar toy_grammar(const std::string& name);

/// The five toy grammars under tests/data/grammars.
const std::vector<std::string>& toy_grammar_names();

/// Every string with a derivation tree of height <= depth (terminal leaves
/// at height 0), computed bottom-up by set concatenation.
std::set<std::string> enumerate_language(const Grammar& g, std::size_t depth);

/// Membership by least fixpoint over substring spans. Slow but shares no
/// code with the Earley parser.
bool fixpoint_member(const Grammar& g, const std::string& w);

/// Characters occurring in any terminal of g.
std::string terminal_alphabet(const Grammar& g);

/// All strings over `alphabet` of length <= max_len.
std::vector<std::string> all_strings(const std::string& alphabet, std::size_t max_len);

struct OracleCase {
  std::string name;
  RunObservation obs;
  FeatureMap features;
  bool has_reference = false;
  ReferenceOutput reference;
};

/// Fixed synthetic observations covering exit codes, stream contents,
/// created files, features and reference outputs, including timeouts.
std::vector<OracleCase> observation_corpus();

/// One or more instances of every predicate constructor.
std::vector<std::pair<std::string, Predicate>> predicate_catalogue();

/// The stub registry under tests/data, loaded once.
const Registry& stub_registry();

/// Checks out and compiles one variant of a stub bug into `dest`.
Workspace compiled_workspace(const std::string& project, Variant variant, const std::filesystem::path& dest);

/// Sets an environment variable for the lifetime of the object.
class ScopedEnv {
 public:
  ScopedEnv(std::string name, const std::string& value);
  ~ScopedEnv();
  ScopedEnv(const ScopedEnv&) = delete;
  ScopedEnv& operator=(const ScopedEnv&) = delete;

 private:
  std::string name_;
  bool had_ = false;
  std::string old_;
};

}  // namespace t4p::testing
