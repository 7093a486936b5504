#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "t4p/grammar.hpp"
#include "t4p/pattern.hpp"

namespace t4p {

enum class TestResult { kPassing, kFailing, kUndefined };

const char* to_string(TestResult result);
TestResult test_result_from_string(std::string_view text);

/// Evidence from one harness execution. Only a timeout leaves exit_code
/// empty; a signal death is reported as 128 + signal number.
struct RunObservation {
  std::optional<int> exit_code;
  std::string stdout_text;
  std::string stderr_text;
  long long duration_ms = 0;
  bool timed_out = false;
  std::vector<std::string> created_files;
  std::vector<std::string> tokens;
};

/// Output of the fixed-behaviour reference command for the same tokens.
struct ReferenceOutput {
  std::optional<int> exit_code;
  std::string stdout_text;
  std::string stderr_text;
};

enum class Channel { kStdout, kStderr };
enum class Relation { kEq, kNeq };

struct Predicate;

namespace pred {

struct ExitCodeIs {
  Relation relation = Relation::kEq;
  int value = 0;
};
struct StdoutContains {
  std::string text;
};
struct StderrContains {
  std::string text;
};
struct StdoutMatches {
  Pattern pattern;
};
struct FileExists {
  std::string path;
};
struct FeaturePresent {
  std::string nonterminal;
};
/// Holds when any occurrence of the nonterminal equals the text.
struct FeatureEquals {
  std::string nonterminal;
  std::string text;
};
struct RefDiffers {
  Channel channel = Channel::kStdout;
};
struct All {
  std::vector<Predicate> children;
};
struct Any {
  std::vector<Predicate> children;
};
struct Not {
  std::shared_ptr<const Predicate> inner;
};

}  // namespace pred

struct Predicate {
  using Node = std::variant<pred::ExitCodeIs, pred::StdoutContains, pred::StderrContains,
                            pred::StdoutMatches, pred::FileExists, pred::FeaturePresent,
                            pred::FeatureEquals, pred::RefDiffers, pred::All, pred::Any, pred::Not>;
  Node node;
};

namespace pred {

Predicate exit_code(Relation relation, int value);
Predicate stdout_contains(std::string text);
Predicate stderr_contains(std::string text);
Predicate stdout_matches(std::string_view pattern);
Predicate file_exists(std::string path);
Predicate feature_present(std::string nonterminal);
Predicate feature_equals(std::string nonterminal, std::string text);
Predicate ref_differs(Channel channel);
Predicate all(std::vector<Predicate> children);
Predicate any(std::vector<Predicate> children);
Predicate negate(Predicate inner);

}  // namespace pred

struct OracleSpec {
  std::optional<Predicate> undefined_when;
  Predicate failing_when;
};

/// Parses the oracle JSON format. Throws Error(kParse) on malformed JSON and
/// Error(kOracle) on unknown predicate names or ill-formed arguments.
OracleSpec load_oracle_spec(std::string_view text);

bool uses_reference(const OracleSpec& spec);

/// Throws Error(kOracle) when the spec compares against a reference run but
/// the bug declares no reference command.
void check_oracle_binding(const OracleSpec& spec, bool has_reference_cmd);

/// UNDEFINED when the run timed out or undefined_when holds; otherwise
/// FAILING iff failing_when holds. Throws Error(kEvaluation) when a
/// reference comparison is reached without `reference`.
TestResult evaluate(const OracleSpec& spec, const RunObservation& obs, const FeatureMap& feats,
                    const ReferenceOutput* reference = nullptr);

/// Strips trailing whitespace from every line and trailing blank lines.
std::string normalize_trailing_whitespace(std::string_view text);

}  // namespace t4p
