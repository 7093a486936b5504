#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "t4p/execution.hpp"
#include "t4p/grammar.hpp"
#include "t4p/registry.hpp"

namespace t4p {

struct GenLimits {
  /// Below this depth alternatives are drawn uniformly; at or beyond it the
  /// alternative with the smallest minimal depth is forced.
  std::size_t max_depth = 32;
  /// Rejection-sampling cap per requested test.
  std::size_t max_attempts = 200;
};

/// Seeded random derivation. Deterministic per (g, seed, limits).
DerivationTree generate_tree(const Grammar& g, std::uint64_t seed, const GenLimits& limits = {});

/// Independent stream seed for one (slot, attempt) of a generation run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot, std::uint64_t attempt);

/// Number of FAILING tests in a set of n with the given ratio: ceil(n·ratio),
/// robust to floating-point noise in the product.
std::size_t failing_quota(std::size_t n, double failing_ratio);

struct LabeledTest {
  std::vector<std::string> tokens;
  Label label = Label::kPassing;
  DerivationTree derivation;
  LabelingMode origin = LabelingMode::kGrammar;
};

/// Produces candidates for single quota slots. Each (slot, attempt) pair
/// maps to its own random stream, so results do not depend on the order in
/// which slots are filled.
class LabeledTestSource {
 public:
  /// ORACLE_FILTER bugs need ctx.buggy to point at a compiled BUGGY workspace.
  LabeledTestSource(const BugEntry& bug, const ExecutionContext& ctx, GenLimits limits);

  /// The candidate for (slot, attempt) if it qualifies for `want`.
  std::optional<LabeledTest> draw(Label want, std::uint64_t seed, std::size_t slot, std::size_t attempt) const;

  const BugAssets& assets() const noexcept { return assets_; }
  const GenLimits& limits() const noexcept { return limits_; }

 private:
  BugEntry bug_;
  ExecutionContext ctx_;
  GenLimits limits_;
  BugAssets assets_;
};

/// Exactly n tests, failing_quota(n, ratio) of them FAILING (listed first).
/// Throws GenerationExhausted when a slot stays unfilled after
/// limits.max_attempts candidates.
std::vector<LabeledTest> generate_labeled_set(const BugEntry& bug, std::size_t n, double failing_ratio,
                                              std::uint64_t seed, const ExecutionContext& ctx,
                                              const GenLimits& limits = {});

/// Writes t4p_systemtest_<i>_<label> files plus the tests.jsonl sidecar.
std::vector<std::filesystem::path> write_system_tests(const std::filesystem::path& dir,
                                                      const std::vector<LabeledTest>& tests);

std::string system_test_file_name(std::size_t index, Label label);

std::vector<SystemTestCase> cases_from_labeled(const std::vector<LabeledTest>& tests);
std::vector<TestCaseRecord> to_records(const std::vector<LabeledTest>& tests);

/// Runs each test on the buggy workspace and compares the oracle verdict
/// with its label. The report's all_match() is the overall verdict.
TestReport verify_labels(const BugEntry& bug, const std::vector<TestCaseRecord>& tests,
                         const ExecutionContext& ctx);
TestReport verify_labels(const BugEntry& bug, const std::vector<LabeledTest>& tests,
                         const ExecutionContext& ctx);

}  // namespace t4p
