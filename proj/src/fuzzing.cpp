#include "t4p/fuzzing.hpp"

#include <cmath>
#include <random>

#include "io.hpp"
#include "t4p/error.hpp"
#include "t4p/tokenize.hpp"

namespace t4p {
namespace fs = std::filesystem;

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class TreeGenerator {
 public:
  TreeGenerator(const Grammar& g, std::uint64_t seed, const GenLimits& limits)
      : g_(g), limits_(limits), depths_(min_depths(g)) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
    engine_.seed(seq);
  }

  DerivationTree expand(const std::string& name, std::size_t depth) {
    const auto& alts = g_.rule(name).alternatives;
    std::size_t choice = 0;
    if (depth >= limits_.max_depth) {
      choice = cheapest(alts);
    } else if (alts.size() > 1) {
      // mt19937_64 output is fully specified; the distribution objects are
      // not, so reduce by modulo to stay reproducible across stdlibs.
      choice = static_cast<std::size_t>(engine_() % alts.size());
    }
    DerivationTree node{Symbol::nonterminal(name), {}};
    for (const auto& sym : alts[choice]) {
      if (sym.is_terminal()) {
        node.children.push_back({sym, {}});
      } else {
        node.children.push_back(expand(sym.text, depth + 1));
      }
    }
    return node;
  }

 private:
  std::size_t cost(const Expansion& alt) const {
    std::size_t worst = 0;
    for (const auto& sym : alt) {
      if (sym.is_nonterminal()) worst = std::max(worst, depths_.at(sym.text));
    }
    return worst;
  }

  std::size_t cheapest(const std::vector<Expansion>& alts) const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < alts.size(); ++i) {
      if (cost(alts[i]) < cost(alts[best])) best = i;
    }
    return best;
  }

  const Grammar& g_;
  GenLimits limits_;
  std::map<std::string, std::size_t> depths_;
  std::mt19937_64 engine_;
};

}  // namespace

DerivationTree generate_tree(const Grammar& g, std::uint64_t seed, const GenLimits& limits) {
  if (limits.max_depth == 0) throw Error(ErrorKind::kUsage, "max_depth must be positive");
  TreeGenerator generator(g, seed, limits);
  return generator.expand(g.start(), 0);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t slot, std::uint64_t attempt) {
  return splitmix64(splitmix64(splitmix64(seed) ^ slot) ^ attempt);
}

std::size_t failing_quota(std::size_t n, double failing_ratio) {
  if (!(failing_ratio >= 0.0 && failing_ratio <= 1.0)) {
    throw Error(ErrorKind::kUsage, "failing ratio must lie in [0, 1]");
  }
  double exact = static_cast<double>(n) * failing_ratio;
  double nearest = std::round(exact);
  if (std::abs(exact - nearest) < 1e-9) return static_cast<std::size_t>(nearest);
  return static_cast<std::size_t>(std::ceil(exact));
}

LabeledTestSource::LabeledTestSource(const BugEntry& bug, const ExecutionContext& ctx, GenLimits limits)
    : bug_(bug), ctx_(ctx), limits_(limits), assets_(load_bug_assets(bug)) {
  if (limits_.max_attempts == 0) throw Error(ErrorKind::kUsage, "max_attempts must be positive");
  if (bug_.labeling_mode == LabelingMode::kGrammar &&
      (!assets_.failing_grammar || !assets_.passing_grammar)) {
    throw Error(ErrorKind::kLoad, bug_.id() + ": GRAMMAR labeling needs failing and passing grammars");
  }
  if (bug_.labeling_mode == LabelingMode::kOracleFilter) {
    if (ctx_.buggy == nullptr || !ctx_.buggy->compiled || ctx_.buggy->variant != Variant::kBuggy) {
      throw Error(ErrorKind::kEnvironment,
                  bug_.id() + ": ORACLE_FILTER labeling needs a compiled BUGGY workspace");
    }
  }
}

std::optional<LabeledTest> LabeledTestSource::draw(Label want, std::uint64_t seed, std::size_t slot,
                                                   std::size_t attempt) const {
  const bool by_grammar = bug_.labeling_mode == LabelingMode::kGrammar;
  const Grammar& source = !by_grammar                ? assets_.grammar
                          : want == Label::kFailing ? *assets_.failing_grammar
                                                    : *assets_.passing_grammar;
  DerivationTree tree = generate_tree(source, derive_seed(seed, slot, attempt), limits_);
  auto tokens = tokenize(frontier(tree));
  std::string line = detokenize(tokens);
  auto parsed = parse_input(assets_.grammar, line);
  if (!parsed) return std::nullopt;

  LabeledTest test{std::move(tokens), want, std::move(*parsed.tree), bug_.labeling_mode};
  if (by_grammar) return test;

  Judgement j = judge(*ctx_.buggy, assets_, test.tokens, line);
  if (j.result == TestResult::kUndefined) return std::nullopt;
  Label observed = j.result == TestResult::kFailing ? Label::kFailing : Label::kPassing;
  if (observed != want) return std::nullopt;
  return test;
}

std::vector<LabeledTest> generate_labeled_set(const BugEntry& bug, std::size_t n, double failing_ratio,
                                              std::uint64_t seed, const ExecutionContext& ctx,
                                              const GenLimits& limits) {
  std::size_t failing = failing_quota(n, failing_ratio);
  if (n == 0) return {};
  LabeledTestSource source(bug, ctx, limits);
  std::vector<LabeledTest> tests;
  tests.reserve(n);
  for (std::size_t slot = 0; slot < n; ++slot) {
    Label want = slot < failing ? Label::kFailing : Label::kPassing;
    std::optional<LabeledTest> found;
    for (std::size_t attempt = 0; attempt < limits.max_attempts && !found; ++attempt) {
      found = source.draw(want, seed, slot, attempt);
    }
    if (!found) {
      std::size_t failing_done = std::min(slot, failing);
      std::size_t passing_done = slot > failing ? slot - failing : 0;
      throw GenerationExhausted(failing_done, failing, passing_done, n - failing);
    }
    tests.push_back(std::move(*found));
  }
  return tests;
}

std::string system_test_file_name(std::size_t index, Label label) {
  return "t4p_systemtest_" + std::to_string(index) + (label == Label::kFailing ? "_failing" : "_passing");
}

std::vector<fs::path> write_system_tests(const fs::path& dir, const std::vector<LabeledTest>& tests) {
  fs::create_directories(dir);
  std::vector<fs::path> written;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    fs::path path = dir / system_test_file_name(i, tests[i].label);
    io::write_file(path, frontier(tests[i].derivation));
    written.push_back(path);
  }
  io::write_file(dir / "tests.jsonl", format_test_records(to_records(tests)));
  return written;
}

std::vector<TestCaseRecord> to_records(const std::vector<LabeledTest>& tests) {
  std::vector<TestCaseRecord> records;
  records.reserve(tests.size());
  for (const auto& t : tests) records.push_back({t.tokens, t.label});
  return records;
}

std::vector<SystemTestCase> cases_from_labeled(const std::vector<LabeledTest>& tests) {
  std::vector<SystemTestCase> cases;
  for (std::size_t i = 0; i < tests.size(); ++i) {
    SystemTestCase test;
    test.name = system_test_file_name(i, tests[i].label);
    test.tokens = tests[i].tokens;
    test.input = frontier(tests[i].derivation);
    test.expected = tests[i].label;
    cases.push_back(std::move(test));
  }
  return cases;
}

namespace {

TestReport verify_cases(const BugEntry& bug, const std::vector<SystemTestCase>& cases,
                        const ExecutionContext& ctx) {
  if (ctx.buggy == nullptr || ctx.buggy->variant != Variant::kBuggy ||
      ctx.buggy->bug.project != bug.project || ctx.buggy->bug.bug_id != bug.bug_id) {
    throw Error(ErrorKind::kEnvironment, bug.id() + ": label verification needs a BUGGY workspace of the bug");
  }
  return test_system_set(*ctx.buggy, cases);
}

}  // namespace

TestReport verify_labels(const BugEntry& bug, const std::vector<TestCaseRecord>& tests,
                         const ExecutionContext& ctx) {
  return verify_cases(bug, cases_from_records(tests), ctx);
}

TestReport verify_labels(const BugEntry& bug, const std::vector<LabeledTest>& tests,
                         const ExecutionContext& ctx) {
  return verify_cases(bug, cases_from_labeled(tests), ctx);
}

}  // namespace t4p
