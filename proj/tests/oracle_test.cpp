#include <gtest/gtest.h>

#include <algorithm>

#include "support.hpp"
#include "t4p/error.hpp"
#include "t4p/oracle.hpp"

namespace t4p {
namespace {

using namespace pred;

RunObservation run(std::optional<int> code, std::string out = "", std::string err = "") {
  RunObservation obs;
  obs.exit_code = code;
  obs.stdout_text = std::move(out);
  obs.stderr_text = std::move(err);
  return obs;
}

TestResult eval(const Predicate& p, const RunObservation& obs, const FeatureMap& f = {},
                const ReferenceOutput* ref = nullptr) {
  return evaluate(OracleSpec{std::nullopt, p}, obs, f, ref);
}

ErrorKind spec_error(const std::string& text) {
  try {
    load_oracle_spec(text);
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "accepted " << text;
  return ErrorKind::kLoad;
}

TEST(OracleSpec, LoadsEveryPredicate) {
  auto spec = load_oracle_spec(R"({
    "undefined_when": {"any": [{"exit_code": {"neq": 0}}, {"stderr_contains": "Traceback"}]},
    "failing_when": {"all": [
      {"stdout_contains": "x"}, {"stdout_matches": "^[0-9]*$"}, {"file_exists": "out/a.txt"},
      {"feature_present": "<op>"}, {"feature_eq": ["<op>", "-"]}, {"ref_differs": "stdout"},
      {"not": {"exit_code": {"eq": 3}}}
    ]}
  })");
  ASSERT_TRUE(spec.undefined_when.has_value());
  const auto& all_node = std::get<pred::All>(spec.failing_when.node);
  ASSERT_EQ(all_node.children.size(), 7u);
  EXPECT_EQ(std::get<pred::FeaturePresent>(all_node.children[3].node).nonterminal, "op");
  EXPECT_EQ(std::get<pred::FeatureEquals>(all_node.children[4].node).nonterminal, "op");
  EXPECT_EQ(std::get<pred::FeatureEquals>(all_node.children[4].node).text, "-");
  EXPECT_TRUE(uses_reference(spec));
  EXPECT_FALSE(uses_reference(load_oracle_spec(R"({"failing_when": {"exit_code": {"eq": 1}}})")));
}

TEST(OracleSpec, Errors) {
  EXPECT_EQ(spec_error("{not json"), ErrorKind::kParse);
  EXPECT_EQ(spec_error(R"({"undefined_when": {"exit_code": {"eq": 1}}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"stdout_equals": "x"}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"exit_code": {"lt": 1}}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"exit_code": {"eq": "1"}}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"file_exists": "/etc/passwd"}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"stdout_matches": "a+"}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"ref_differs": "both"}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"feature_eq": ["op"]}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"all": [], "any": []}})"), ErrorKind::kOracle);
  EXPECT_EQ(spec_error(R"({"failing_when": {"all": []}, "extra": 1})"), ErrorKind::kOracle);
}

TEST(OracleSpec, BindingRequiresReferenceCommand) {
  auto spec = load_oracle_spec(R"({"failing_when": {"not": {"ref_differs": "stderr"}}})");
  EXPECT_NO_THROW(check_oracle_binding(spec, true));
  try {
    check_oracle_binding(spec, false);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kOracle);
  }
}

TEST(Evaluate, ExitCode) {
  EXPECT_EQ(eval(exit_code(Relation::kEq, 1), run(1)), TestResult::kFailing);
  EXPECT_EQ(eval(exit_code(Relation::kEq, 1), run(0)), TestResult::kPassing);
  EXPECT_EQ(eval(exit_code(Relation::kNeq, 0), run(2)), TestResult::kFailing);
}

TEST(Evaluate, Streams) {
  EXPECT_EQ(eval(stdout_contains("boom"), run(0, "a boom b")), TestResult::kFailing);
  EXPECT_EQ(eval(stdout_contains("boom"), run(0, "", "boom")), TestResult::kPassing);
  EXPECT_EQ(eval(stderr_contains("boom"), run(0, "", "boom")), TestResult::kFailing);
  EXPECT_EQ(eval(stdout_matches("^9$"), run(0, "9\n")), TestResult::kFailing);
  EXPECT_EQ(eval(stdout_matches("^9$"), run(0, "19\n")), TestResult::kPassing);
}

TEST(Evaluate, CreatedFiles) {
  auto obs = run(0);
  obs.created_files = {"out/a.txt"};
  EXPECT_EQ(eval(file_exists("out/a.txt"), obs), TestResult::kFailing);
  EXPECT_EQ(eval(file_exists("out"), obs), TestResult::kPassing);
}

TEST(Evaluate, Features) {
  FeatureMap f = {{"op", {"+", "-"}}};
  EXPECT_EQ(eval(feature_present("op"), run(0), f), TestResult::kFailing);
  EXPECT_EQ(eval(feature_present("int"), run(0), f), TestResult::kPassing);
  EXPECT_EQ(eval(feature_equals("op", "-"), run(0), f), TestResult::kFailing);
  EXPECT_EQ(eval(feature_equals("op", "*"), run(0), f), TestResult::kPassing);
}

TEST(Evaluate, ReferenceComparisonIgnoresTrailingWhitespace) {
  ReferenceOutput ref{0, "2  \n\n", "warn\n"};
  EXPECT_EQ(eval(ref_differs(Channel::kStdout), run(0, "2\n"), {}, &ref), TestResult::kPassing);
  EXPECT_EQ(eval(ref_differs(Channel::kStdout), run(0, "1\n"), {}, &ref), TestResult::kFailing);
  EXPECT_EQ(eval(ref_differs(Channel::kStdout), run(0, " 2\n"), {}, &ref), TestResult::kFailing);
  EXPECT_EQ(eval(ref_differs(Channel::kStderr), run(0, "", "warn"), {}, &ref), TestResult::kPassing);
  EXPECT_EQ(normalize_trailing_whitespace("a \t\nb  \n\n\n"), "a\nb");
  EXPECT_EQ(normalize_trailing_whitespace(""), "");
}

TEST(Evaluate, MissingReferenceIsAnError) {
  try {
    eval(any({exit_code(Relation::kEq, 0), ref_differs(Channel::kStdout)}), run(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kEvaluation);
  }
}

TEST(Evaluate, TimeoutIsUndefinedBeforeAnythingElse) {
  RunObservation obs = run(std::nullopt);
  obs.timed_out = true;
  EXPECT_EQ(eval(ref_differs(Channel::kStdout), obs), TestResult::kUndefined);
  EXPECT_EQ(eval(all({}), obs), TestResult::kUndefined);
}

TEST(Evaluate, UndefinedWhenWins) {
  OracleSpec spec{exit_code(Relation::kNeq, 0), stdout_contains("x")};
  EXPECT_EQ(evaluate(spec, run(2, "x"), {}), TestResult::kUndefined);
  EXPECT_EQ(evaluate(spec, run(0, "x"), {}), TestResult::kFailing);
  EXPECT_EQ(evaluate(spec, run(0, "y"), {}), TestResult::kPassing);
}

TEST(Evaluate, EmptyCombinators) {
  EXPECT_EQ(eval(all({}), run(0)), TestResult::kFailing);
  EXPECT_EQ(eval(any({}), run(0)), TestResult::kPassing);
}

TEST(ResultNames, RoundTrip) {
  for (auto r : {TestResult::kPassing, TestResult::kFailing, TestResult::kUndefined}) {
    EXPECT_EQ(test_result_from_string(to_string(r)), r);
  }
  EXPECT_THROW(test_result_from_string("passing"), Error);
}

// Whether p holds on a case, as seen through evaluate.
std::optional<bool> holds(const Predicate& p, const testing::OracleCase& c) {
  if (c.obs.timed_out) return std::nullopt;
  try {
    return eval(p, c.obs, c.features, c.has_reference ? &c.reference : nullptr) == TestResult::kFailing;
  } catch (const Error&) {
    return std::nullopt;
  }
}

TEST(OracleProperty, NegationFlipsVerdict) {
  for (const auto& [name, p] : testing::predicate_catalogue()) {
    for (const auto& c : testing::observation_corpus()) {
      auto direct = holds(p, c);
      auto flipped = holds(negate(p), c);
      ASSERT_EQ(direct.has_value(), flipped.has_value()) << name << " " << c.name;
      if (direct) EXPECT_NE(*direct, *flipped) << name << " " << c.name;
    }
  }
}

TEST(OracleProperty, CombinatorsMatchBooleanAlgebra) {
  auto catalogue = testing::predicate_catalogue();
  auto corpus = testing::observation_corpus();
  for (std::size_t i = 0; i < catalogue.size(); i += 3) {
    for (std::size_t j = 1; j < catalogue.size(); j += 4) {
      const auto& a = catalogue[i].second;
      const auto& b = catalogue[j].second;
      for (const auto& c : corpus) {
        auto ha = holds(a, c);
        auto hb = holds(b, c);
        auto both = holds(all({a, b}), c);
        auto both_swapped = holds(all({b, a}), c);
        auto either = holds(any({a, b}), c);
        auto morgan = holds(negate(any({negate(a), negate(b)})), c);
        EXPECT_EQ(both, both_swapped);
        EXPECT_EQ(both, morgan);
        if (ha && hb) {
          EXPECT_EQ(*both, *ha && *hb);
          EXPECT_EQ(*either, *ha || *hb);
        } else {
          EXPECT_FALSE(both.has_value());
          EXPECT_FALSE(either.has_value());
        }
      }
    }
  }
}

TEST(OracleProperty, CorpusIsLargeEnough) { EXPECT_GE(testing::observation_corpus().size(), 50u); }

}  // namespace
}  // namespace t4p
