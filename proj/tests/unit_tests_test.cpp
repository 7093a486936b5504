#include <gtest/gtest.h>

#include "io.hpp"
#include "support.hpp"
#include "t4p/error.hpp"
#include "t4p/unit_tests.hpp"

namespace t4p {
namespace {

namespace fs = std::filesystem;

ErrorKind error_kind(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kLoad;
}

TEST(RenderTemplate, Substitutes) {
  std::map<std::string, std::string> values = {
      {"case_name", "test_t4p_0_failing"}, {"argv_json", "[\"1\"]"}, {"expected_stdout_json", "\"2\\n\""},
      {"label", "FAILING"}};
  EXPECT_EQ(render_template("def {{case_name}}(): run({{ argv_json }}) # {label} {{label}}", values),
            "def test_t4p_0_failing(): run([\"1\"]) # {label} FAILING");
  EXPECT_EQ(render_template("no placeholders", values), "no placeholders");
  // Substituted text is not rescanned.
  EXPECT_EQ(render_template("{{argv_json}}", {{"argv_json", "{{label}}"}}), "{{label}}");
}

TEST(RenderTemplate, Errors) {
  EXPECT_EQ(error_kind([] { render_template("{{colour}}", {{"colour", "red"}}); }), ErrorKind::kTemplate);
  EXPECT_EQ(error_kind([] { render_template("x {{label", {{"label", "P"}}); }), ErrorKind::kTemplate);
  EXPECT_EQ(error_kind([] { render_template("{{label}}", {}); }), ErrorKind::kTemplate);
}

TEST(TemplateExtension, StripsTmpl) {
  EXPECT_EQ(template_extension("dir/test_case.py.tmpl"), "py");
  EXPECT_EQ(template_extension("test_case.sh"), "sh");
  EXPECT_EQ(template_extension("Test.java.tmpl"), "java");
  EXPECT_EQ(template_extension("plain.tmpl"), "txt");
  EXPECT_EQ(unit_case_name(3, Label::kPassing), "test_t4p_3_passing");
}

TEST(JunitReport, Parses) {
  auto cases = parse_junit_report(R"(<?xml version="1.0"?>
<testsuites>
  <testsuite name="a">
    <testcase name="ok" time="0.25"/>
    <testcase name="bad"><failure message="x"/></testcase>
    <properties><property name="k" value="v"/></properties>
  </testsuite>
  <testsuite name="b">
    <testcase classname="C" name="err"><error/></testcase>
    <testcase name="skip"><skipped/><system-out>noise</system-out></testcase>
  </testsuite>
</testsuites>)");
  ASSERT_EQ(cases.size(), 4u);
  EXPECT_EQ(cases[0].name, "ok");
  EXPECT_EQ(cases[0].result, TestResult::kPassing);
  EXPECT_EQ(cases[0].duration_ms, 250);
  EXPECT_EQ(cases[1].result, TestResult::kFailing);
  EXPECT_EQ(cases[2].result, TestResult::kUndefined);
  EXPECT_EQ(cases[3].result, TestResult::kUndefined);
  EXPECT_TRUE(parse_junit_report("<testsuite/>").empty());
  EXPECT_EQ(error_kind([] { parse_junit_report("<testsuite><testcase></testsuite>"); }), ErrorKind::kParse);
}

TEST(UnitSuite, GenerateAndRunOnBothVariants) {
  io::TempDir dir("t4p-unit");
  Workspace buggy = testing::compiled_workspace("middle", Variant::kBuggy, dir.path() / "buggy");
  Workspace fixed = testing::compiled_workspace("middle", Variant::kFixed, dir.path() / "fixed");
  fs::path dest = buggy.root / "t4p_unittests";
  auto files = render_unit_tests(buggy.bug, 5, 0.4, 9, dest, ExecutionContext{&buggy});
  ASSERT_EQ(files.size(), 5u);
  EXPECT_EQ(files[0].filename(), "test_t4p_0_failing.py");
  EXPECT_EQ(files[4].filename(), "test_t4p_4_passing.py");
  EXPECT_NE(io::read_file(files[0]).find("# test_t4p_0_failing (FAILING)"), std::string::npos);

  TestReport on_buggy = run_unit_suite(buggy, dest);
  ASSERT_EQ(on_buggy.entries.size(), 5u);
  EXPECT_TRUE(on_buggy.all_match()) << report_to_json(on_buggy).dump(2);
  EXPECT_EQ(on_buggy.count(TestResult::kFailing), 2u);

  io::copy_tree(dest, fixed.root / "t4p_unittests");
  TestReport on_fixed = run_unit_suite(fixed, fixed.root / "t4p_unittests");
  EXPECT_EQ(on_fixed.count(TestResult::kPassing), 5u);
  EXPECT_EQ(on_fixed.variant, Variant::kFixed);

  // A single file works too.
  TestReport one = run_unit_suite(buggy, files[0]);
  ASSERT_EQ(one.entries.size(), 1u);
  EXPECT_EQ(one.entries[0].result, TestResult::kFailing);
}

TEST(UnitSuite, EmptyAndMissingPaths) {
  io::TempDir dir("t4p-unit");
  Workspace buggy = testing::compiled_workspace("middle", Variant::kBuggy, dir.path() / "ws");
  fs::create_directories(dir.path() / "empty");
  EXPECT_TRUE(run_unit_suite(buggy, dir.path() / "empty").entries.empty());
  EXPECT_EQ(error_kind([&] { run_unit_suite(buggy, dir.path() / "missing"); }), ErrorKind::kEnvironment);
}

TEST(UnitSuite, BadTemplateFailsBeforeGeneration) {
  io::TempDir dir("t4p-unit");
  io::copy_tree(testing::registry_dir(), dir.path() / "reg");
  BugEntry bug = get_bug(testing::stub_registry(), "middle", 1);
  bug.root = dir.path() / "reg";
  io::write_file(bug.resolve(bug.unit_template_file), "{{case_name}} {{mystery}}\n");
  fs::path dest = dir.path() / "out";
  EXPECT_EQ(error_kind([&] { render_unit_tests(bug, 3, 0.5, 1, dest, {}); }), ErrorKind::kTemplate);
  EXPECT_FALSE(fs::exists(dest));
}

}  // namespace
}  // namespace t4p
