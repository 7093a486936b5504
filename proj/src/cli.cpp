#include "t4p/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "io.hpp"
#include "t4p/error.hpp"
#include "t4p/execution.hpp"
#include "t4p/fuzzing.hpp"
#include "t4p/registry.hpp"
#include "t4p/unit_tests.hpp"

#ifndef T4P_PROGRAM_NAME
#define T4P_PROGRAM_NAME "t4p"
#endif
#ifndef T4P_DEFAULT_HOME
#define T4P_DEFAULT_HOME "fixtures"
#endif

namespace t4p {
namespace fs = std::filesystem;

namespace {

constexpr const char* kSystemTestDir = "t4p_systemtests";
constexpr const char* kUnitTestDir = "t4p_unittests";

struct Options {
  std::string project;
  int bug_id = 0;
  bool fixed = false;
  std::string workdir;
  std::size_t count = 0;
  double failing_ratio = 0.5;
  std::uint64_t seed = 0;
  std::string out_dir;
  bool verify = false;
  std::string test_dir;
  std::string report;
};

fs::path resolve(const fs::path& cwd, const std::string& path) {
  fs::path p(path);
  return (p.is_absolute() ? p : cwd / p).lexically_normal();
}

fs::path registry_home(const fs::path& cwd) {
  if (const char* env = std::getenv("T4P_HOME"); env != nullptr && *env != '\0') return resolve(cwd, env);
  if (auto marker = read_marker(cwd); marker && !marker->home.empty()) return marker->home;
  return T4P_DEFAULT_HOME;
}

// A compiled BUGGY workspace for label-dependent work; reuses `ws` when it
// already is one, otherwise checks out and compiles a temporary copy.
class BuggyContext {
 public:
  explicit BuggyContext(const Workspace& ws) {
    if (ws.variant == Variant::kBuggy) {
      if (!ws.compiled) throw Error(ErrorKind::kEnvironment, "workspace is not compiled; run compile first");
      ctx_.buggy = &ws;
      return;
    }
    scratch_.emplace("t4p-buggy");
    own_ = checkout(ws.bug, Variant::kBuggy, scratch_->path() / ws.bug.id());
    compile(*own_);
    ctx_.buggy = &*own_;
  }

  const ExecutionContext& get() const { return ctx_; }

 private:
  std::optional<io::TempDir> scratch_;
  std::optional<Workspace> own_;
  ExecutionContext ctx_;
};

void print_report(const TestReport& report, std::ostream& out) {
  for (const auto& e : report.entries) {
    out << e.name << ": " << to_string(e.result);
    if (e.expected) out << " (expected " << to_string(*e.expected) << ")";
    if (e.error) out << " [" << *e.error << "]";
    out << "\n";
  }
  auto totals = report.totals();
  out << report.project << " #" << report.bug_id << " " << to_string(report.variant) << ": "
      << report.entries.size() << " tests, " << totals[TestResult::kPassing] << " passing, "
      << totals[TestResult::kFailing] << " failing, " << totals[TestResult::kUndefined] << " undefined\n";
}

int finish_test_command(const TestReport& report, const Options& opts, const fs::path& cwd, std::ostream& out) {
  print_report(report, out);
  if (!opts.report.empty()) write_report(report, resolve(cwd, opts.report));
  bool clean = report.count(TestResult::kFailing) == 0 && report.count(TestResult::kUndefined) == 0;
  return clean ? kExitOk : kExitTestFailures;
}

int cmd_info(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Registry registry = load_registry(registry_home(cwd));
  if (opts.project.empty()) {
    out << summarize(registry);
    return kExitOk;
  }
  if (opts.bug_id > 0) {
    out << describe(registry, get_bug(registry, opts.project, opts.bug_id));
    return kExitOk;
  }
  bool any = false;
  for (const auto& bug : registry.bugs()) {
    if (bug.project != opts.project) continue;
    out << describe(registry, bug);
    any = true;
  }
  if (!any) throw Error(ErrorKind::kNotFound, "unknown project " + opts.project);
  return kExitOk;
}

int cmd_checkout(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Registry registry = load_registry(registry_home(cwd));
  const BugEntry& bug = get_bug(registry, opts.project, opts.bug_id);
  fs::path dest = opts.workdir.empty() ? cwd / bug.id() : resolve(cwd, opts.workdir);
  Workspace ws = checkout(bug, opts.fixed ? Variant::kFixed : Variant::kBuggy, dest);
  out << "Checked out " << bug.project << " #" << bug.bug_id << " (" << to_string(ws.variant) << ") to "
      << ws.root.string() << "\n";
  return kExitOk;
}

Workspace current_workspace(const fs::path& cwd) {
  if (!read_marker(cwd)) {
    throw Error(ErrorKind::kNotFound, cwd.string() + " is not a workspace (no .t4p marker); run checkout first");
  }
  return open_workspace(load_registry(registry_home(cwd)), cwd);
}

int cmd_compile(const fs::path& cwd, std::ostream& out) {
  Workspace ws = current_workspace(cwd);
  auto status = compile(ws);
  out << "Compiled " << ws.bug.project << " #" << ws.bug.bug_id << " (" << status.commands_run
      << (status.commands_run == 1 ? " command" : " commands") << ", log " << status.log.string() << ")\n";
  return kExitOk;
}

int cmd_systemtest_generate(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Workspace ws = current_workspace(cwd);
  fs::path dir = opts.out_dir.empty() ? ws.root / kSystemTestDir : resolve(cwd, opts.out_dir);
  std::optional<BuggyContext> buggy;
  if (ws.bug.labeling_mode == LabelingMode::kOracleFilter || opts.verify) buggy.emplace(ws);
  ExecutionContext ctx = buggy ? buggy->get() : ExecutionContext{};
  GenLimits limits;
  auto tests = generate_labeled_set(ws.bug, opts.count, opts.failing_ratio, opts.seed, ctx, limits);
  write_system_tests(dir, tests);
  std::size_t failing = failing_quota(opts.count, opts.failing_ratio);
  out << "Generated " << tests.size() << " system tests (" << failing << " failing, " << tests.size() - failing
      << " passing) in " << dir.string() << "\n";
  if (!opts.verify) return kExitOk;
  TestReport report = verify_labels(ws.bug, tests, ctx);
  std::size_t matched = std::count_if(report.entries.begin(), report.entries.end(),
                                      [](const ReportEntry& e) { return e.match.value_or(false); });
  out << "Label verification: " << matched << "/" << report.entries.size() << " confirmed\n";
  return report.all_match() ? kExitOk : kExitTestFailures;
}

int cmd_systemtest_test(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Workspace ws = current_workspace(cwd);
  fs::path dir = opts.test_dir.empty() ? ws.root / kSystemTestDir : resolve(cwd, opts.test_dir);
  TestReport report = test_system_set(ws, cases_from_directory(dir));
  return finish_test_command(report, opts, cwd, out);
}

int cmd_unittest_generate(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Workspace ws = current_workspace(cwd);
  fs::path dir = opts.out_dir.empty() ? ws.root / kUnitTestDir : resolve(cwd, opts.out_dir);
  BuggyContext buggy(ws);
  auto files = render_unit_tests(ws.bug, opts.count, opts.failing_ratio, opts.seed, dir, buggy.get());
  std::size_t failing = failing_quota(opts.count, opts.failing_ratio);
  out << "Generated " << files.size() << " unit tests (" << failing << " failing, " << files.size() - failing
      << " passing) in " << dir.string() << "\n";
  return kExitOk;
}

int cmd_unittest_test(const Options& opts, const fs::path& cwd, std::ostream& out) {
  Workspace ws = current_workspace(cwd);
  fs::path dir = opts.test_dir.empty() ? ws.root / kUnitTestDir : resolve(cwd, opts.test_dir);
  TestReport report = run_unit_suite(ws, dir);
  return finish_test_command(report, opts, cwd, out);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, const fs::path& cwd, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bug benchmark harness: check out buggy/fixed variants, generate and run system and unit tests.",
               T4P_PROGRAM_NAME};
  app.require_subcommand(1);
  Options opts;

  auto* info = app.add_subcommand("info", "List projects and bugs, or describe one bug");
  auto* info_p = info->add_option("-p,--project", opts.project, "Project name");
  info->add_option("-i,--id", opts.bug_id, "Bug id")->needs(info_p)->check(CLI::PositiveNumber);

  auto* co = app.add_subcommand("checkout", "Check out a bug into a workspace directory");
  co->add_option("-p,--project", opts.project, "Project name")->required();
  co->add_option("-i,--id", opts.bug_id, "Bug id")->required()->check(CLI::PositiveNumber);
  co->add_flag("--fixed", opts.fixed, "Check out the fixed variant (patch applied)");
  co->add_option("-w,--workdir", opts.workdir, "Destination directory (default ./<project>_<id>)");

  auto* comp = app.add_subcommand("compile", "Build the workspace in the current directory");

  auto add_generate = [&](CLI::App* sub, bool with_verify) {
    sub->add_option("-n", opts.count, "Number of tests")->required()->check(CLI::NonNegativeNumber);
    sub->add_option("-f,--failing-ratio", opts.failing_ratio, "Share of failing tests")
        ->check(CLI::Range(0.0, 1.0));
    sub->add_option("--seed", opts.seed, "Random seed");
    sub->add_option("-o,--out", opts.out_dir, "Output directory");
    if (with_verify) sub->add_flag("--verify", opts.verify, "Verify labels against the oracle afterwards");
  };
  auto add_test = [&](CLI::App* sub) {
    sub->add_option("-d,--dir", opts.test_dir, "Directory holding the tests");
    sub->add_option("--report", opts.report, "Write a JSON report to this file");
  };

  auto* st = app.add_subcommand("systemtest", "Generate or run system tests");
  st->require_subcommand(1);
  auto* st_gen = st->add_subcommand("generate", "Generate labeled system tests");
  add_generate(st_gen, true);
  auto* st_test = st->add_subcommand("test", "Run system tests and classify them with the oracle");
  add_test(st_test);

  auto* ut = app.add_subcommand("unittest", "Generate or run unit tests");
  ut->require_subcommand(1);
  auto* ut_gen = ut->add_subcommand("generate", "Render unit tests from the bug's template");
  add_generate(ut_gen, false);
  auto* ut_test = ut->add_subcommand("test", "Run unit tests through the bug's runner");
  add_test(ut_test);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    const CLI::App* failed = &app;
    for (auto* sub : {info, co, comp, st, ut}) {
      if (sub->parsed()) failed = sub;
    }
    for (auto* sub : {st_gen, st_test, ut_gen, ut_test}) {
      if (sub->parsed()) failed = sub;
    }
    err << failed->help();
    return kExitUsage;
  }

  try {
    if (info->parsed()) return cmd_info(opts, cwd, out);
    if (co->parsed()) return cmd_checkout(opts, cwd, out);
    if (comp->parsed()) return cmd_compile(cwd, out);
    if (st_gen->parsed()) return cmd_systemtest_generate(opts, cwd, out);
    if (st_test->parsed()) return cmd_systemtest_test(opts, cwd, out);
    if (ut_gen->parsed()) return cmd_unittest_generate(opts, cwd, out);
    if (ut_test->parsed()) return cmd_unittest_test(opts, cwd, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return e.kind() == ErrorKind::kUsage ? kExitUsage : kExitEnvironment;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitEnvironment;
  }
  err << app.help();
  return kExitUsage;
}

}  // namespace t4p
