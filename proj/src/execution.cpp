#include "t4p/execution.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <thread>

#include "io.hpp"
#include "t4p/error.hpp"
#include "t4p/patch.hpp"
#include "t4p/process.hpp"
#include "t4p/tokenize.hpp"

namespace t4p {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Variant variant) { return variant == Variant::kFixed ? "FIXED" : "BUGGY"; }

Variant variant_from_string(std::string_view text) {
  if (text == "BUGGY") return Variant::kBuggy;
  if (text == "FIXED") return Variant::kFixed;
  throw Error(ErrorKind::kParse, "unknown variant '" + std::string(text) + "'");
}

namespace {

constexpr std::chrono::milliseconds kCompileTimeout{10 * 60 * 1000};

bool is_empty_dir(const fs::path& dir) {
  std::error_code ec;
  return fs::is_directory(dir, ec) && fs::directory_iterator(dir, ec) == fs::directory_iterator();
}

void clear_directory(const fs::path& dir) {
  for (const auto& entry : fs::directory_iterator(dir)) fs::remove_all(entry.path());
}

std::string join_argv(const Argv& argv) { return detokenize(argv); }

}  // namespace

std::optional<WorkspaceMarker> read_marker(const fs::path& dir) {
  fs::path path = dir / kMarkerFile;
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  try {
    json doc = json::parse(io::read_file(path));
    WorkspaceMarker marker;
    marker.project = doc.at("project").get<std::string>();
    marker.bug_id = doc.at("bug_id").get<int>();
    marker.variant = variant_from_string(doc.at("variant").get<std::string>());
    marker.compiled = doc.value("compiled", false);
    marker.home = doc.value("home", "");
    return marker;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

void write_marker(const Workspace& ws) {
  json doc = {{"project", ws.bug.project},
              {"bug_id", ws.bug.bug_id},
              {"variant", to_string(ws.variant)},
              {"compiled", ws.compiled},
              {"home", fs::absolute(ws.bug.root).lexically_normal().string()}};
  io::write_file(ws.root / kMarkerFile, doc.dump(2) + "\n");
}

Workspace checkout(const BugEntry& bug, Variant variant, const fs::path& dest) {
  std::error_code ec;
  bool existed = fs::exists(dest, ec);
  if (existed && !is_empty_dir(dest)) {
    auto marker = read_marker(dest);
    if (!marker || marker->project != bug.project || marker->bug_id != bug.bug_id) {
      throw Error(ErrorKind::kCheckout,
                  "refusing to check out into non-empty directory " + dest.string() +
                      (marker ? " (holds " + marker->project + " #" + std::to_string(marker->bug_id) + ")"
                              : ""));
    }
    clear_directory(dest);
  }
  fs::create_directories(dest);

  Workspace ws{bug, variant, fs::absolute(dest).lexically_normal(), false};
  try {
    io::copy_tree(bug.resolve(bug.source_dir), ws.root);
    if (variant == Variant::kFixed) apply_patch(ws.root, io::read_file(bug.resolve(bug.patch_file)));
  } catch (...) {
    if (existed) {
      clear_directory(ws.root);
    } else {
      fs::remove_all(ws.root, ec);
    }
    throw;
  }
  write_marker(ws);
  return ws;
}

Workspace open_workspace(const Registry& registry, const fs::path& dir) {
  auto marker = read_marker(dir);
  if (!marker) throw Error(ErrorKind::kNotFound, "no " + std::string(kMarkerFile) + " marker in " + dir.string());
  Workspace ws{get_bug(registry, marker->project, marker->bug_id), marker->variant,
               fs::absolute(dir).lexically_normal(), marker->compiled};
  return ws;
}

CompileStatus compile(Workspace& ws) {
  CompileStatus status;
  status.log = ws.root / kCompileLog;
  std::string log;
  auto flush = [&] { io::write_file(status.log, log); };
  for (std::size_t i = 0; i < ws.bug.compile_cmds.size(); ++i) {
    const auto& cmd = ws.bug.compile_cmds[i];
    log += "$ " + join_argv(cmd) + "\n";
    ProcessResult result;
    try {
      result = run_process({cmd, ws.root, ws.bug.env, kCompileTimeout});
    } catch (const Error& e) {
      log += std::string(e.what()) + "\n";
      flush();
      throw CompileError(i, 127, status.log,
                         "compile command " + std::to_string(i) + " could not start: " + e.what());
    }
    log += result.stdout_text;
    log += result.stderr_text;
    int code = result.exit_code.value_or(-1);
    log += result.timed_out ? "[timed out]\n" : "[exit " + std::to_string(code) + "]\n";
    ++status.commands_run;
    if (result.timed_out || code != 0) {
      flush();
      throw CompileError(i, code, status.log,
                         "compile command " + std::to_string(i) + " (" + join_argv(cmd) + ") failed with exit " +
                             std::to_string(code) + "; see " + status.log.string());
    }
  }
  flush();
  ws.compiled = true;
  status.compiled = true;
  write_marker(ws);
  return status;
}

namespace {

void require_compiled(const Workspace& ws) {
  if (!ws.compiled) {
    throw Error(ErrorKind::kEnvironment, "workspace " + ws.root.string() + " is not compiled");
  }
}

}  // namespace

RunObservation run_system_test(const Workspace& ws, const std::vector<std::string>& tokens,
                               const std::optional<fs::path>& cwd_override) {
  require_compiled(ws);
  fs::path cwd = cwd_override.value_or(ws.root);
  Argv argv = ws.bug.harness_cmd;
  argv.insert(argv.end(), tokens.begin(), tokens.end());

  auto before = io::snapshot_tree(cwd);
  ProcessResult result = run_process({argv, cwd, ws.bug.env, std::chrono::milliseconds(ws.bug.timeout_ms)});
  auto after = io::snapshot_tree(cwd);

  RunObservation obs;
  obs.exit_code = result.exit_code;
  obs.stdout_text = std::move(result.stdout_text);
  obs.stderr_text = std::move(result.stderr_text);
  obs.duration_ms = result.duration.count();
  obs.timed_out = result.timed_out;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(),
                      std::back_inserter(obs.created_files));
  obs.tokens = tokens;
  return obs;
}

std::optional<ReferenceOutput> run_reference(const Workspace& ws, const std::vector<std::string>& tokens,
                                             const std::optional<fs::path>& cwd_override) {
  if (!ws.bug.reference_cmd) {
    throw Error(ErrorKind::kOracle, ws.bug.id() + " declares no reference_cmd");
  }
  Argv argv = *ws.bug.reference_cmd;
  argv.insert(argv.end(), tokens.begin(), tokens.end());
  ProcessResult result = run_process(
      {argv, cwd_override.value_or(ws.root), ws.bug.env, std::chrono::milliseconds(ws.bug.timeout_ms)});
  if (result.timed_out) return std::nullopt;
  return ReferenceOutput{result.exit_code, std::move(result.stdout_text), std::move(result.stderr_text)};
}

BugAssets load_bug_assets(const BugEntry& bug) {
  auto grammar_at = [&](const std::string& relative) {
    return load_grammar(io::read_file(bug.resolve(relative)));
  };
  BugAssets assets{grammar_at(bug.grammar_file), std::nullopt, std::nullopt,
                   load_oracle_spec(io::read_file(bug.resolve(bug.oracle_file)))};
  if (bug.failing_grammar_file) assets.failing_grammar = grammar_at(*bug.failing_grammar_file);
  if (bug.passing_grammar_file) assets.passing_grammar = grammar_at(*bug.passing_grammar_file);
  check_oracle_binding(assets.oracle, bug.reference_cmd.has_value());
  return assets;
}

namespace {

// t4p_systemtest_<index>_<label>
std::optional<std::pair<std::size_t, Label>> parse_test_file_name(const std::string& name) {
  constexpr std::string_view kPrefix = "t4p_systemtest_";
  if (!name.starts_with(kPrefix)) return std::nullopt;
  std::string_view rest = std::string_view(name).substr(kPrefix.size());
  auto underscore = rest.find('_');
  if (underscore == std::string_view::npos) return std::nullopt;
  std::size_t index = 0;
  auto digits = rest.substr(0, underscore);
  auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc{} || ptr != digits.data() + digits.size()) return std::nullopt;
  auto label = rest.substr(underscore + 1);
  if (label == "passing") return std::make_pair(index, Label::kPassing);
  if (label == "failing") return std::make_pair(index, Label::kFailing);
  return std::nullopt;
}

}  // namespace

std::vector<SystemTestCase> cases_from_directory(const fs::path& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) {
    throw Error(ErrorKind::kEnvironment, "test directory " + dir.string() + " does not exist");
  }
  struct Found {
    std::optional<std::pair<std::size_t, Label>> parsed;
    fs::path path;
  };
  std::vector<Found> found;
  for (const auto& entry : fs::directory_iterator(dir)) {
    std::string name = entry.path().filename().string();
    if (name == "tests.jsonl" || name.starts_with(".")) continue;
    if (entry.is_directory(ec)) continue;
    found.push_back({parse_test_file_name(name), entry.path()});
  }
  std::sort(found.begin(), found.end(), [](const Found& a, const Found& b) {
    if (a.parsed.has_value() != b.parsed.has_value()) return a.parsed.has_value();
    if (a.parsed && a.parsed->first != b.parsed->first) return a.parsed->first < b.parsed->first;
    return a.path.filename() < b.path.filename();
  });

  std::vector<SystemTestCase> cases;
  for (const auto& f : found) {
    SystemTestCase test;
    test.name = f.path.filename().string();
    if (f.parsed) test.expected = f.parsed->second;
    try {
      test.input = io::read_file(f.path);
      test.tokens = tokenize(test.input);
    } catch (const Error& e) {
      test.error = e.what();
    }
    cases.push_back(std::move(test));
  }
  return cases;
}

std::vector<SystemTestCase> cases_from_records(const std::vector<TestCaseRecord>& records) {
  std::vector<SystemTestCase> cases;
  for (std::size_t i = 0; i < records.size(); ++i) {
    SystemTestCase test;
    test.name = "record_" + std::to_string(i);
    test.tokens = records[i].tokens;
    test.input = detokenize(records[i].tokens);
    test.expected = records[i].label;
    cases.push_back(std::move(test));
  }
  return cases;
}

Judgement judge(const Workspace& ws, const BugAssets& assets, const std::vector<std::string>& tokens,
                const std::string& input, const std::optional<fs::path>& cwd_override) {
  Judgement j;
  auto parsed = parse_input(assets.grammar, input);
  if (!parsed) {
    j.error = "input does not parse under the bug grammar (stopped at position " +
              std::to_string(parsed.furthest) + ")";
    j.observation.tokens = tokens;
    return j;
  }
  j.features = features(*parsed.tree);
  j.observation = run_system_test(ws, tokens, cwd_override);
  if (uses_reference(assets.oracle) && !j.observation.timed_out) {
    j.reference = run_reference(ws, tokens, cwd_override);
    if (!j.reference) {
      j.error = "reference command timed out";
      return j;
    }
  }
  j.result = evaluate(assets.oracle, j.observation, j.features, j.reference ? &*j.reference : nullptr);
  return j;
}

std::map<TestResult, std::size_t> TestReport::totals() const {
  std::map<TestResult, std::size_t> out{
      {TestResult::kPassing, 0}, {TestResult::kFailing, 0}, {TestResult::kUndefined, 0}};
  for (const auto& entry : entries) ++out[entry.result];
  return out;
}

std::size_t TestReport::count(TestResult result) const { return totals().at(result); }

bool TestReport::all_match() const {
  return std::all_of(entries.begin(), entries.end(),
                     [](const ReportEntry& e) { return !e.match.has_value() || *e.match; });
}

json report_to_json(const TestReport& report) {
  json entries = json::array();
  for (const auto& e : report.entries) {
    json doc = {{"name", e.name},
                {"tokens", e.tokens},
                {"result", to_string(e.result)},
                {"duration_ms", e.duration_ms}};
    doc["expected"] = e.expected ? json(to_string(*e.expected)) : json(nullptr);
    doc["match"] = e.match ? json(*e.match) : json(nullptr);
    if (e.error) doc["error"] = *e.error;
    entries.push_back(std::move(doc));
  }
  json totals = json::object();
  for (const auto& [result, n] : report.totals()) totals[to_string(result)] = n;
  return {{"project", report.project},
          {"bug_id", report.bug_id},
          {"variant", to_string(report.variant)},
          {"entries", std::move(entries)},
          {"totals", std::move(totals)}};
}

TestReport report_from_json(const json& doc) {
  try {
    TestReport report;
    report.project = doc.at("project").get<std::string>();
    report.bug_id = doc.at("bug_id").get<int>();
    report.variant = variant_from_string(doc.at("variant").get<std::string>());
    for (const auto& e : doc.at("entries")) {
      ReportEntry entry;
      entry.name = e.value("name", "");
      entry.tokens = e.at("tokens").get<std::vector<std::string>>();
      entry.result = test_result_from_string(e.at("result").get<std::string>());
      entry.duration_ms = e.value("duration_ms", 0LL);
      if (e.contains("expected") && !e["expected"].is_null()) {
        entry.expected = label_from_string(e["expected"].get<std::string>());
      }
      if (e.contains("match") && !e["match"].is_null()) entry.match = e["match"].get<bool>();
      if (e.contains("error")) entry.error = e["error"].get<std::string>();
      if (entry.expected.has_value() != entry.match.has_value()) {
        throw Error(ErrorKind::kParse, "report entry has expected without match or vice versa");
      }
      report.entries.push_back(std::move(entry));
    }
    for (const auto& [result, n] : report.totals()) {
      if (doc.at("totals").value(to_string(result), std::size_t{0}) != n) {
        throw Error(ErrorKind::kParse, std::string("report totals disagree with entries for ") + to_string(result));
      }
    }
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("report: ") + e.what());
  }
}

void write_report(const TestReport& report, const fs::path& path) {
  io::write_file(path, report_to_json(report).dump(2) + "\n");
}

bool same_outcomes(const TestReport& a, const TestReport& b) {
  if (a.project != b.project || a.bug_id != b.bug_id || a.variant != b.variant ||
      a.entries.size() != b.entries.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    const auto& x = a.entries[i];
    const auto& y = b.entries[i];
    if (x.name != y.name || x.tokens != y.tokens || x.result != y.result || x.expected != y.expected ||
        x.match != y.match || x.error != y.error) {
      return false;
    }
  }
  return true;
}

namespace {

ReportEntry run_case(const Workspace& ws, const BugAssets& assets, const SystemTestCase& test,
                     const std::optional<fs::path>& scratch) {
  ReportEntry entry;
  entry.name = test.name;
  entry.tokens = test.tokens;
  entry.expected = test.expected;
  if (test.error) {
    entry.error = test.error;
  } else {
    Judgement j = judge(ws, assets, test.tokens, test.input, scratch);
    entry.result = j.result;
    entry.duration_ms = j.observation.duration_ms;
    entry.error = j.error;
  }
  if (entry.expected) {
    entry.match = entry.result == (*entry.expected == Label::kFailing ? TestResult::kFailing : TestResult::kPassing);
  }
  return entry;
}

}  // namespace

TestReport test_system_set(const Workspace& ws, const std::vector<SystemTestCase>& tests,
                           const RunOptions& options) {
  require_compiled(ws);
  BugAssets assets = load_bug_assets(ws.bug);
  TestReport report;
  report.project = ws.bug.project;
  report.bug_id = ws.bug.bug_id;
  report.variant = ws.variant;
  report.entries.resize(tests.size());

  std::size_t width = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(tests.size(), 1));
  if (width == 1) {
    for (std::size_t i = 0; i < tests.size(); ++i) report.entries[i] = run_case(ws, assets, tests[i], std::nullopt);
    return report;
  }

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= tests.size()) return;
      try {
        io::TempDir scratch("t4p-scratch");
        io::copy_tree(ws.root, scratch.path());
        report.entries[i] = run_case(ws, assets, tests[i], scratch.path());
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next = tests.size();
      }
    }
  };
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < width; ++t) threads.emplace_back(worker);
  for (auto& thread : threads) thread.join();
  if (first_error) std::rethrow_exception(first_error);
  return report;
}

}  // namespace t4p
