#include "t4p/registry.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "io.hpp"
#include "t4p/error.hpp"
#include "t4p/grammar.hpp"
#include "t4p/oracle.hpp"

namespace t4p {

using nlohmann::json;
namespace fs = std::filesystem;

const char* to_string(Label label) { return label == Label::kFailing ? "FAILING" : "PASSING"; }

Label label_from_string(std::string_view text) {
  if (text == "PASSING") return Label::kPassing;
  if (text == "FAILING") return Label::kFailing;
  throw Error(ErrorKind::kParse, "unknown label '" + std::string(text) + "'");
}

const char* to_string(LabelingMode mode) {
  return mode == LabelingMode::kOracleFilter ? "ORACLE_FILTER" : "GRAMMAR";
}

namespace {

const std::set<std::string, std::less<>> kDescriptorKeys = {
    "project",       "bug_id",          "description",          "source_dir",
    "patch_file",    "compile_cmds",    "harness_cmd",          "unit_runner_cmd",
    "grammar_file",  "failing_grammar_file", "passing_grammar_file", "labeling_mode",
    "oracle_file",   "reference_cmd",   "curated_tests_file",   "unit_template_file",
    "timeout_ms",    "env"};

template <typename T>
T field(const json& doc, const char* key) {
  if (!doc.contains(key)) throw Error(ErrorKind::kParse, std::string("missing field '") + key + "'");
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kParse, std::string("field '") + key + "': " + e.what());
  }
}

template <typename T>
std::optional<T> optional_field(const json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  return field<T>(doc, key);
}

json parse_json(std::string_view text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, origin + ": " + e.what());
  }
}

void require_file(const fs::path& root, const std::string& relative, const std::string& what,
                  bool directory = false) {
  fs::path full = root / relative;
  std::error_code ec;
  bool ok = directory ? fs::is_directory(full, ec) : fs::is_regular_file(full, ec);
  if (!ok) {
    throw Error(ErrorKind::kLoad, what + " not found: " + full.string());
  }
}

void validate_files(const BugEntry& bug) {
  const auto& root = bug.root;
  require_file(root, bug.source_dir, "source_dir", true);
  require_file(root, bug.patch_file, "patch_file");
  require_file(root, bug.grammar_file, "grammar_file");
  if (bug.failing_grammar_file) require_file(root, *bug.failing_grammar_file, "failing_grammar_file");
  if (bug.passing_grammar_file) require_file(root, *bug.passing_grammar_file, "passing_grammar_file");
  require_file(root, bug.oracle_file, "oracle_file");
  require_file(root, bug.curated_tests_file, "curated_tests_file");
  require_file(root, bug.unit_template_file, "unit_template_file");
}

void validate_content(const BugEntry& bug) {
  auto check_grammar = [&](const std::string& relative) {
    try {
      load_grammar(io::read_file(bug.resolve(relative)));
    } catch (const Error& e) {
      throw Error(e.kind(), bug.resolve(relative).string() + ": " + e.what());
    }
  };
  check_grammar(bug.grammar_file);
  if (bug.failing_grammar_file) check_grammar(*bug.failing_grammar_file);
  if (bug.passing_grammar_file) check_grammar(*bug.passing_grammar_file);
  try {
    auto spec = load_oracle_spec(io::read_file(bug.resolve(bug.oracle_file)));
    check_oracle_binding(spec, bug.reference_cmd.has_value());
  } catch (const Error& e) {
    throw Error(e.kind(), bug.resolve(bug.oracle_file).string() + ": " + e.what());
  }
}

}  // namespace

json bug_to_json(const BugEntry& bug) {
  json doc = json::object();
  doc["project"] = bug.project;
  doc["bug_id"] = bug.bug_id;
  doc["description"] = bug.description;
  doc["source_dir"] = bug.source_dir;
  doc["patch_file"] = bug.patch_file;
  doc["compile_cmds"] = bug.compile_cmds;
  doc["harness_cmd"] = bug.harness_cmd;
  doc["unit_runner_cmd"] = bug.unit_runner_cmd;
  doc["grammar_file"] = bug.grammar_file;
  if (bug.failing_grammar_file) doc["failing_grammar_file"] = *bug.failing_grammar_file;
  if (bug.passing_grammar_file) doc["passing_grammar_file"] = *bug.passing_grammar_file;
  doc["labeling_mode"] = to_string(bug.labeling_mode);
  doc["oracle_file"] = bug.oracle_file;
  if (bug.reference_cmd) doc["reference_cmd"] = *bug.reference_cmd;
  doc["curated_tests_file"] = bug.curated_tests_file;
  doc["unit_template_file"] = bug.unit_template_file;
  doc["timeout_ms"] = bug.timeout_ms;
  doc["env"] = bug.env;
  return doc;
}

BugEntry bug_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorKind::kParse, "descriptor is not a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (!kDescriptorKeys.contains(key)) {
      throw Error(ErrorKind::kParse, "unknown descriptor field '" + key + "'");
    }
  }
  BugEntry bug;
  bug.project = field<std::string>(doc, "project");
  bug.bug_id = field<int>(doc, "bug_id");
  bug.description = optional_field<std::string>(doc, "description").value_or("");
  bug.source_dir = field<std::string>(doc, "source_dir");
  bug.patch_file = field<std::string>(doc, "patch_file");
  bug.compile_cmds = optional_field<std::vector<Argv>>(doc, "compile_cmds").value_or(std::vector<Argv>{});
  bug.harness_cmd = field<Argv>(doc, "harness_cmd");
  bug.unit_runner_cmd = field<Argv>(doc, "unit_runner_cmd");
  bug.grammar_file = field<std::string>(doc, "grammar_file");
  bug.failing_grammar_file = optional_field<std::string>(doc, "failing_grammar_file");
  bug.passing_grammar_file = optional_field<std::string>(doc, "passing_grammar_file");
  auto mode = field<std::string>(doc, "labeling_mode");
  if (mode == "GRAMMAR") {
    bug.labeling_mode = LabelingMode::kGrammar;
  } else if (mode == "ORACLE_FILTER") {
    bug.labeling_mode = LabelingMode::kOracleFilter;
  } else {
    throw Error(ErrorKind::kParse, "field 'labeling_mode': unknown mode '" + mode + "'");
  }
  bug.oracle_file = field<std::string>(doc, "oracle_file");
  bug.reference_cmd = optional_field<Argv>(doc, "reference_cmd");
  bug.curated_tests_file = field<std::string>(doc, "curated_tests_file");
  bug.unit_template_file = field<std::string>(doc, "unit_template_file");
  bug.timeout_ms = optional_field<int>(doc, "timeout_ms").value_or(10000);
  bug.env = optional_field<std::map<std::string, std::string>>(doc, "env").value_or(
      std::map<std::string, std::string>{});

  if (bug.project.empty()) throw Error(ErrorKind::kParse, "field 'project': must not be empty");
  if (bug.bug_id <= 0) throw Error(ErrorKind::kParse, "field 'bug_id': must be positive");
  if (bug.timeout_ms <= 0) throw Error(ErrorKind::kParse, "field 'timeout_ms': must be positive");
  if (bug.harness_cmd.empty()) throw Error(ErrorKind::kParse, "field 'harness_cmd': must not be empty");
  if (bug.labeling_mode == LabelingMode::kGrammar &&
      (!bug.failing_grammar_file || !bug.passing_grammar_file)) {
    throw Error(ErrorKind::kParse,
                "labeling_mode GRAMMAR requires failing_grammar_file and passing_grammar_file");
  }
  return bug;
}

std::vector<TestCaseRecord> parse_test_records(std::string_view jsonl, const std::string& origin) {
  std::vector<TestCaseRecord> records;
  std::size_t line_no = 0;
  while (!jsonl.empty()) {
    ++line_no;
    auto nl = jsonl.find('\n');
    auto line = jsonl.substr(0, nl);
    jsonl = nl == std::string_view::npos ? std::string_view{} : jsonl.substr(nl + 1);
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    std::string where = origin + ":" + std::to_string(line_no);
    json doc = parse_json(line, where);
    try {
      TestCaseRecord record;
      record.tokens = field<std::vector<std::string>>(doc, "tokens");
      record.label = label_from_string(field<std::string>(doc, "label"));
      records.push_back(std::move(record));
    } catch (const Error& e) {
      throw Error(ErrorKind::kParse, where + ": " + e.what());
    }
  }
  return records;
}

std::vector<TestCaseRecord> load_test_records(const fs::path& path) {
  return parse_test_records(io::read_file(path), path.string());
}

std::string format_test_records(const std::vector<TestCaseRecord>& records) {
  std::string out;
  for (const auto& record : records) {
    json doc = {{"tokens", record.tokens}, {"label", to_string(record.label)}};
    out += doc.dump() + "\n";
  }
  return out;
}

std::vector<std::string> Registry::projects() const {
  std::vector<std::string> out;
  for (const auto& bug : bugs_) {
    if (out.empty() || out.back() != bug.project) out.push_back(bug.project);
  }
  return out;
}

CuratedCounts Registry::curated_counts(const BugEntry& bug) const {
  auto it = counts_.find({bug.project, bug.bug_id});
  return it == counts_.end() ? CuratedCounts{} : it->second;
}

void Registry::add(BugEntry bug, CuratedCounts counts) {
  auto key = std::make_pair(bug.project, bug.bug_id);
  if (counts_.contains(key)) {
    throw Error(ErrorKind::kConflict,
                "duplicate bug " + bug.project + " #" + std::to_string(bug.bug_id));
  }
  counts_.emplace(key, counts);
  auto pos = std::lower_bound(bugs_.begin(), bugs_.end(), key, [](const BugEntry& b, const auto& k) {
    return std::make_pair(b.project, b.bug_id) < k;
  });
  bugs_.insert(pos, std::move(bug));
}

Registry load_registry(const fs::path& root) {
  fs::path manifest_path = root / "benchmark.json";
  json manifest = parse_json(io::read_file(manifest_path), manifest_path.string());
  if (!manifest.is_object() || !manifest.contains("bugs") || !manifest["bugs"].is_array()) {
    throw Error(ErrorKind::kParse, manifest_path.string() + ": expected {\"bugs\": [...]}");
  }
  Registry registry(root);
  for (const auto& entry : manifest["bugs"]) {
    if (!entry.is_string()) {
      throw Error(ErrorKind::kParse, manifest_path.string() + ": descriptor paths must be strings");
    }
    fs::path descriptor = root / entry.get<std::string>();
    json doc = parse_json(io::read_file(descriptor), descriptor.string());
    BugEntry bug;
    try {
      bug = bug_from_json(doc);
    } catch (const Error& e) {
      throw Error(e.kind(), descriptor.string() + ": " + e.what());
    }
    bug.root = root;
    validate_files(bug);
    validate_content(bug);
    CuratedCounts counts;
    for (const auto& record : load_test_records(bug.resolve(bug.curated_tests_file))) {
      ++(record.label == Label::kFailing ? counts.failing : counts.passing);
    }
    registry.add(std::move(bug), counts);
  }
  return registry;
}

const BugEntry& get_bug(const Registry& registry, std::string_view project, int bug_id) {
  std::vector<int> ids;
  for (const auto& bug : registry.bugs()) {
    if (bug.project != project) continue;
    if (bug.bug_id == bug_id) return bug;
    ids.push_back(bug.bug_id);
  }
  std::string message = "bug " + std::string(project) + " #" + std::to_string(bug_id) + " not found";
  if (!ids.empty()) {
    message += "; available ids:";
    for (int id : ids) message += " " + std::to_string(id);
  } else {
    message += "; available projects:";
    for (const auto& p : registry.projects()) message += " " + p;
  }
  throw Error(ErrorKind::kNotFound, message);
}

std::string summarize(const Registry& registry) {
  auto projects = registry.projects();
  std::ostringstream out;
  out << "Registry " << registry.root().string() << ": " << projects.size()
      << (projects.size() == 1 ? " project, " : " projects, ") << registry.bugs().size()
      << (registry.bugs().size() == 1 ? " bug\n" : " bugs\n");
  for (const auto& project : projects) {
    std::vector<const BugEntry*> bugs;
    for (const auto& bug : registry.bugs()) {
      if (bug.project == project) bugs.push_back(&bug);
    }
    out << project << ": " << bugs.size() << (bugs.size() == 1 ? " bug\n" : " bugs\n");
    for (const auto* bug : bugs) {
      out << "  #" << bug->bug_id << " " << bug->description << "\n";
    }
  }
  return out.str();
}

std::string describe(const Registry& registry, const BugEntry& bug) {
  auto counts = registry.curated_counts(bug);
  std::ostringstream out;
  out << bug.project << " #" << bug.bug_id << "\n"
      << "  description:   " << bug.description << "\n"
      << "  labeling mode: " << to_string(bug.labeling_mode) << "\n"
      << "  grammar:       " << bug.grammar_file << "\n"
      << "  oracle:        " << bug.oracle_file << "\n"
      << "  curated tests: " << counts.passing + counts.failing << " (" << counts.passing
      << " passing, " << counts.failing << " failing)\n"
      << "  timeout:       " << bug.timeout_ms << " ms\n";
  return out.str();
}

}  // namespace t4p
