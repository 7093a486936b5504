#include "t4p/oracle.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "t4p/error.hpp"

namespace t4p {

using nlohmann::json;

const char* to_string(TestResult result) {
  switch (result) {
    case TestResult::kPassing: return "PASSING";
    case TestResult::kFailing: return "FAILING";
    case TestResult::kUndefined: return "UNDEFINED";
  }
  return "UNDEFINED";
}

TestResult test_result_from_string(std::string_view text) {
  if (text == "PASSING") return TestResult::kPassing;
  if (text == "FAILING") return TestResult::kFailing;
  if (text == "UNDEFINED") return TestResult::kUndefined;
  throw Error(ErrorKind::kParse, "unknown test result '" + std::string(text) + "'");
}

namespace pred {

Predicate exit_code(Relation relation, int value) { return {ExitCodeIs{relation, value}}; }
Predicate stdout_contains(std::string text) { return {StdoutContains{std::move(text)}}; }
Predicate stderr_contains(std::string text) { return {StderrContains{std::move(text)}}; }
Predicate stdout_matches(std::string_view pattern) { return {StdoutMatches{Pattern(pattern)}}; }
Predicate file_exists(std::string path) { return {FileExists{std::move(path)}}; }
Predicate feature_present(std::string nonterminal) { return {FeaturePresent{std::move(nonterminal)}}; }
Predicate feature_equals(std::string nonterminal, std::string text) {
  return {FeatureEquals{std::move(nonterminal), std::move(text)}};
}
Predicate ref_differs(Channel channel) { return {RefDiffers{channel}}; }
Predicate all(std::vector<Predicate> children) { return {All{std::move(children)}}; }
Predicate any(std::vector<Predicate> children) { return {Any{std::move(children)}}; }
Predicate negate(Predicate inner) {
  return {Not{std::make_shared<const Predicate>(std::move(inner))}};
}

}  // namespace pred

namespace {

[[noreturn]] void oracle_error(const std::string& message) { throw Error(ErrorKind::kOracle, message); }

std::string strip_brackets(std::string name) {
  if (name.size() >= 2 && name.front() == '<' && name.back() == '>') {
    return name.substr(1, name.size() - 2);
  }
  return name;
}

std::string expect_string(const json& value, const std::string& key) {
  if (!value.is_string()) oracle_error("'" + key + "' expects a string");
  return value.get<std::string>();
}

Predicate parse_predicate(const json& doc) {
  if (!doc.is_object() || doc.size() != 1) {
    oracle_error("a predicate must be an object with exactly one key, got " + doc.dump());
  }
  const auto& [key, value] = *doc.items().begin();
  if (key == "exit_code") {
    if (!value.is_object() || value.size() != 1) oracle_error("'exit_code' expects {\"eq\"|\"neq\": int}");
    const auto& [rel, number] = *value.items().begin();
    if (!number.is_number_integer()) oracle_error("'exit_code' expects an integer");
    if (rel == "eq") return pred::exit_code(Relation::kEq, number.get<int>());
    if (rel == "neq") return pred::exit_code(Relation::kNeq, number.get<int>());
    oracle_error("unknown exit_code relation '" + rel + "'");
  }
  if (key == "stdout_contains") return pred::stdout_contains(expect_string(value, key));
  if (key == "stderr_contains") return pred::stderr_contains(expect_string(value, key));
  if (key == "stdout_matches") return pred::stdout_matches(expect_string(value, key));
  if (key == "file_exists") {
    auto path = expect_string(value, key);
    if (path.empty() || path.front() == '/') oracle_error("'file_exists' expects a relative path");
    return pred::file_exists(std::move(path));
  }
  if (key == "feature_present") return pred::feature_present(strip_brackets(expect_string(value, key)));
  if (key == "feature_eq") {
    if (!value.is_array() || value.size() != 2 || !value[0].is_string() || !value[1].is_string()) {
      oracle_error("'feature_eq' expects [nonterminal, text]");
    }
    return pred::feature_equals(strip_brackets(value[0].get<std::string>()), value[1].get<std::string>());
  }
  if (key == "ref_differs") {
    auto channel = expect_string(value, key);
    if (channel == "stdout") return pred::ref_differs(Channel::kStdout);
    if (channel == "stderr") return pred::ref_differs(Channel::kStderr);
    oracle_error("'ref_differs' expects \"stdout\" or \"stderr\"");
  }
  if (key == "all" || key == "any") {
    if (!value.is_array()) oracle_error("'" + key + "' expects an array");
    std::vector<Predicate> children;
    for (const auto& child : value) children.push_back(parse_predicate(child));
    return key == "all" ? pred::all(std::move(children)) : pred::any(std::move(children));
  }
  if (key == "not") return pred::negate(parse_predicate(value));
  oracle_error("unknown predicate '" + key + "'");
}

bool references(const Predicate& p) {
  return std::visit(
      [](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, pred::RefDiffers>) {
          return true;
        } else if constexpr (std::is_same_v<T, pred::All> || std::is_same_v<T, pred::Any>) {
          return std::any_of(node.children.begin(), node.children.end(), references);
        } else if constexpr (std::is_same_v<T, pred::Not>) {
          return references(*node.inner);
        } else {
          return false;
        }
      },
      p.node);
}

struct Context {
  const RunObservation& obs;
  const FeatureMap& feats;
  const ReferenceOutput* reference;
};

bool holds(const Predicate& p, const Context& ctx) {
  return std::visit(
      [&](const auto& node) -> bool {
        using T = std::decay_t<decltype(node)>;
        if constexpr (std::is_same_v<T, pred::ExitCodeIs>) {
          bool equal = ctx.obs.exit_code.has_value() && *ctx.obs.exit_code == node.value;
          return node.relation == Relation::kEq ? equal : !equal;
        } else if constexpr (std::is_same_v<T, pred::StdoutContains>) {
          return ctx.obs.stdout_text.find(node.text) != std::string::npos;
        } else if constexpr (std::is_same_v<T, pred::StderrContains>) {
          return ctx.obs.stderr_text.find(node.text) != std::string::npos;
        } else if constexpr (std::is_same_v<T, pred::StdoutMatches>) {
          return node.pattern.search(ctx.obs.stdout_text);
        } else if constexpr (std::is_same_v<T, pred::FileExists>) {
          const auto& files = ctx.obs.created_files;
          return std::find(files.begin(), files.end(), node.path) != files.end();
        } else if constexpr (std::is_same_v<T, pred::FeaturePresent>) {
          auto it = ctx.feats.find(node.nonterminal);
          return it != ctx.feats.end() && !it->second.empty();
        } else if constexpr (std::is_same_v<T, pred::FeatureEquals>) {
          auto it = ctx.feats.find(node.nonterminal);
          if (it == ctx.feats.end()) return false;
          return std::find(it->second.begin(), it->second.end(), node.text) != it->second.end();
        } else if constexpr (std::is_same_v<T, pred::RefDiffers>) {
          if (ctx.reference == nullptr) {
            throw Error(ErrorKind::kEvaluation, "ref_differs evaluated without a reference output");
          }
          bool out = node.channel == Channel::kStdout;
          const auto& ours = out ? ctx.obs.stdout_text : ctx.obs.stderr_text;
          const auto& theirs = out ? ctx.reference->stdout_text : ctx.reference->stderr_text;
          return normalize_trailing_whitespace(ours) != normalize_trailing_whitespace(theirs);
        } else if constexpr (std::is_same_v<T, pred::All>) {
          bool result = true;
          // No short-circuit: a missing reference must raise regardless of
          // child order.
          for (const auto& child : node.children) result = holds(child, ctx) && result;
          return result;
        } else if constexpr (std::is_same_v<T, pred::Any>) {
          bool result = false;
          for (const auto& child : node.children) result = holds(child, ctx) || result;
          return result;
        } else {
          return !holds(*node.inner, ctx);
        }
      },
      p.node);
}

}  // namespace

OracleSpec load_oracle_spec(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::kParse, std::string("oracle: ") + e.what());
  }
  if (!doc.is_object()) oracle_error("oracle spec must be a JSON object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "failing_when" && key != "undefined_when") oracle_error("unknown oracle field '" + key + "'");
  }
  if (!doc.contains("failing_when")) oracle_error("oracle spec requires 'failing_when'");
  OracleSpec spec{std::nullopt, parse_predicate(doc["failing_when"])};
  if (doc.contains("undefined_when")) spec.undefined_when = parse_predicate(doc["undefined_when"]);
  return spec;
}

bool uses_reference(const OracleSpec& spec) {
  return references(spec.failing_when) || (spec.undefined_when && references(*spec.undefined_when));
}

void check_oracle_binding(const OracleSpec& spec, bool has_reference_cmd) {
  if (uses_reference(spec) && !has_reference_cmd) {
    oracle_error("oracle uses ref_differs but the bug declares no reference_cmd");
  }
}

TestResult evaluate(const OracleSpec& spec, const RunObservation& obs, const FeatureMap& feats,
                    const ReferenceOutput* reference) {
  if (obs.timed_out) return TestResult::kUndefined;
  Context ctx{obs, feats, reference};
  if (spec.undefined_when && holds(*spec.undefined_when, ctx)) return TestResult::kUndefined;
  return holds(spec.failing_when, ctx) ? TestResult::kFailing : TestResult::kPassing;
}

std::string normalize_trailing_whitespace(std::string_view text) {
  std::string out;
  std::size_t begin = 0;
  while (begin <= text.size()) {
    std::size_t nl = text.find('\n', begin);
    std::string_view line = text.substr(begin, nl == std::string_view::npos ? nl : nl - begin);
    std::size_t keep = line.find_last_not_of(" \t\r\v\f");
    out.append(line.substr(0, keep == std::string_view::npos ? 0 : keep + 1));
    if (nl == std::string_view::npos) break;
    out += '\n';
    begin = nl + 1;
  }
  while (!out.empty() && out.back() == '\n') out.pop_back();
  return out;
}

}  // namespace t4p
