#include "t4p/error.hpp"

namespace t4p {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kLoad: return "load";
    case ErrorKind::kConflict: return "conflict";
    case ErrorKind::kParse: return "parse";
    case ErrorKind::kNotFound: return "not-found";
    case ErrorKind::kGrammarSyntax: return "grammar-syntax";
    case ErrorKind::kUndefinedNonterminal: return "undefined-nonterminal";
    case ErrorKind::kUnreachableNonterminal: return "unreachable-nonterminal";
    case ErrorKind::kNonproductiveNonterminal: return "nonproductive-nonterminal";
    case ErrorKind::kOracle: return "oracle";
    case ErrorKind::kEvaluation: return "evaluation";
    case ErrorKind::kPatch: return "patch";
    case ErrorKind::kCheckout: return "checkout";
    case ErrorKind::kCompile: return "compile";
    case ErrorKind::kEnvironment: return "environment";
    case ErrorKind::kTemplate: return "template";
    case ErrorKind::kGenerationExhausted: return "generation-exhausted";
    case ErrorKind::kUsage: return "usage";
  }
  return "unknown";
}

GenerationExhausted::GenerationExhausted(std::size_t failing_done, std::size_t failing_wanted,
                                         std::size_t passing_done, std::size_t passing_wanted)
    : Error(ErrorKind::kGenerationExhausted,
            "generation exhausted its attempts: FAILING " + std::to_string(failing_done) + "/" +
                std::to_string(failing_wanted) + ", PASSING " + std::to_string(passing_done) + "/" +
                std::to_string(passing_wanted)),
      failing_done_(failing_done),
      failing_wanted_(failing_wanted),
      passing_done_(passing_done),
      passing_wanted_(passing_wanted) {}

}  // namespace t4p
