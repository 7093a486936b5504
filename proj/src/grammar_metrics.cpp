#include "t4p/fuzzing.hpp"
#include "t4p/grammar.hpp"

namespace t4p {
namespace {

double acceptance_rate(const Grammar& producer, const Grammar& acceptor, std::size_t samples,
                       std::uint64_t seed) {
  std::size_t accepted = 0;
  for (std::size_t i = 0; i < samples; ++i) {
    auto tree = generate_tree(producer, derive_seed(seed, i, 0));
    if (parse_input(acceptor, frontier(tree))) ++accepted;
  }
  return static_cast<double>(accepted) / static_cast<double>(samples);
}

}  // namespace

PrecisionRecall grammar_precision_recall(const Grammar& candidate, const Grammar& truth,
                                         std::size_t samples, std::uint64_t seed) {
  if (samples == 0) return {};
  return {acceptance_rate(candidate, truth, samples, seed),
          acceptance_rate(truth, candidate, samples, seed ^ 0xA5A5A5A5A5A5A5A5ULL)};
}

}  // namespace t4p
