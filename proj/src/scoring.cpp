#include "regrow/scoring.hpp"

#include <algorithm>
#include <cmath>

#include "regrow/automata.hpp"
#include "regrow/earley.hpp"
#include "regrow/errors.hpp"

namespace regrow {

double prior(const Regex& ast, const Alphabet& alphabet, const TokenWeights& weights) {
  return token_weight_product(ast, alphabet, weights);
}

std::optional<double> likelihood(const Regex& ast, const Dataset& data, const AlphabetPtr& alphabet) {
  if (data.positives.empty()) throw PositivesRequired();
  const Grammar g = regex_to_grammar(ast, alphabet);
  for (const auto& neg : data.negatives)
    if (accepts(g, neg)) return std::nullopt;
  double total = 0.0;
  for (const auto& pos : data.positives) {
    const ParseResult r = string_logprob(g, pos);
    if (!r.derivable()) return std::nullopt;
    total += *r.log_probability;
  }
  return total;
}

Candidate score_candidate(const Regex& ast, const Dataset& data, const AlphabetPtr& alphabet,
                          const TokenWeights& weights) {
  Candidate c{ast, print_regex(ast, *alphabet), prior(ast, *alphabet, weights),
              likelihood(ast, data, alphabet), 0.0};
  return c;
}

Ranking normalize_posterior(std::vector<Candidate> candidates) {
  Ranking out;
  std::erase_if(candidates, [](const Candidate& c) { return c.rejected(); });
  if (candidates.empty()) return out;

  double max_score = -INFINITY;
  for (const auto& c : candidates) max_score = std::max(max_score, c.log_score());
  double total = 0.0;
  for (const auto& c : candidates) total += std::exp(c.log_score() - max_score);
  for (auto& c : candidates) c.posterior = std::exp(c.log_score() - max_score) / total;

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.log_score() != b.log_score()) return a.log_score() > b.log_score();
    return a.canonical < b.canonical;
  });
  out.status = RankStatus::Ok;
  out.candidates = std::move(candidates);
  return out;
}

const char* to_string(RankStatus status) {
  switch (status) {
    case RankStatus::Ok:
      return "ok";
    case RankStatus::NoConsistentCandidate:
      return "no-consistent-candidate";
  }
  return "unknown";
}

}  // namespace regrow
