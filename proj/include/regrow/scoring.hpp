#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "regrow/dataset.hpp"
#include "regrow/regex.hpp"

namespace regrow {

struct Candidate {
  Regex ast;
  std::string canonical;
  double log_prior = 0.0;
  std::optional<double> log_likelihood;  // absent: inconsistent with the data
  double posterior = 0.0;

  bool rejected() const { return !log_likelihood.has_value(); }
  double log_score() const { return log_prior + log_likelihood.value_or(-INFINITY); }
};

double prior(const Regex& ast, const Alphabet& alphabet, const TokenWeights& weights);

// Generative likelihood of the positives under the regex's canonical grammar.
// Absent when the grammar misses a positive or derives a negative. Throws
// PositivesRequired when there are no positives.
std::optional<double> likelihood(const Regex& ast, const Dataset& data, const AlphabetPtr& alphabet);

// Prior and likelihood for one regex, ready for normalize_posterior.
Candidate score_candidate(const Regex& ast, const Dataset& data, const AlphabetPtr& alphabet,
                          const TokenWeights& weights);

enum class RankStatus { Ok, NoConsistentCandidate };

struct Ranking {
  RankStatus status = RankStatus::NoConsistentCandidate;
  std::vector<Candidate> candidates;  // descending posterior, ties by canonical text
};

// Drops rejected candidates and normalizes exp(prior + likelihood) to sum to 1.
// Expects candidates already deduplicated by canonical text.
Ranking normalize_posterior(std::vector<Candidate> candidates);

const char* to_string(RankStatus status);

}  // namespace regrow
