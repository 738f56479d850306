#pragma once

#include <cstddef>
#include <optional>
#include <string_view>

#include "regrow/grammar.hpp"

namespace regrow {

struct ParseResult {
  std::optional<double> log_probability;  // absent when the string is underivable
  double derivation_count = 0;            // number of distinct derivations

  bool derivable() const { return log_probability.has_value(); }
};

// Total probability of all derivations of s. Every rule emits exactly one
// terminal, so the Earley chart collapses to a forward pass over
// (position, nonterminal) items; items are rescaled per position and the
// scale is accumulated in log space, so long strings do not underflow.
ParseResult string_logprob(const Grammar& grammar, std::string_view s);

// Membership only, on a boolean chart.
bool accepts(const Grammar& grammar, std::string_view s);

}  // namespace regrow
