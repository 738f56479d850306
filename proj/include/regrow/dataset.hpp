#pragma once

#include <optional>
#include <string>
#include <vector>

#include "regrow/alphabet.hpp"

namespace regrow {

struct Dataset {
  std::string id;
  std::vector<std::string> positives;
  std::vector<std::string> negatives;
  std::optional<std::string> target;
  std::optional<double> human_recovery;

  // The recognition model needs at least one positive string to grow from.
  bool runnable() const { return !positives.empty(); }

  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Human-readable problems: overlap between positives and negatives, empty
// positive strings, characters outside the alphabet, recovery outside [0,1].
std::vector<std::string> validate(const Dataset& data, const Alphabet& alphabet);

}  // namespace regrow
