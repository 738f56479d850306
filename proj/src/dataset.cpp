#include "regrow/dataset.hpp"

#include <set>

namespace regrow {

std::vector<std::string> validate(const Dataset& data, const Alphabet& alphabet) {
  std::vector<std::string> problems;
  const std::set<std::string> pos(data.positives.begin(), data.positives.end());
  for (const auto& n : data.negatives)
    if (pos.count(n)) problems.push_back("'" + n + "' is both positive and negative");
  for (const auto& p : data.positives)
    if (p.empty()) problems.push_back("empty positive string");
  for (const auto* list : {&data.positives, &data.negatives}) {
    for (const auto& s : *list) {
      for (char c : s) {
        if (!alphabet.contains(c)) {
          problems.push_back("'" + s + "' has a character outside the alphabet");
          break;
        }
      }
    }
  }
  if (data.human_recovery && !(*data.human_recovery >= 0.0 && *data.human_recovery <= 1.0))
    problems.push_back("human_recovery outside [0, 1]");
  return problems;
}

}  // namespace regrow
