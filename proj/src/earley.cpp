#include "regrow/earley.hpp"

#include <cmath>
#include <vector>

namespace regrow {

namespace {

struct IndexedRule {
  const Rule* rule;
  double probability;  // 1 / outdegree(lhs)
};

std::vector<std::vector<IndexedRule>> rules_by_lhs(const Grammar& g) {
  std::vector<std::vector<IndexedRule>> by_lhs(g.nonterminal_count());
  for (const Rule& r : g.rules()) by_lhs[r.lhs].push_back({&r, 0.0});
  for (auto& rules : by_lhs)
    for (auto& ir : rules) ir.probability = 1.0 / static_cast<double>(rules.size());
  return by_lhs;
}

}  // namespace

ParseResult string_logprob(const Grammar& grammar, std::string_view s) {
  ParseResult result;
  if (s.empty()) return result;
  const Alphabet& alphabet = grammar.alphabet();
  for (char c : s)
    if (!alphabet.contains(c)) return result;

  const auto by_lhs = rules_by_lhs(grammar);
  const std::size_t n = static_cast<std::size_t>(grammar.nonterminal_count());
  std::vector<double> inside(n, 0.0), next(n);
  std::vector<double> count(n, 0.0), next_count(n);
  inside[0] = 1.0;
  count[0] = 1.0;
  double log_scale = 0.0;
  double complete = 0.0;

  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool last = i + 1 == s.size();
    std::fill(next.begin(), next.end(), 0.0);
    std::fill(next_count.begin(), next_count.end(), 0.0);
    for (std::size_t nt = 0; nt < n; ++nt) {
      if (inside[nt] == 0.0) continue;
      for (const auto& [rule, p_rule] : by_lhs[nt]) {
        const double p_emit = rule->emission.emit_probability(s[i], alphabet);
        if (p_emit == 0.0) continue;
        const double mass = inside[nt] * p_rule * p_emit;
        if (rule->next) {
          if (!last) {
            next[*rule->next] += mass;
            next_count[*rule->next] += count[nt];
          }
        } else if (last) {
          complete += mass;
          result.derivation_count += count[nt];
        }
      }
    }
    if (last) break;
    double total = 0.0;
    for (double v : next) total += v;
    if (total == 0.0) return ParseResult{};
    for (double& v : next) v /= total;
    log_scale += std::log(total);
    std::swap(inside, next);
    std::swap(count, next_count);
  }
  if (complete == 0.0) return ParseResult{};
  result.log_probability = log_scale + std::log(complete);
  return result;
}

bool accepts(const Grammar& grammar, std::string_view s) {
  if (s.empty()) return false;
  const Alphabet& alphabet = grammar.alphabet();
  const std::size_t n = static_cast<std::size_t>(grammar.nonterminal_count());
  std::vector<char> live(n, 0), next(n);
  live[0] = 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const bool last = i + 1 == s.size();
    std::fill(next.begin(), next.end(), 0);
    bool any = false;
    for (const Rule& r : grammar.rules()) {
      if (!live[r.lhs] || !r.emission.can_emit(s[i], alphabet)) continue;
      if (last) {
        if (r.is_terminal()) return true;
      } else if (r.next) {
        next[*r.next] = 1;
        any = true;
      }
    }
    if (last || !any) return false;
    std::swap(live, next);
  }
  return false;
}

}  // namespace regrow
