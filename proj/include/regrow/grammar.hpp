#pragma once

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "regrow/alphabet.hpp"
#include "regrow/random.hpp"

namespace regrow {

// What a rule writes: a single literal character or any member of a class.
struct Emission {
  enum class Kind : std::uint8_t { Literal, Class };

  Kind kind = Kind::Literal;
  char ch = 0;
  ClassId cls{};

  static Emission literal(char c) { return {Kind::Literal, c, {}}; }
  static Emission of_class(ClassId id) { return {Kind::Class, 0, id}; }

  bool is_class() const { return kind == Kind::Class; }
  bool can_emit(char c, const Alphabet& alphabet) const;
  // Probability of producing c once this emission is chosen.
  double emit_probability(char c, const Alphabet& alphabet) const;

  friend auto operator<=>(const Emission&, const Emission&) = default;
};

// S_lhs -> emission [S_next]. A missing continuation ends the derivation.
struct Rule {
  int lhs = 0;
  Emission emission;
  std::optional<int> next;

  bool is_terminal() const { return !next.has_value(); }
  friend auto operator<=>(const Rule&, const Rule&) = default;
};

// Probabilistic right-linear grammar with a uniform distribution over the
// rules of each nonterminal. Rules are a set kept in insertion order; S0 is
// the start symbol. Values are cheap to copy and never shared mutably.
class Grammar {
 public:
  explicit Grammar(AlphabetPtr alphabet, int nonterminal_count = 1);

  const Alphabet& alphabet() const { return *alphabet_; }
  const AlphabetPtr& alphabet_ptr() const { return alphabet_; }

  int nonterminal_count() const { return nonterminal_count_; }
  std::span<const Rule> rules() const { return rules_; }
  bool empty() const { return rules_.empty(); }

  // Appends S_|N| and returns its index.
  int add_nonterminal() { return nonterminal_count_++; }

  // Inserts the rule unless an identical one exists; returns true if added.
  bool add_rule(const Rule& rule);
  bool contains(const Rule& rule) const;

  std::size_t outdegree(int nt) const;

  friend bool operator==(const Grammar& a, const Grammar& b);

 private:
  AlphabetPtr alphabet_;
  int nonterminal_count_;
  std::vector<Rule> rules_;
};

// Rules of `nt` whose emission can produce `ch`, in insertion order.
std::vector<Rule> matching_rules(const Grammar& grammar, int nt, char ch);

// 1 / outdegree(rule.lhs). Throws ContractViolation if the rule is absent.
double rule_probability(const Grammar& grammar, const Rule& rule);

// Ancestral sample from S0. Returns nullopt when the derivation runs longer
// than `max_steps`; throws DeadEnd on a reachable nonterminal without rules.
std::optional<std::string> sample_string(const Grammar& grammar, Rng& rng,
                                         std::size_t max_steps = 1000);

// Exact probabilities of all strings of length <= max_len (test oracle).
// Throws BudgetExceeded if more than `budget` partial derivations are live.
std::map<std::string, double> enumerate_strings(const Grammar& grammar, std::size_t max_len,
                                                std::size_t budget = 2'000'000);

// One rule per line: `S0 -> 'a' S1`, `S1 -> [0-9]`, `S2 -> . S0`.
std::string to_text(const Grammar& grammar);
std::string to_text(const Rule& rule, const Alphabet& alphabet);
Grammar parse_grammar(std::string_view text, AlphabetPtr alphabet);

}  // namespace regrow
