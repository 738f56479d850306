#pragma once

#include <cstddef>
#include <string_view>

#include "regrow/grammar.hpp"
#include "regrow/regex.hpp"

namespace regrow {

// Canonical grammar of a regex: position (Glushkov) automaton, which has no
// epsilon moves, read as right-linear rules, then bisimilar nonterminals
// merged and renumbered breadth-first from S0. The empty string cannot be
// derived by any grammar, so for a nullable regex the grammar's language is
// L(regex) minus the empty string.
Grammar regex_to_grammar(const Regex& regex, AlphabetPtr alphabet);

struct GrammarToRegexOptions {
  // Conversion aborts with BudgetExceeded once an intermediate label grows past this.
  std::size_t max_nodes = 4000;
};

// State elimination over the grammar's automaton: states removed in order of
// fewest (in x out) transitions, ties by index. Throws EmptyLanguage when no
// string is derivable.
Regex grammar_to_regex(const Grammar& grammar, GrammarToRegexOptions options = {});

// Whole-string match by simulating the position automaton.
bool matches(const Regex& regex, std::string_view s, const Alphabet& alphabet);

// Language equality over `alphabet`, decided on the product of the two
// subset constructions. With `ignore_empty` the empty string is disregarded.
bool equivalent(const Regex& a, const Regex& b, const Alphabet& alphabet,
                bool ignore_empty = false);

}  // namespace regrow
