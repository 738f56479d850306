#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "regrow/alphabet.hpp"

namespace regrow {

// Restricted regex: literals, classes, concatenation, alternation, star.
// Construct through the factories, which keep the tree flat: Concat and Alt
// never directly contain their own kind, have at least two children, and a
// Star never wraps another Star.
class Regex {
 public:
  enum class Kind { Literal, Class, Concat, Alt, Star };

  static Regex literal(char c);
  static Regex char_class(ClassId id);
  static Regex concat(std::vector<Regex> parts);
  static Regex alt(std::vector<Regex> arms);
  static Regex star(Regex body);

  Kind kind() const { return kind_; }
  char ch() const { return ch_; }
  ClassId cls() const { return cls_; }
  const std::vector<Regex>& children() const { return children_; }

  std::size_t node_count() const;
  bool nullable() const;

  friend bool operator==(const Regex& a, const Regex& b);

 private:
  Regex() = default;

  Kind kind_ = Kind::Literal;
  char ch_ = 0;
  ClassId cls_{};
  std::vector<Regex> children_;
};

// Syntax: literals, `.`, `\d`, `[a-z]`, `[0-9]` (plus registered class
// tokens), postfix `*`, infix `|`, `( )`. Backslash escapes `[ ] . * | ( ) \`.
// All patterns match whole strings. Throws ParseError with a character offset.
Regex parse_regex(std::string_view text, const Alphabet& alphabet);

// Canonical text with minimal parentheses; parse_regex inverts it exactly.
std::string print_regex(const Regex& regex, const Alphabet& alphabet);

struct TokenWeights {
  double gamma = 0.0002;
  double xi = 10.0;
  double operator_weight = 1.0;

  void validate() const;
};

struct RegexToken {
  enum class Kind { Literal, Class, Operator };
  Kind kind;
  std::string text;
};

// Tokens of the canonical printed form. An escaped literal contributes an
// operator token for the backslash followed by the literal itself.
std::vector<RegexToken> tokenize(const Regex& regex, const Alphabet& alphabet);

// sum over tokens of log(gamma * w(token)): w = xi for classes, operator_weight
// for `* | ( ) \`, 1 for literals.
double token_weight_product(const Regex& regex, const Alphabet& alphabet,
                            const TokenWeights& weights);

}  // namespace regrow
