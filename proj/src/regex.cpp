#include "regrow/regex.hpp"

#include <cmath>

#include "regrow/errors.hpp"

namespace regrow {

namespace {

constexpr std::string_view kEscaped = "[.*|()\\";
constexpr std::string_view kEscapable = "[].*|()\\";

}  // namespace

Regex Regex::literal(char c) {
  Regex r;
  r.kind_ = Kind::Literal;
  r.ch_ = c;
  return r;
}

Regex Regex::char_class(ClassId id) {
  Regex r;
  r.kind_ = Kind::Class;
  r.cls_ = id;
  return r;
}

Regex Regex::concat(std::vector<Regex> parts) {
  std::vector<Regex> flat;
  for (auto& p : parts) {
    if (p.kind_ == Kind::Concat) {
      for (auto& c : p.children_) flat.push_back(std::move(c));
    } else {
      flat.push_back(std::move(p));
    }
  }
  if (flat.empty()) throw ContractViolation("concatenation needs at least one part");
  if (flat.size() == 1) return std::move(flat.front());
  Regex r;
  r.kind_ = Kind::Concat;
  r.children_ = std::move(flat);
  return r;
}

Regex Regex::alt(std::vector<Regex> arms) {
  std::vector<Regex> flat;
  for (auto& a : arms) {
    if (a.kind_ == Kind::Alt) {
      for (auto& c : a.children_) flat.push_back(std::move(c));
    } else {
      flat.push_back(std::move(a));
    }
  }
  if (flat.empty()) throw ContractViolation("alternation needs at least one arm");
  if (flat.size() == 1) return std::move(flat.front());
  Regex r;
  r.kind_ = Kind::Alt;
  r.children_ = std::move(flat);
  return r;
}

Regex Regex::star(Regex body) {
  if (body.kind_ == Kind::Star) return body;
  Regex r;
  r.kind_ = Kind::Star;
  r.children_.push_back(std::move(body));
  return r;
}

std::size_t Regex::node_count() const {
  std::size_t n = 1;
  for (const auto& c : children_) n += c.node_count();
  return n;
}

bool Regex::nullable() const {
  switch (kind_) {
    case Kind::Literal:
    case Kind::Class:
      return false;
    case Kind::Star:
      return true;
    case Kind::Concat:
      for (const auto& c : children_)
        if (!c.nullable()) return false;
      return true;
    case Kind::Alt:
      for (const auto& c : children_)
        if (c.nullable()) return true;
      return false;
  }
  return false;
}

bool operator==(const Regex& a, const Regex& b) {
  if (a.kind_ != b.kind_) return false;
  switch (a.kind_) {
    case Regex::Kind::Literal:
      return a.ch_ == b.ch_;
    case Regex::Kind::Class:
      return a.cls_ == b.cls_;
    default:
      return a.children_ == b.children_;
  }
}

namespace {

class RegexParser {
 public:
  RegexParser(std::string_view text, const Alphabet& alphabet) : text_(text), alphabet_(alphabet) {}

  Regex parse() {
    if (text_.empty()) fail("empty pattern");
    Regex r = alternation();
    if (pos_ < text_.size()) {
      if (text_[pos_] == ')') fail("unbalanced ')'");
      fail("unexpected character");
    }
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("regex: " + what, pos_);
  }

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }

  Regex alternation() {
    std::vector<Regex> arms;
    arms.push_back(concatenation());
    while (!at_end() && peek() == '|') {
      ++pos_;
      arms.push_back(concatenation());
    }
    return Regex::alt(std::move(arms));
  }

  Regex concatenation() {
    std::vector<Regex> parts;
    while (!at_end() && peek() != '|' && peek() != ')') parts.push_back(repetition());
    if (parts.empty()) fail("empty alternative");
    return Regex::concat(std::move(parts));
  }

  Regex repetition() {
    if (peek() == '*') fail("dangling '*'");
    Regex r = atom();
    while (!at_end() && peek() == '*') {
      ++pos_;
      r = Regex::star(std::move(r));
    }
    return r;
  }

  Regex atom() {
    if (peek() == '(') {
      const std::size_t open = pos_++;
      Regex inner = alternation();
      if (at_end() || peek() != ')') {
        pos_ = open;
        fail("unbalanced '('");
      }
      ++pos_;
      return inner;
    }
    if (auto cls = class_token()) return Regex::char_class(*cls);
    if (peek() == '\\') {
      if (pos_ + 1 >= text_.size()) fail("trailing backslash");
      const char c = text_[pos_ + 1];
      if (kEscapable.find(c) == std::string_view::npos) fail("unknown escape");
      if (!alphabet_.contains(c)) fail("character outside the alphabet");
      pos_ += 2;
      return Regex::literal(c);
    }
    if (peek() == '[') fail("unsupported character class");
    if (peek() == '.') fail("'.' is not available in this alphabet");
    const char c = peek();
    if (!alphabet_.contains(c)) fail("character outside the alphabet");
    ++pos_;
    return Regex::literal(c);
  }

  std::optional<ClassId> class_token() {
    std::optional<ClassId> best;
    std::size_t best_len = 0;
    for (const auto& cls : alphabet_.classes()) {
      for (const std::string* tok : {&cls.regex_token, &cls.grammar_token}) {
        if (tok->size() > best_len && text_.substr(pos_, tok->size()) == *tok) {
          best = cls.id;
          best_len = tok->size();
        }
      }
    }
    pos_ += best_len;
    return best;
  }

  std::string_view text_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
};

void print_into(const Regex& r, const Alphabet& alphabet, std::string& out) {
  auto wrapped = [&](const Regex& child, bool parens) {
    if (parens) out.push_back('(');
    print_into(child, alphabet, out);
    if (parens) out.push_back(')');
  };
  switch (r.kind()) {
    case Regex::Kind::Literal:
      if (kEscaped.find(r.ch()) != std::string_view::npos) out.push_back('\\');
      out.push_back(r.ch());
      break;
    case Regex::Kind::Class:
      out += alphabet.cls(r.cls()).regex_token;
      break;
    case Regex::Kind::Concat:
      for (const auto& c : r.children()) wrapped(c, c.kind() == Regex::Kind::Alt);
      break;
    case Regex::Kind::Alt:
      for (std::size_t i = 0; i < r.children().size(); ++i) {
        if (i) out.push_back('|');
        wrapped(r.children()[i], false);
      }
      break;
    case Regex::Kind::Star: {
      const Regex& body = r.children().front();
      wrapped(body, body.kind() == Regex::Kind::Concat || body.kind() == Regex::Kind::Alt);
      out.push_back('*');
      break;
    }
  }
}

}  // namespace

Regex parse_regex(std::string_view text, const Alphabet& alphabet) {
  return RegexParser(text, alphabet).parse();
}

std::string print_regex(const Regex& regex, const Alphabet& alphabet) {
  std::string out;
  print_into(regex, alphabet, out);
  return out;
}

void TokenWeights::validate() const {
  if (!(gamma > 0.0 && gamma < 1.0)) throw InputError("gamma must lie in (0, 1)");
  if (!(xi > 1.0)) throw InputError("xi must exceed 1");
  if (!(operator_weight > 0.0)) throw InputError("operator weight must be positive");
}

std::vector<RegexToken> tokenize(const Regex& regex, const Alphabet& alphabet) {
  const std::string text = print_regex(regex, alphabet);
  std::vector<RegexToken> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t best_len = 0;
    for (const auto& cls : alphabet.classes()) {
      const auto& tok = cls.regex_token;
      if (tok.size() > best_len && std::string_view(text).substr(pos, tok.size()) == tok)
        best_len = tok.size();
    }
    if (best_len > 0) {
      tokens.push_back({RegexToken::Kind::Class, text.substr(pos, best_len)});
      pos += best_len;
    } else if (text[pos] == '\\') {
      tokens.push_back({RegexToken::Kind::Operator, "\\"});
      tokens.push_back({RegexToken::Kind::Literal, text.substr(pos + 1, 1)});
      pos += 2;
    } else if (std::string_view("*|()").find(text[pos]) != std::string_view::npos) {
      tokens.push_back({RegexToken::Kind::Operator, text.substr(pos, 1)});
      ++pos;
    } else {
      tokens.push_back({RegexToken::Kind::Literal, text.substr(pos, 1)});
      ++pos;
    }
  }
  return tokens;
}

double token_weight_product(const Regex& regex, const Alphabet& alphabet,
                            const TokenWeights& weights) {
  const double log_gamma = std::log(weights.gamma);
  double total = 0.0;
  for (const auto& tok : tokenize(regex, alphabet)) {
    total += log_gamma;
    if (tok.kind == RegexToken::Kind::Class) total += std::log(weights.xi);
    if (tok.kind == RegexToken::Kind::Operator) total += std::log(weights.operator_weight);
  }
  return total;
}

}  // namespace regrow
