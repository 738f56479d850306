#include "regrow/grammar.hpp"

#include <algorithm>
#include <charconv>

#include "regrow/errors.hpp"

namespace regrow {

bool Emission::can_emit(char c, const Alphabet& alphabet) const {
  return is_class() ? alphabet.cls(cls).contains(c) : ch == c;
}

double Emission::emit_probability(char c, const Alphabet& alphabet) const {
  if (!is_class()) return ch == c ? 1.0 : 0.0;
  const CharClass& k = alphabet.cls(cls);
  return k.contains(c) ? 1.0 / static_cast<double>(k.size()) : 0.0;
}

Grammar::Grammar(AlphabetPtr alphabet, int nonterminal_count)
    : alphabet_(std::move(alphabet)), nonterminal_count_(nonterminal_count) {
  if (!alphabet_) throw ContractViolation("grammar needs an alphabet");
  if (nonterminal_count_ < 1) throw ContractViolation("grammar needs at least the start nonterminal");
}

bool Grammar::add_rule(const Rule& rule) {
  if (rule.lhs < 0 || rule.lhs >= nonterminal_count_ ||
      (rule.next && (*rule.next < 0 || *rule.next >= nonterminal_count_)))
    throw ContractViolation("rule refers to an unknown nonterminal");
  if (rule.emission.is_class())
    (void)alphabet_->cls(rule.emission.cls);
  else if (!alphabet_->contains(rule.emission.ch))
    throw ContractViolation("rule emits a character outside the alphabet");
  if (contains(rule)) return false;
  rules_.push_back(rule);
  return true;
}

bool Grammar::contains(const Rule& rule) const {
  return std::find(rules_.begin(), rules_.end(), rule) != rules_.end();
}

std::size_t Grammar::outdegree(int nt) const {
  return static_cast<std::size_t>(
      std::count_if(rules_.begin(), rules_.end(), [nt](const Rule& r) { return r.lhs == nt; }));
}

bool operator==(const Grammar& a, const Grammar& b) {
  return a.nonterminal_count_ == b.nonterminal_count_ && a.rules_ == b.rules_ &&
         *a.alphabet_ == *b.alphabet_;
}

std::vector<Rule> matching_rules(const Grammar& grammar, int nt, char ch) {
  std::vector<Rule> out;
  for (const Rule& r : grammar.rules())
    if (r.lhs == nt && r.emission.can_emit(ch, grammar.alphabet())) out.push_back(r);
  return out;
}

double rule_probability(const Grammar& grammar, const Rule& rule) {
  if (!grammar.contains(rule)) throw ContractViolation("rule is not part of the grammar");
  return 1.0 / static_cast<double>(grammar.outdegree(rule.lhs));
}

std::optional<std::string> sample_string(const Grammar& grammar, Rng& rng, std::size_t max_steps) {
  std::vector<std::vector<const Rule*>> by_lhs(grammar.nonterminal_count());
  for (const Rule& r : grammar.rules()) by_lhs[r.lhs].push_back(&r);

  std::string out;
  int current = 0;
  for (std::size_t step = 0; step < max_steps; ++step) {
    const auto& options = by_lhs[current];
    if (options.empty())
      throw DeadEnd("nonterminal S" + std::to_string(current) + " has no rules");
    const Rule& r = *options[rng.below(options.size())];
    if (r.emission.is_class()) {
      const auto& members = grammar.alphabet().cls(r.emission.cls).members;
      out.push_back(members[rng.below(members.size())]);
    } else {
      out.push_back(r.emission.ch);
    }
    if (r.is_terminal()) return out;
    current = *r.next;
  }
  return std::nullopt;
}

std::map<std::string, double> enumerate_strings(const Grammar& grammar, std::size_t max_len,
                                                std::size_t budget) {
  std::map<std::string, double> result;
  std::map<std::pair<std::string, int>, double> live{{{"", 0}, 1.0}};
  const Alphabet& alphabet = grammar.alphabet();

  for (std::size_t len = 0; len < max_len && !live.empty(); ++len) {
    std::map<std::pair<std::string, int>, double> next;
    for (const auto& [state, mass] : live) {
      const auto& [prefix, nt] = state;
      const double out = static_cast<double>(grammar.outdegree(nt));
      for (const Rule& r : grammar.rules()) {
        if (r.lhs != nt) continue;
        std::vector<char> chars;
        if (r.emission.is_class()) {
          const auto& m = alphabet.cls(r.emission.cls).members;
          chars.assign(m.begin(), m.end());
        } else {
          chars.push_back(r.emission.ch);
        }
        const double p = mass / out / static_cast<double>(chars.size());
        for (char c : chars) {
          std::string s = prefix + c;
          if (r.is_terminal()) {
            result[s] += p;
          } else if (s.size() < max_len) {
            next[{std::move(s), *r.next}] += p;
            if (next.size() > budget)
              throw BudgetExceeded("string enumeration exceeded its budget");
          }
        }
      }
    }
    live = std::move(next);
  }
  return result;
}

namespace {

std::string quote_char(char c) {
  std::string s = "'";
  if (c == '\'' || c == '\\') s.push_back('\\');
  s.push_back(c);
  s.push_back('\'');
  return s;
}

std::string emission_text(const Emission& e, const Alphabet& alphabet) {
  return e.is_class() ? alphabet.cls(e.cls).grammar_token : quote_char(e.ch);
}

}  // namespace

std::string to_text(const Rule& rule, const Alphabet& alphabet) {
  std::string s = "S" + std::to_string(rule.lhs) + " -> " + emission_text(rule.emission, alphabet);
  if (rule.next) s += " S" + std::to_string(*rule.next);
  return s;
}

std::string to_text(const Grammar& grammar) {
  int referenced = 1;
  for (const Rule& r : grammar.rules()) {
    referenced = std::max(referenced, r.lhs + 1);
    if (r.next) referenced = std::max(referenced, *r.next + 1);
  }
  std::string out;
  if (grammar.nonterminal_count() > referenced)
    out += "# nonterminals: " + std::to_string(grammar.nonterminal_count()) + "\n";
  for (const Rule& r : grammar.rules()) out += to_text(r, grammar.alphabet()) + "\n";
  return out;
}

namespace {

class GrammarLineParser {
 public:
  GrammarLineParser(std::string_view line, std::size_t line_no, const Alphabet& alphabet)
      : line_(line), line_no_(line_no), alphabet_(alphabet) {}

  Rule parse() {
    Rule r;
    r.lhs = nonterminal();
    skip_space();
    if (line_.substr(pos_, 2) != "->") fail("expected '->'");
    pos_ += 2;
    skip_space();
    r.emission = emission();
    skip_space();
    if (pos_ < line_.size()) r.next = nonterminal();
    skip_space();
    if (pos_ != line_.size()) fail("trailing characters");
    return r;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError("grammar line " + std::to_string(line_no_) + ": " + what, line_no_);
  }

  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  int nonterminal() {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != 'S') fail("expected a nonterminal like S0");
    ++pos_;
    int value = 0;
    auto [end, ec] = std::from_chars(line_.data() + pos_, line_.data() + line_.size(), value);
    if (ec != std::errc() || value < 0) fail("bad nonterminal index");
    pos_ = static_cast<std::size_t>(end - line_.data());
    return value;
  }

  Emission emission() {
    if (pos_ < line_.size() && line_[pos_] == '\'') {
      ++pos_;
      if (pos_ < line_.size() && line_[pos_] == '\\') ++pos_;
      if (pos_ + 1 >= line_.size() || line_[pos_ + 1] != '\'') fail("bad quoted character");
      const char c = line_[pos_];
      pos_ += 2;
      if (!alphabet_.contains(c)) fail("character outside the alphabet");
      return Emission::literal(c);
    }
    // Longest class token wins so that "." never shadows a longer spelling.
    std::optional<ClassId> best;
    std::size_t best_len = 0;
    for (const auto& cls : alphabet_.classes()) {
      for (const std::string* tok : {&cls.grammar_token, &cls.regex_token}) {
        if (tok->size() > best_len && line_.substr(pos_, tok->size()) == *tok) {
          best = cls.id;
          best_len = tok->size();
        }
      }
    }
    if (!best) fail("expected a quoted character or a class");
    pos_ += best_len;
    return Emission::of_class(*best);
  }

  std::string_view line_;
  std::size_t line_no_;
  const Alphabet& alphabet_;
  std::size_t pos_ = 0;
};

}  // namespace

Grammar parse_grammar(std::string_view text, AlphabetPtr alphabet) {
  std::vector<Rule> rules;
  int count = 1;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    while (!line.empty() && line.front() == ' ') line.remove_prefix(1);
    if (line.empty()) continue;
    if (line.front() == '#') {
      constexpr std::string_view directive = "# nonterminals:";
      if (line.starts_with(directive)) {
        std::string_view n = line.substr(directive.size());
        while (!n.empty() && n.front() == ' ') n.remove_prefix(1);
        int value = 0;
        auto [end, ec] = std::from_chars(n.data(), n.data() + n.size(), value);
        if (ec != std::errc() || value < 1)
          throw ParseError("bad nonterminal count", line_no);
        count = std::max(count, value);
      }
      continue;
    }
    Rule r = GrammarLineParser(line, line_no, *alphabet).parse();
    count = std::max(count, r.lhs + 1);
    if (r.next) count = std::max(count, *r.next + 1);
    rules.push_back(r);
  }
  Grammar g(std::move(alphabet), count);
  for (const Rule& r : rules) g.add_rule(r);
  return g;
}

}  // namespace regrow
