#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "regrow/automata.hpp"
#include "regrow/corpus.hpp"
#include "regrow/earley.hpp"
#include "regrow/errors.hpp"
#include "regrow/recognition.hpp"
#include "regrow/scoring.hpp"

using namespace regrow;

TEST_CASE("print then parse returns the same tree") {
  const auto a = Alphabet::printable_ascii();
  std::mt19937_64 gen(1);
  for (int i = 0; i < 500; ++i) {
    const Regex r = oracle::random_regex(gen, *a, "ab(*.\\]|", 4);
    const std::string text = print_regex(r, *a);
    const Regex back = parse_regex(text, *a);
    CHECK_MESSAGE(back == r, text);
    CHECK(print_regex(back, *a) == text);
    CHECK(prior(back, *a, {}) == prior(r, *a, {}));
  }
}

TEST_CASE("regex to grammar to regex keeps the language") {
  const auto a = Alphabet::make("abc");
  std::mt19937_64 gen(2);
  for (int i = 0; i < 300; ++i) {
    const Regex r = oracle::random_regex(gen, *a, "abc", 3);
    const Grammar g = regex_to_grammar(r, a);
    try {
      const Regex back = grammar_to_regex(g);
      CHECK_MESSAGE(equivalent(back, r, *a, r.nullable()), print_regex(r, *a) << " -> " << print_regex(back, *a));
      CHECK_FALSE(matches(back, "", *a));
    } catch (const EmptyLanguage&) {
      // Only the empty string was in the language.
      CHECK(r.nullable());
      for (const auto& w : oracle::all_strings("abc", 3)) CHECK((w.empty() || !matches(r, w, *a)));
    }
  }
}

TEST_CASE("grammar language equals brute-force membership") {
  const auto a = Alphabet::make("ab1");
  std::mt19937_64 gen(3);
  const auto words = oracle::all_strings("ab1", 4);
  for (int i = 0; i < 200; ++i) {
    const Regex r = oracle::random_regex(gen, *a, "ab1", 3);
    const auto lang = enumerate_strings(regex_to_grammar(r, a), 4);
    for (const auto& w : words) {
      const bool member = !w.empty() && oracle::std_match(r, w, *a);
      CHECK(lang.count(w) == (member ? 1u : 0u));
      CHECK(matches(r, w, *a) == oracle::std_match(r, w, *a));
    }
  }
}

TEST_CASE("appending a token lowers the prior") {
  const auto a = Alphabet::printable_ascii();
  const TokenWeights w;
  std::mt19937_64 gen(4);
  for (int i = 0; i < 200; ++i) {
    const Regex r = oracle::random_regex(gen, *a, "xyz", 3);
    const double base = token_weight_product(r, *a, w);
    const Regex lit = Regex::concat({r, Regex::literal('q')});
    const Regex cls = Regex::concat({r, Regex::char_class(*a->dot())});
    CHECK(token_weight_product(lit, *a, w) < base);
    CHECK(token_weight_product(cls, *a, w) < base);
    if (r.kind() != Regex::Kind::Star) CHECK(token_weight_product(Regex::star(r), *a, w) < base);
  }
}

TEST_CASE("equivalence behaves as an equivalence relation") {
  const auto a = Alphabet::make("ab");
  std::mt19937_64 gen(5);
  std::vector<Regex> pool;
  for (int i = 0; i < 40; ++i) pool.push_back(oracle::random_regex(gen, *a, "ab", 2));
  for (const char* s : {"a*", "(a|b)*", "(a*b*)*", "aa*", "a*a"}) pool.push_back(parse_regex(s, *a));
  for (std::size_t i = 0; i < pool.size(); ++i) {
    CHECK(equivalent(pool[i], pool[i], *a));
    for (std::size_t j = 0; j < pool.size(); ++j) {
      const bool ij = equivalent(pool[i], pool[j], *a);
      CHECK(ij == equivalent(pool[j], pool[i], *a));
      if (!ij) continue;
      for (std::size_t k = 0; k < pool.size(); ++k)
        if (equivalent(pool[j], pool[k], *a)) CHECK(equivalent(pool[i], pool[k], *a));
    }
  }
}

TEST_CASE("parser probabilities are bounded and agree with membership") {
  const auto a = Alphabet::make("abc");
  std::mt19937_64 gen(6);
  for (int i = 0; i < 200; ++i) {
    const Grammar g = oracle::random_grammar(gen, a, 4, 8);
    for (const auto& w : oracle::all_strings("abcd", 3)) {
      const auto r = string_logprob(g, w);
      CHECK(accepts(g, w) == r.derivable());
      if (r.derivable()) {
        CHECK(std::isfinite(*r.log_probability));
        CHECK(*r.log_probability <= 1e-12);
      }
    }
  }
}

TEST_CASE("trace weight is the sum of class emission factors") {
  RecognitionConfig config;
  std::mt19937_64 gen(7);
  const std::string pool = "ab1.Z";
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    std::vector<std::string> pos;
    for (int i = 0; i < 1 + static_cast<int>(gen() % 3); ++i) {
      std::string s;
      for (int j = 0; j < 1 + static_cast<int>(gen() % 5); ++j) s += pool[gen() % pool.size()];
      pos.push_back(s);
    }
    Rng rng(seed);
    config.order = static_cast<ProcessingOrder>(seed % 3);
    const Trace t = grow(Dataset{"p", pos, {"zz"}, std::nullopt, std::nullopt}, config, rng);
    if (t.status() == TraceStatus::Rejected) {
      CHECK(t.log_weight() == -INFINITY);
      continue;
    }
    std::map<std::pair<int, int>, Emission> used;
    for (const auto& c : t.choices()) {
      const std::pair<int, int> at{c.address.example, c.address.position};
      if (c.address.kind == ChoiceKind::RulePick) used[at] = std::get<Rule>(c.value).emission;
      if (c.address.kind == ChoiceKind::ClassPick) used[at] = std::get<Emission>(c.value);
    }
    double expected = 0.0;
    for (const auto& [at, e] : used)
      if (e.is_class()) expected -= std::log(static_cast<double>(config.alphabet->cls(e.cls).size()));
    CHECK(used.size() == t.total_steps());
    CHECK(t.log_weight() == doctest::Approx(expected).epsilon(1e-12));
    for (const auto& p : pos) CHECK(accepts(t.grammar(), p));
  }
}

TEST_CASE("report aggregates recompute from the rows") {
  const auto a = Alphabet::printable_ascii();
  std::mt19937_64 gen(8);
  const std::vector<std::string> regexes{"a", "b", "ab", "a*", "b*a", "ab|ba"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DatasetResult> results;
    for (int i = 0; i < 8; ++i) {
      DatasetResult r;
      r.dataset.id = std::to_string(i);
      r.dataset.positives = {"x"};
      if (gen() % 4) r.dataset.target = regexes[gen() % regexes.size()];
      if (gen() % 3) r.dataset.human_recovery = static_cast<double>(gen() % 11) / 10.0;
      const std::size_t n = gen() % 6;
      for (std::size_t j = 0; j < n; ++j) {
        const auto& text = regexes[(gen() % regexes.size())];
        r.ranking.candidates.push_back(Candidate{parse_regex(text, *a), text, 0, 0, 1.0 / static_cast<double>(n)});
      }
      results.push_back(r);
    }
    const auto report = build_report(results, {1, 2, 3, 10}, *a);
    for (std::size_t i = 0; i < report.kbest.size(); ++i) {
      const std::size_t k = report.kbest[i].k;
      std::size_t counted = 0, hits = 0;
      for (std::size_t d = 0; d < results.size(); ++d) {
        if (!results[d].dataset.target) continue;
        ++counted;
        hits += report.rows[d].found && *report.rows[d].rank <= k;
      }
      CHECK(report.kbest[i].counted == counted);
      CHECK(report.kbest[i].score == (counted ? static_cast<double>(hits) / static_cast<double>(counted) : 0.0));
      CHECK(report.kbest[i].score >= 0.0);
      CHECK(report.kbest[i].score <= 1.0);
    }
    for (const auto& row : report.rows)
      if (row.found) CHECK(*row.rank >= 1);
  }
}
