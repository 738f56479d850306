#include "regrow/automata.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <tuple>

#include "regrow/errors.hpp"

namespace regrow {

namespace {

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

// Glushkov automaton. State 0 is initial, state p+1 is "just read position p".
struct PositionAutomaton {
  std::vector<Emission> symbols;
  std::vector<int> first;
  std::vector<bool> last;
  std::vector<std::vector<int>> follow;
  bool nullable = false;

  std::size_t state_count() const { return symbols.size() + 1; }

  const std::vector<int>& successors(int state) const {
    return state == 0 ? first : follow[state - 1];
  }

  bool accepting(int state) const { return state == 0 ? nullable : last[state - 1]; }
};

struct Fragment {
  bool nullable;
  std::vector<int> first;
  std::vector<int> last;
};

Fragment build_fragment(const Regex& r, PositionAutomaton& pa) {
  switch (r.kind()) {
    case Regex::Kind::Literal:
    case Regex::Kind::Class: {
      const int p = static_cast<int>(pa.symbols.size());
      pa.symbols.push_back(r.kind() == Regex::Kind::Literal ? Emission::literal(r.ch())
                                                            : Emission::of_class(r.cls()));
      pa.follow.emplace_back();
      return {false, {p}, {p}};
    }
    case Regex::Kind::Concat: {
      Fragment acc = build_fragment(r.children().front(), pa);
      for (std::size_t i = 1; i < r.children().size(); ++i) {
        Fragment next = build_fragment(r.children()[i], pa);
        for (int l : acc.last)
          pa.follow[l].insert(pa.follow[l].end(), next.first.begin(), next.first.end());
        if (acc.nullable) acc.first.insert(acc.first.end(), next.first.begin(), next.first.end());
        if (next.nullable)
          next.last.insert(next.last.end(), acc.last.begin(), acc.last.end());
        acc.last = std::move(next.last);
        acc.nullable = acc.nullable && next.nullable;
      }
      return acc;
    }
    case Regex::Kind::Alt: {
      Fragment acc{false, {}, {}};
      for (const auto& c : r.children()) {
        Fragment f = build_fragment(c, pa);
        acc.nullable = acc.nullable || f.nullable;
        acc.first.insert(acc.first.end(), f.first.begin(), f.first.end());
        acc.last.insert(acc.last.end(), f.last.begin(), f.last.end());
      }
      return acc;
    }
    case Regex::Kind::Star: {
      Fragment f = build_fragment(r.children().front(), pa);
      for (int l : f.last) pa.follow[l].insert(pa.follow[l].end(), f.first.begin(), f.first.end());
      f.nullable = true;
      return f;
    }
  }
  throw ContractViolation("unknown regex node");
}

PositionAutomaton position_automaton(const Regex& regex) {
  PositionAutomaton pa;
  Fragment f = build_fragment(regex, pa);
  pa.nullable = f.nullable;
  pa.first = std::move(f.first);
  sort_unique(pa.first);
  pa.last.assign(pa.symbols.size(), false);
  for (int l : f.last) pa.last[l] = true;
  for (auto& fl : pa.follow) sort_unique(fl);
  return pa;
}

// Rule shape of an automaton state; target -1 marks a terminal rule.
using Edge = std::pair<Emission, int>;

}  // namespace

Grammar regex_to_grammar(const Regex& regex, AlphabetPtr alphabet) {
  const PositionAutomaton pa = position_automaton(regex);
  const int n = static_cast<int>(pa.state_count());

  std::vector<std::vector<Edge>> edges(n);
  for (int s = 0; s < n; ++s) {
    for (int q : pa.successors(s)) {
      if (!pa.follow[q].empty()) edges[s].push_back({pa.symbols[q], q + 1});
      if (pa.last[q]) edges[s].push_back({pa.symbols[q], -1});
    }
  }

  // Coarsest bisimulation by signature refinement.
  std::vector<int> block(n, 0);
  std::size_t block_count = 1;
  while (true) {
    std::map<std::vector<Edge>, int> ids;
    std::vector<int> refined(n);
    for (int s = 0; s < n; ++s) {
      std::vector<Edge> sig;
      for (auto [e, t] : edges[s]) sig.push_back({e, t < 0 ? -1 : block[t]});
      std::sort(sig.begin(), sig.end());
      sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
      sig.insert(sig.begin(), {Emission{}, -2 - block[s]});
      auto [it, inserted] = ids.try_emplace(std::move(sig), static_cast<int>(ids.size()));
      refined[s] = it->second;
    }
    block = std::move(refined);
    if (ids.size() == block_count) break;
    block_count = ids.size();
  }

  std::vector<int> representative(block_count, -1);
  for (int s = 0; s < n; ++s)
    if (representative[block[s]] < 0) representative[block[s]] = s;

  // Breadth-first renumbering from the start block.
  std::vector<int> new_id(block_count, -1);
  std::vector<int> order{block[0]};
  new_id[block[0]] = 0;
  std::vector<std::vector<Edge>> quotient(block_count);
  for (std::size_t i = 0; i < order.size(); ++i) {
    const int b = order[i];
    std::vector<Edge> sig;
    for (auto [e, t] : edges[representative[b]]) sig.push_back({e, t < 0 ? -1 : block[t]});
    std::sort(sig.begin(), sig.end());
    sig.erase(std::unique(sig.begin(), sig.end()), sig.end());
    for (auto [e, t] : sig) {
      if (t >= 0 && new_id[t] < 0) {
        new_id[t] = static_cast<int>(order.size());
        order.push_back(t);
      }
    }
    quotient[b] = std::move(sig);
  }

  Grammar g(std::move(alphabet), static_cast<int>(order.size()));
  for (int b : order) {
    for (auto [e, t] : quotient[b]) {
      Rule r{new_id[b], e, std::nullopt};
      if (t >= 0) r.next = new_id[t];
      g.add_rule(r);
    }
  }
  return g;
}

namespace {

// Edge label during state elimination; nullopt is the empty word.
using Label = std::optional<Regex>;

class Eliminator {
 public:
  Eliminator(const Alphabet& alphabet, std::size_t max_nodes)
      : alphabet_(alphabet), max_nodes_(max_nodes) {}

  void add(int from, int to, Label label) {
    auto it = edges_.find({from, to});
    if (it == edges_.end()) {
      edges_.emplace(std::pair{from, to}, std::move(label));
    } else {
      it->second = alternate(std::move(it->second), std::move(label));
    }
  }

  void eliminate(int q) {
    Label loop;
    bool has_loop = false;
    std::vector<std::pair<int, Label>> in, out;
    for (auto it = edges_.begin(); it != edges_.end();) {
      const auto [from, to] = it->first;
      if (from == q && to == q) {
        loop = std::move(it->second);
        has_loop = true;
      } else if (to == q) {
        in.emplace_back(from, std::move(it->second));
      } else if (from == q) {
        out.emplace_back(to, std::move(it->second));
      } else {
        ++it;
        continue;
      }
      it = edges_.erase(it);
    }
    for (const auto& [p, r1] : in) {
      for (const auto& [r, r2] : out) {
        std::vector<Regex> parts;
        if (r1) parts.push_back(*r1);
        if (has_loop) parts.push_back(Regex::star(*loop));
        if (r2) parts.push_back(*r2);
        Label label;
        if (!parts.empty()) label = Regex::concat(std::move(parts));
        check_size(label);
        add(p, r, std::move(label));
      }
    }
  }

  // (in-degree, out-degree) ignoring self loops.
  std::pair<std::size_t, std::size_t> degree(int q) const {
    std::size_t in = 0, out = 0;
    for (const auto& [key, _] : edges_) {
      if (key.first == key.second) continue;
      if (key.second == q) ++in;
      if (key.first == q) ++out;
    }
    return {in, out};
  }

  const Label* find(int from, int to) const {
    auto it = edges_.find({from, to});
    return it == edges_.end() ? nullptr : &it->second;
  }

 private:
  void check_size(const Label& label) const {
    if (label && label->node_count() > max_nodes_)
      throw BudgetExceeded("regex produced by state elimination is too large");
  }

  Label alternate(Label a, Label b) {
    // The empty word only ever labels the initial edge, which has no parallel edge.
    if (!a || !b) throw ContractViolation("unexpected empty-word alternative");
    std::vector<Regex> arms;
    for (Regex* x : {&*a, &*b}) {
      if (x->kind() == Regex::Kind::Alt) {
        for (const auto& c : x->children()) arms.push_back(c);
      } else {
        arms.push_back(std::move(*x));
      }
    }
    std::vector<std::pair<std::string, Regex>> keyed;
    for (auto& arm : arms) keyed.emplace_back(print_regex(arm, alphabet_), std::move(arm));
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& x, const auto& y) { return x.first < y.first; });
    keyed.erase(std::unique(keyed.begin(), keyed.end(),
                            [](const auto& x, const auto& y) { return x.first == y.first; }),
                keyed.end());
    arms.clear();
    for (auto& [_, arm] : keyed) arms.push_back(std::move(arm));
    Label out = Regex::alt(std::move(arms));
    check_size(out);
    return out;
  }

  const Alphabet& alphabet_;
  std::size_t max_nodes_;
  std::map<std::pair<int, int>, Label> edges_;
};

Regex emission_regex(const Emission& e) {
  return e.is_class() ? Regex::char_class(e.cls) : Regex::literal(e.ch);
}

}  // namespace

Regex grammar_to_regex(const Grammar& grammar, GrammarToRegexOptions options) {
  const int n = grammar.nonterminal_count();
  const int initial = n;
  const int final_state = n + 1;

  // Keep nonterminals that are reachable from S0 and can finish a derivation.
  std::vector<std::vector<int>> succ(n), pred(n);
  std::vector<bool> finishes(n, false);
  for (const Rule& r : grammar.rules()) {
    if (r.next) {
      succ[r.lhs].push_back(*r.next);
      pred[*r.next].push_back(r.lhs);
    } else {
      finishes[r.lhs] = true;
    }
  }
  std::vector<bool> reachable(n, false), productive(n, false);
  std::vector<int> stack{0};
  reachable[0] = true;
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int t : succ[s])
      if (!reachable[t]) reachable[t] = true, stack.push_back(t);
  }
  for (int s = 0; s < n; ++s)
    if (finishes[s]) productive[s] = true, stack.push_back(s);
  while (!stack.empty()) {
    const int s = stack.back();
    stack.pop_back();
    for (int t : pred[s])
      if (!productive[t]) productive[t] = true, stack.push_back(t);
  }
  if (!productive[0]) throw EmptyLanguage("grammar derives no string");
  auto useful = [&](int s) { return reachable[s] && productive[s]; };

  Eliminator elim(grammar.alphabet(), options.max_nodes);
  elim.add(initial, 0, std::nullopt);
  for (const Rule& r : grammar.rules()) {
    if (!useful(r.lhs)) continue;
    if (r.next) {
      if (useful(*r.next)) elim.add(r.lhs, *r.next, emission_regex(r.emission));
    } else {
      elim.add(r.lhs, final_state, emission_regex(r.emission));
    }
  }

  std::set<int> remaining;
  for (int s = 0; s < n; ++s)
    if (useful(s)) remaining.insert(s);
  while (!remaining.empty()) {
    int best = -1;
    std::size_t best_cost = 0;
    for (int q : remaining) {
      auto [in, out] = elim.degree(q);
      if (best < 0 || in * out < best_cost) {
        best = q;
        best_cost = in * out;
      }
    }
    elim.eliminate(best);
    remaining.erase(best);
  }

  const Label* result = elim.find(initial, final_state);
  if (!result || !*result) throw EmptyLanguage("grammar derives no string");
  return **result;
}

bool matches(const Regex& regex, std::string_view s, const Alphabet& alphabet) {
  const PositionAutomaton pa = position_automaton(regex);
  std::vector<int> current{0};
  for (char c : s) {
    std::vector<int> next;
    for (int state : current)
      for (int q : pa.successors(state))
        if (pa.symbols[q].can_emit(c, alphabet)) next.push_back(q + 1);
    sort_unique(next);
    if (next.empty()) return false;
    current = std::move(next);
  }
  for (int state : current)
    if (pa.accepting(state)) return true;
  return false;
}

bool equivalent(const Regex& a, const Regex& b, const Alphabet& alphabet, bool ignore_empty) {
  const PositionAutomaton pa = position_automaton(a);
  const PositionAutomaton pb = position_automaton(b);

  // One representative per group of characters that no symbol distinguishes.
  std::vector<char> reps;
  {
    std::set<std::vector<bool>> seen;
    for (char c : alphabet.chars()) {
      std::vector<bool> sig;
      for (const auto& e : pa.symbols) sig.push_back(e.can_emit(c, alphabet));
      for (const auto& e : pb.symbols) sig.push_back(e.can_emit(c, alphabet));
      if (seen.insert(std::move(sig)).second) reps.push_back(c);
    }
  }

  auto step = [&](const PositionAutomaton& p, const std::vector<int>& states, char c) {
    std::vector<int> next;
    for (int state : states)
      for (int q : p.successors(state))
        if (p.symbols[q].can_emit(c, alphabet)) next.push_back(q + 1);
    sort_unique(next);
    return next;
  };
  auto accepting = [](const PositionAutomaton& p, const std::vector<int>& states) {
    return std::any_of(states.begin(), states.end(), [&](int s) { return p.accepting(s); });
  };

  using Pair = std::pair<std::vector<int>, std::vector<int>>;
  std::set<Pair> visited;
  std::deque<Pair> queue;
  queue.push_back({{0}, {0}});
  visited.insert(queue.front());
  bool initial = true;
  while (!queue.empty()) {
    Pair cur = std::move(queue.front());
    queue.pop_front();
    if (!(initial && ignore_empty) && accepting(pa, cur.first) != accepting(pb, cur.second))
      return false;
    initial = false;
    for (char c : reps) {
      Pair next{step(pa, cur.first, c), step(pb, cur.second, c)};
      if (visited.insert(next).second) queue.push_back(std::move(next));
    }
  }
  return true;
}

}  // namespace regrow
