#include "regrow/recognition.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "regrow/earley.hpp"
#include "regrow/errors.hpp"

namespace regrow {

const char* to_string(ProcessingOrder order) {
  switch (order) {
    case ProcessingOrder::Serial:
      return "serial";
    case ProcessingOrder::RandomSerial:
      return "random-serial";
    case ProcessingOrder::Parallel:
      return "parallel";
  }
  return "?";
}

ProcessingOrder parse_processing_order(std::string_view text) {
  if (text == "serial") return ProcessingOrder::Serial;
  if (text == "random-serial") return ProcessingOrder::RandomSerial;
  if (text == "parallel") return ProcessingOrder::Parallel;
  throw InputError("unknown processing order '" + std::string(text) + "'");
}

void RecognitionConfig::validate() const {
  if (!(alpha_r >= 0.0 && alpha_r <= 1.0)) throw InputError("alpha_r must lie in [0, 1]");
  if (!(alpha_n >= 0.0 && alpha_n <= 1.0)) throw InputError("alpha_n must lie in [0, 1]");
  if (!(xi > 0.0)) throw InputError("xi must be positive");
  if (!alphabet) throw InputError("recognition config needs an alphabet");
}

const char* to_string(ChoiceKind kind) {
  switch (kind) {
    case ChoiceKind::Permutation:
      return "permutation";
    case ChoiceKind::ReuseFlip:
      return "reuse-flip";
    case ChoiceKind::RulePick:
      return "rule-pick";
    case ChoiceKind::ClassPick:
      return "class-pick";
    case ChoiceKind::NtFlip:
      return "nt-flip";
    case ChoiceKind::NtPick:
      return "nt-pick";
  }
  return "?";
}

const char* to_string(TraceStatus status) {
  switch (status) {
    case TraceStatus::Running:
      return "running";
    case TraceStatus::Complete:
      return "complete";
    case TraceStatus::Rejected:
      return "rejected";
  }
  return "?";
}

std::vector<Choice> Trace::choices() const {
  std::vector<Choice> out;
  out.reserve(choice_count_);
  for (const ChoiceNode* n = last_choice_.get(); n; n = n->prev.get()) out.push_back(n->choice);
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

double log_factorial(std::size_t n) { return std::lgamma(static_cast<double>(n) + 1.0); }

// Supplies choice values: recorded ones when still valid, fresh ones otherwise.
class Chooser {
 public:
  explicit Chooser(Rng& rng, const ChoiceMap* recorded = nullptr) : rng_(rng), recorded_(recorded) {}

  void force(const Address& address, ChoiceValue value) { forced_.emplace(address, std::move(value)); }

  // Index into `options`.
  std::size_t pick(const Address& address, const std::vector<ChoiceValue>& options,
                   const std::vector<double>& probs) {
    for (const ChoiceMap* source : {static_cast<const ChoiceMap*>(&forced_), recorded_}) {
      if (!source) continue;
      auto it = source->find(address);
      if (it == source->end()) continue;
      for (std::size_t i = 0; i < options.size(); ++i) {
        if (options[i] == it->second && probs[i] > 0.0) {
          if (source == recorded_) reused_.insert(address);
          return i;
        }
      }
      if (source == &forced_) throw ContractViolation("edited value is outside the choice's support");
    }
    return rng_.categorical(probs);
  }

  std::vector<int> permutation(const Address& address, std::size_t n) {
    for (const ChoiceMap* source : {static_cast<const ChoiceMap*>(&forced_), recorded_}) {
      if (!source) continue;
      auto it = source->find(address);
      if (it == source->end()) continue;
      const auto* perm = std::get_if<std::vector<int>>(&it->second);
      if (perm && is_permutation_of(*perm, n)) {
        if (source == recorded_) reused_.insert(address);
        return *perm;
      }
      if (source == &forced_) throw ContractViolation("edited value is not a valid permutation");
    }
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng_.below(i)]);
    return perm;
  }

  const std::set<Address>& reused() const { return reused_; }

 private:
  static bool is_permutation_of(const std::vector<int>& v, std::size_t n) {
    if (v.size() != n) return false;
    std::vector<int> sorted = v;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < n; ++i)
      if (sorted[i] != static_cast<int>(i)) return false;
    return true;
  }

  Rng& rng_;
  const ChoiceMap* recorded_;
  ChoiceMap forced_;
  std::set<Address> reused_;
};

}  // namespace

class TraceBuilder {
 public:
  static Trace create(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                      Chooser& chooser);

  TraceBuilder(Trace& trace, const RecognitionConfig& config, Chooser& chooser)
      : t_(trace), config_(config), chooser_(chooser) {}

  void start() {
    const Dataset& data = *t_.data_;
    if (data.positives.empty()) throw PositivesRequired();
    for (const auto& s : data.positives) {
      if (s.empty()) throw InputError("positive examples must be nonempty strings");
      for (char c : s)
        if (!config_.alphabet->contains(c))
          throw InputError("positive example '" + s + "' has a character outside the alphabet");
      t_.total_steps_ += s.size();
    }
    const std::size_t n = data.positives.size();
    t_.cursors_.assign(n, {});
    if (config_.order == ProcessingOrder::RandomSerial) {
      Choice c;
      c.address = {-1, -1, ChoiceKind::Permutation};
      auto perm = chooser_.permutation(c.address, n);
      c.value = perm;
      c.log_prob = -log_factorial(n);
      t_.order_ = std::move(perm);
      record(std::move(c));
    } else {
      t_.order_.resize(n);
      std::iota(t_.order_.begin(), t_.order_.end(), 0);
    }
  }

  void advance() {
    if (!t_.running()) throw ContractViolation("cannot step a trace that is not running");
    const Dataset& data = *t_.data_;
    const int ex = t_.order_[t_.slot_];
    Trace::Cursor& cur = t_.cursors_[ex];
    const std::string& s = data.positives[ex];
    const int pos = static_cast<int>(cur.position);
    const char c = s[cur.position];
    const bool final_char = cur.position + 1 == s.size();
    t_.last_step_ = StepInfo{ex, pos, c};

    // Only rules of the right shape can extend the derivation: a terminal
    // rule for the last character, a continuing rule otherwise.
    std::vector<ChoiceValue> reusable;
    for (const Rule& r : matching_rules(t_.grammar_, cur.nonterminal, c))
      if (r.is_terminal() == final_char) reusable.emplace_back(r);

    std::optional<Rule> rule;
    if (!reusable.empty() && flip({ex, pos, ChoiceKind::ReuseFlip}, config_.alpha_r)) {
      const std::vector<double> uniform(reusable.size(), 1.0 / static_cast<double>(reusable.size()));
      const std::size_t i = pick({ex, pos, ChoiceKind::RulePick}, reusable, uniform);
      rule = std::get<Rule>(reusable[i]);
    }
    if (!rule) {
      std::vector<ChoiceValue> emissions{Emission::literal(c)};
      std::vector<double> weights{1.0};
      for (ClassId id : config_.alphabet->classes_containing(c)) {
        emissions.emplace_back(Emission::of_class(id));
        weights.push_back(config_.xi);
      }
      const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
      for (double& w : weights) w /= total;
      const std::size_t i = pick({ex, pos, ChoiceKind::ClassPick}, emissions, weights);
      Rule r{cur.nonterminal, std::get<Emission>(emissions[i]), std::nullopt};
      if (!final_char) r.next = sample_nonterminal(ex, pos);
      t_.grammar_.add_rule(r);
      rule = r;
    }
    if (rule->emission.is_class())
      t_.log_weight_ -= std::log(static_cast<double>(config_.alphabet->cls(rule->emission.cls).size()));

    ++t_.steps_taken_;
    ++cur.position;
    if (!final_char) {
      cur.nonterminal = *rule->next;
      move_slot(false);
      return;
    }
    if (rejects_negatives()) {
      t_.status_ = TraceStatus::Rejected;
      t_.log_weight_ = -INFINITY;
      return;
    }
    if (t_.steps_taken_ == t_.total_steps_) {
      finish();
      return;
    }
    move_slot(true);
  }

  int sample_nonterminal(int ex, int pos) {
    if (flip({ex, pos, ChoiceKind::NtFlip}, config_.alpha_n)) return t_.grammar_.add_nonterminal();
    const int n = t_.grammar_.nonterminal_count();
    std::vector<ChoiceValue> options;
    for (int i = 0; i < n; ++i) options.emplace_back(i);
    const std::vector<double> uniform(n, 1.0 / n);
    return std::get<int>(options[pick({ex, pos, ChoiceKind::NtPick}, options, uniform)]);
  }

  int current_example() const { return t_.order_[t_.slot_]; }
  int current_position() const {
    return static_cast<int>(t_.cursors_[current_example()].position);
  }

 private:
  bool flip(const Address& address, double p) {
    const std::vector<ChoiceValue> options{true, false};
    const std::vector<double> probs{p, 1.0 - p};
    return std::get<bool>(options[pick(address, options, probs)]);
  }

  std::size_t pick(const Address& address, const std::vector<ChoiceValue>& options,
                   const std::vector<double>& probs) {
    const std::size_t i = chooser_.pick(address, options, probs);
    record(Choice{address, options, probs, options[i], std::log(probs[i])});
    return i;
  }

  void record(Choice c) {
    t_.choice_log_prob_ += c.log_prob;
    t_.last_choice_ = std::make_shared<const Trace::ChoiceNode>(
        Trace::ChoiceNode{std::move(c), std::move(t_.last_choice_)});
    ++t_.choice_count_;
  }

  void move_slot(bool current_finished) {
    const std::size_t n = t_.order_.size();
    if (config_.order != ProcessingOrder::Parallel) {
      if (current_finished) ++t_.slot_;
      return;
    }
    for (std::size_t k = 1; k <= n; ++k) {
      const std::size_t cand = (t_.slot_ + k) % n;
      const int ex = t_.order_[cand];
      if (t_.cursors_[ex].position < t_.data_->positives[ex].size()) {
        t_.slot_ = cand;
        return;
      }
    }
  }

  bool rejects_negatives() const {
    for (const auto& neg : t_.data_->negatives)
      if (accepts(t_.grammar_, neg)) return true;
    return false;
  }

  void finish() {
    for (const auto& p : t_.data_->positives)
      if (!accepts(t_.grammar_, p))
        throw std::logic_error("grown grammar does not derive its scaffold string '" + p + "'");
    t_.status_ = TraceStatus::Complete;
  }

  Trace& t_;
  const RecognitionConfig& config_;
  Chooser& chooser_;
};

Trace TraceBuilder::create(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                           Chooser& chooser) {
  config.validate();
  if (!data) throw ContractViolation("trace needs a dataset");
  Trace t(std::move(data), Grammar(config.alphabet));
  TraceBuilder(t, config, chooser).start();
  return t;
}

Trace start_trace(std::shared_ptr<const Dataset> data, const RecognitionConfig& config, Rng& rng) {
  Chooser chooser(rng);
  return TraceBuilder::create(std::move(data), config, chooser);
}

Trace start_trace_replaying(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                            const ChoiceMap& recorded, Rng& rng) {
  Chooser chooser(rng, &recorded);
  return TraceBuilder::create(std::move(data), config, chooser);
}

Trace step(Trace trace, const RecognitionConfig& config, Rng& rng) {
  Chooser chooser(rng);
  TraceBuilder(trace, config, chooser).advance();
  return trace;
}

Trace step_replaying(Trace trace, const RecognitionConfig& config, const ChoiceMap& recorded,
                     Rng& rng) {
  Chooser chooser(rng, &recorded);
  TraceBuilder(trace, config, chooser).advance();
  return trace;
}

Trace grow(std::shared_ptr<const Dataset> data, const RecognitionConfig& config, Rng& rng) {
  Chooser chooser(rng);
  Trace t = TraceBuilder::create(std::move(data), config, chooser);
  TraceBuilder builder(t, config, chooser);
  while (t.running()) builder.advance();
  return t;
}

Trace grow(const Dataset& data, const RecognitionConfig& config, Rng& rng) {
  return grow(std::make_shared<const Dataset>(data), config, rng);
}

int sample_nonterminal(Trace& trace, const RecognitionConfig& config, Rng& rng) {
  if (!trace.running()) throw ContractViolation("cannot extend a trace that is not running");
  Chooser chooser(rng);
  TraceBuilder builder(trace, config, chooser);
  return builder.sample_nonterminal(builder.current_example(), builder.current_position());
}

ChoiceMap choice_map(const Trace& trace) {
  ChoiceMap m;
  for (auto& c : trace.choices()) m.emplace(c.address, std::move(c.value));
  return m;
}

ReplayResult replay(const Trace& trace, const Address& address, const ChoiceValue& value,
                    const RecognitionConfig& config, Rng& rng) {
  const std::vector<Choice> old = trace.choices();
  const auto site = std::find_if(old.begin(), old.end(),
                                 [&](const Choice& c) { return c.address == address; });
  if (site == old.end()) throw ContractViolation("address is not part of the trace");
  if (site->options.empty()) {
    if (!std::holds_alternative<std::vector<int>>(value))
      throw ContractViolation("permutation choices take a permutation value");
  } else if (std::find(site->options.begin(), site->options.end(), value) == site->options.end()) {
    throw ContractViolation("edited value is outside the choice's support");
  }

  ChoiceMap recorded;
  for (const auto& c : old) recorded.emplace(c.address, c.value);
  Chooser chooser(rng, &recorded);
  chooser.force(address, value);
  Trace t = TraceBuilder::create(trace.data_ptr(), config, chooser);
  TraceBuilder builder(t, config, chooser);
  while (t.running()) builder.advance();

  ReplayResult result{std::move(t), 0.0, 0.0};
  const auto& reused = chooser.reused();
  for (const auto& c : result.trace.choices())
    if (c.address != address && !reused.count(c.address)) result.fresh_log_prob += c.log_prob;
  for (const auto& c : old)
    if (c.address != address && !reused.count(c.address)) result.stale_log_prob += c.log_prob;
  return result;
}

namespace {

std::string value_text(const ChoiceValue& v, const Alphabet& alphabet) {
  struct Visitor {
    const Alphabet& alphabet;
    std::string operator()(bool b) const { return b ? "true" : "false"; }
    std::string operator()(int nt) const { return "S" + std::to_string(nt); }
    std::string operator()(const Emission& e) const {
      return e.is_class() ? alphabet.cls(e.cls).grammar_token : std::string("'") + e.ch + "'";
    }
    std::string operator()(const Rule& r) const {
      std::string s = to_text(r, alphabet);
      for (char& ch : s)
        if (ch == ' ') ch = '_';
      return "[" + s + "]";
    }
    std::string operator()(const std::vector<int>& perm) const {
      std::string s = "(";
      for (std::size_t i = 0; i < perm.size(); ++i) s += (i ? "," : "") + std::to_string(perm[i]);
      return s + ")";
    }
  };
  return std::visit(Visitor{alphabet}, v);
}

}  // namespace

std::string dump(const Trace& trace) {
  const Alphabet& alphabet = trace.grammar().alphabet();
  std::ostringstream out;
  out.precision(6);
  for (const auto& c : trace.choices()) {
    if (c.address.example < 0)
      out << "run";
    else
      out << "x" << c.address.example << "." << c.address.position;
    out << ' ' << to_string(c.address.kind) << ' ';
    if (c.options.empty()) {
      out << "{perm:" << std::get<std::vector<int>>(c.value).size() << "}";
    } else {
      out << '{';
      for (std::size_t i = 0; i < c.options.size(); ++i)
        out << (i ? "," : "") << value_text(c.options[i], alphabet) << ':' << c.probabilities[i];
      out << '}';
    }
    out << ' ' << value_text(c.value, alphabet) << ' ' << c.log_prob << '\n';
  }
  return out.str();
}

}  // namespace regrow
