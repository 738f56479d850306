#pragma once

#include <compare>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "regrow/dataset.hpp"
#include "regrow/grammar.hpp"
#include "regrow/random.hpp"

namespace regrow {

enum class ProcessingOrder { Serial, RandomSerial, Parallel };

const char* to_string(ProcessingOrder order);
ProcessingOrder parse_processing_order(std::string_view text);

struct RecognitionConfig {
  double alpha_r = 0.5;   // probability of reusing a matching rule
  double alpha_n = 0.99;  // probability that a new rule continues to a fresh nonterminal
  double xi = 10.0;       // weight of each class against the literal when creating a rule
  ProcessingOrder order = ProcessingOrder::Serial;
  AlphabetPtr alphabet = Alphabet::printable_ascii();

  void validate() const;
};

enum class ChoiceKind { Permutation, ReuseFlip, RulePick, ClassPick, NtFlip, NtPick };

const char* to_string(ChoiceKind kind);

// Where a random choice happens: positive example (original index), character
// position inside it, and what is being decided. Permutation choices use -1/-1.
struct Address {
  int example = -1;
  int position = -1;
  ChoiceKind kind = ChoiceKind::Permutation;

  friend auto operator<=>(const Address&, const Address&) = default;
};

// bool: flips. int: nonterminal. Emission: class pick. Rule: reused rule.
// vector<int>: processing permutation.
using ChoiceValue = std::variant<bool, int, Emission, Rule, std::vector<int>>;

struct Choice {
  Address address;
  std::vector<ChoiceValue> options;  // empty for permutations (uniform over n!)
  std::vector<double> probabilities;
  ChoiceValue value;
  double log_prob = 0.0;
};

using ChoiceMap = std::map<Address, ChoiceValue>;

enum class TraceStatus { Running, Complete, Rejected };

const char* to_string(TraceStatus status);

struct StepInfo {
  int example;
  int position;
  char ch;
};

// One run of the recognition model, possibly partial. Immutable from the
// outside; step/replay return new traces. Copies share the choice history.
class Trace {
 public:
  const Grammar& grammar() const { return grammar_; }
  const Dataset& data() const { return *data_; }
  const std::shared_ptr<const Dataset>& data_ptr() const { return data_; }
  TraceStatus status() const { return status_; }
  bool running() const { return status_ == TraceStatus::Running; }

  // Sum of log(1/|class|) over class emissions; -inf once rejected.
  double log_weight() const { return log_weight_; }
  double choice_log_prob() const { return choice_log_prob_; }
  double log_joint() const { return choice_log_prob_ + log_weight_; }

  std::size_t choice_count() const { return choice_count_; }
  std::vector<Choice> choices() const;

  std::span<const int> order() const { return order_; }
  std::size_t steps_taken() const { return steps_taken_; }
  std::size_t total_steps() const { return total_steps_; }
  const std::optional<StepInfo>& last_step() const { return last_step_; }

 private:
  friend class TraceBuilder;

  struct ChoiceNode {
    Choice choice;
    std::shared_ptr<const ChoiceNode> prev;
  };
  struct Cursor {
    std::size_t position = 0;
    int nonterminal = 0;
  };

  explicit Trace(std::shared_ptr<const Dataset> data, Grammar grammar)
      : data_(std::move(data)), grammar_(std::move(grammar)) {}

  std::shared_ptr<const Dataset> data_;
  Grammar grammar_;
  std::shared_ptr<const ChoiceNode> last_choice_;
  std::size_t choice_count_ = 0;
  double choice_log_prob_ = 0.0;
  double log_weight_ = 0.0;
  TraceStatus status_ = TraceStatus::Running;
  std::vector<int> order_;
  std::vector<Cursor> cursors_;
  std::size_t slot_ = 0;
  std::size_t steps_taken_ = 0;
  std::size_t total_steps_ = 0;
  std::optional<StepInfo> last_step_;
};

// Initial trace: empty grammar over {S0}, random-serial permutation drawn.
// Throws PositivesRequired, or InputError for empty or out-of-alphabet strings.
Trace start_trace(std::shared_ptr<const Dataset> data, const RecognitionConfig& config, Rng& rng);

// Same as start_trace, but reuses the permutation in `recorded` if it has one.
Trace start_trace_replaying(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                            const ChoiceMap& recorded, Rng& rng);

// Advances one character of one positive string. Throws ContractViolation
// when the trace is no longer running.
Trace step(Trace trace, const RecognitionConfig& config, Rng& rng);

// Same, but takes the value recorded in `recorded` wherever it is still in
// the support; other choices are drawn from `rng`.
Trace step_replaying(Trace trace, const RecognitionConfig& config, const ChoiceMap& recorded,
                     Rng& rng);

// Full run of the recognition model.
Trace grow(std::shared_ptr<const Dataset> data, const RecognitionConfig& config, Rng& rng);
Trace grow(const Dataset& data, const RecognitionConfig& config, Rng& rng);

// Pick the continuation of a rule being created at the trace's current
// character: a fresh S_|N| with probability alpha_n, otherwise a uniformly
// chosen existing nonterminal. Records the choices in `trace`.
int sample_nonterminal(Trace& trace, const RecognitionConfig& config, Rng& rng);

ChoiceMap choice_map(const Trace& trace);

struct ReplayResult {
  Trace trace;
  double fresh_log_prob = 0.0;  // choices of the new trace drawn afresh (edit site excluded)
  double stale_log_prob = 0.0;  // choices of the old trace not reused (edit site excluded)
};

// Re-executes the run reusing every recorded value that is still valid,
// with `value` forced at `address`. Throws ContractViolation if the address
// is not in the trace or the value is outside that choice's support.
ReplayResult replay(const Trace& trace, const Address& address, const ChoiceValue& value,
                    const RecognitionConfig& config, Rng& rng);

// One line per choice: `addr kind support value logp`.
std::string dump(const Trace& trace);

}  // namespace regrow
