#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regrow/dataset.hpp"
#include "regrow/recognition.hpp"
#include "regrow/regex.hpp"
#include "regrow/scoring.hpp"

namespace regrow {

using Clock = std::chrono::steady_clock;

enum class EngineKind { Rejection, MetropolisHastings, Smc, ParticleGibbs };

const char* to_string(EngineKind kind);
EngineKind parse_engine_kind(std::string_view text);

struct EngineSpec {
  EngineKind kind = EngineKind::Smc;
  std::size_t count = 100;  // samples (rejection, MH) or particles (SMC, PG)
  std::size_t sweeps = 1;   // particle Gibbs only
  double timeout_seconds = 10.0;
  ProcessingOrder order = ProcessingOrder::Serial;
  bool use_prior_importance = true;

  void validate() const;
};

struct EnsembleConfig {
  std::vector<EngineSpec> rounds;
  std::vector<double> alpha_r_grid;
  std::vector<double> alpha_n_grid;
  std::uint64_t seed = 0;
  TokenWeights weights;
  double xi = 10.0;                   // class preference inside the recognition model
  std::optional<double> max_seconds;  // overall cap; later rounds are shortened or skipped

  // 400 rejection samples, 5000 MH samples, five serial particle Gibbs rounds
  // and two parallel ones, alpha grids {0.1..0.9} x {0.99, 1.0}.
  static EnsembleConfig standard();

  void validate() const;
};

EnsembleConfig parse_ensemble_config(std::string_view json_text);
std::string to_json_text(const EnsembleConfig& config);

enum class EngineStatus { Ok, Timeout, Disabled, InitializationFailed, AllRejected };

const char* to_string(EngineStatus status);

struct EngineResult {
  EngineStatus status = EngineStatus::Ok;
  std::vector<Trace> traces;
  std::vector<double> log_weights;  // SMC only: normalized final particle weights
  std::vector<RecognitionConfig> configs;  // SMC only: per-particle recognition settings
};

// Copy of `config` with alpha_r / alpha_n drawn uniformly from the grids;
// an empty grid leaves that value unchanged.
RecognitionConfig draw_alphas(const RecognitionConfig& config, const std::vector<double>& alpha_r_grid,
                              const std::vector<double>& alpha_n_grid, Rng& rng);

struct RejectionOptions {
  double timeout_seconds = 60.0;
  double probe_window_seconds = 2.0;
  double min_accept_rate = 2.0;  // accepted samples per second
  // When non-empty, every sample draws its own alpha_r / alpha_n from these.
  std::vector<double> alpha_r_grid;
  std::vector<double> alpha_n_grid;
};

// Independent runs of the recognition model; keeps the ones not rejected.
EngineResult run_rejection(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                           std::size_t n, Rng& rng, RejectionOptions options = {});

struct MhOptions {
  double timeout_seconds = 60.0;
  std::size_t max_restarts = 1000;
};

// Single-site trace MH: resample one recorded choice from its own
// distribution, replay, accept with the trans-dimensional ratio. Returns the
// chain state after each of the n iterations.
EngineResult run_mh(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                    std::size_t n, Rng& rng, MhOptions options = {});

struct SmcOptions {
  bool use_prior_importance = true;
  TokenWeights weights;
  double ess_fraction = 0.5;
  std::optional<Clock::time_point> deadline;
  // When non-empty, each fresh particle draws its own alpha_r / alpha_n from
  // these; resampled copies inherit their ancestor's values.
  std::vector<double> alpha_r_grid;
  std::vector<double> alpha_n_grid;
};

// Particles advance one character at a time. Each step multiplies in the
// class-emission factor and, with prior importance, log(gamma * w) for a newly
// created rule; systematic resampling runs when ESS drops below
// ess_fraction * particles.
EngineResult run_smc(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                     std::size_t particles, Rng& rng, SmcOptions options = {});

// Sweep 1 is plain SMC; each later sweep is conditional SMC that keeps a
// reference trajectory, drawn by final weight from the previous sweep, in
// slot 0. Completed particles of every finished sweep are returned.
EngineResult run_particle_gibbs(std::shared_ptr<const Dataset> data,
                                const RecognitionConfig& config, std::size_t particles,
                                std::size_t sweeps, double timeout_seconds, Rng& rng,
                                SmcOptions options = {});

// Conditional SMC sweep used by particle Gibbs (exposed for tests). With a
// reference, slot 0 replays it and is never resampled away.
EngineResult smc_sweep(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                       std::size_t particles, Rng& rng, const SmcOptions& options,
                       const Trace* reference, const RecognitionConfig* reference_config = nullptr);

struct RoundReport {
  EngineSpec spec;
  // Round-level draw; absent for engines that draw per particle or per sample.
  std::optional<double> alpha_r;
  std::optional<double> alpha_n;
  EngineStatus status = EngineStatus::Ok;
  std::size_t traces = 0;
  double seconds = 0.0;
};

struct EnsembleResult {
  Ranking ranking;
  std::vector<RoundReport> rounds;
  std::size_t distinct_grammars = 0;
  std::size_t dropped_grammars = 0;  // regex too large to convert
};

// Runs every round, converts all completed grammars to regexes, dedups by
// canonical text and ranks by posterior. Throws PositivesRequired.
EnsembleResult run_ensemble(const Dataset& data, const EnsembleConfig& config,
                            AlphabetPtr alphabet = Alphabet::printable_ascii());

}  // namespace regrow
