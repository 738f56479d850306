#include <algorithm>
#include <chrono>
#include <cmath>

#include "regrow/errors.hpp"
#include "regrow/inference.hpp"

namespace regrow {

namespace {

double emission_log_weight(const Emission& e, const TokenWeights& w) {
  return std::log(w.gamma) + (e.is_class() ? std::log(w.xi) : 0.0);
}

// Normalized weights; all zero when every particle is dead.
std::vector<double> normalized(const std::vector<double>& log_w) {
  double m = -INFINITY;
  for (double x : log_w) m = std::max(m, x);
  std::vector<double> w(log_w.size(), 0.0);
  if (m == -INFINITY) return w;
  double total = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) total += w[i] = std::exp(log_w[i] - m);
  for (double& x : w) x /= total;
  return w;
}

double effective_sample_size(const std::vector<double>& w) {
  double sq = 0.0;
  for (double x : w) sq += x * x;
  return sq > 0.0 ? 1.0 / sq : 0.0;
}

// Systematic resampling of `count` ancestors from normalized weights.
std::vector<std::size_t> systematic(const std::vector<double>& w, std::size_t count, Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(count);
  const double u0 = rng.uniform() / static_cast<double>(count);
  double cumulative = w[0];
  std::size_t i = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double u = u0 + static_cast<double>(j) / static_cast<double>(count);
    while (u > cumulative && i + 1 < w.size()) cumulative += w[++i];
    out.push_back(i);
  }
  return out;
}

}  // namespace

EngineResult smc_sweep(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                       std::size_t particles, Rng& rng, const SmcOptions& options,
                       const Trace* reference, const RecognitionConfig* reference_config) {
  if (particles == 0) throw ContractViolation("particle count must be positive");
  EngineResult result;
  const std::uint64_t base = rng.next();
  std::vector<Rng> streams;
  std::vector<Trace> ps;
  std::vector<RecognitionConfig> cfgs;
  std::optional<ChoiceMap> ref_map;
  if (reference) ref_map = choice_map(*reference);
  for (std::size_t i = 0; i < particles; ++i) {
    streams.emplace_back(derive_seed(base, i));
    if (i == 0 && ref_map) {
      cfgs.push_back(reference_config ? *reference_config : config);
      ps.push_back(start_trace_replaying(data, cfgs[i], *ref_map, streams[i]));
    } else {
      cfgs.push_back(draw_alphas(config, options.alpha_r_grid, options.alpha_n_grid, streams[i]));
      ps.push_back(start_trace(data, cfgs[i], streams[i]));
    }
  }
  std::vector<double> log_w(particles, 0.0);
  std::size_t fresh_slot_seed = particles;

  auto any_running = [&] {
    return std::any_of(ps.begin(), ps.end(), [](const Trace& t) { return t.running(); });
  };

  while (any_running()) {
    for (std::size_t i = 0; i < particles; ++i) {
      if (!ps[i].running()) continue;
      const std::size_t rules_before = ps[i].grammar().rules().size();
      const double lw_before = ps[i].log_weight();
      ps[i] = (i == 0 && ref_map) ? step_replaying(std::move(ps[i]), cfgs[i], *ref_map, streams[i])
                                  : step(std::move(ps[i]), cfgs[i], streams[i]);
      double inc = ps[i].log_weight() - lw_before;
      if (ps[i].status() == TraceStatus::Rejected) inc = -INFINITY;
      const auto rules = ps[i].grammar().rules();
      if (options.use_prior_importance && inc != -INFINITY) {
        for (std::size_t r = rules_before; r < rules.size(); ++r) {
          inc += emission_log_weight(rules[r].emission, options.weights);
        }
      }
      log_w[i] += inc;
    }

    std::vector<double> w = normalized(log_w);
    if (effective_sample_size(w) == 0.0) {
      result.status = EngineStatus::AllRejected;
      return result;
    }
    if (options.deadline && Clock::now() >= *options.deadline) {
      result.status = EngineStatus::Timeout;
      result.traces = std::move(ps);
      result.log_weights = std::move(w);
      result.configs = std::move(cfgs);
      return result;
    }
    if (!any_running()) break;
    if (effective_sample_size(w) < options.ess_fraction * static_cast<double>(particles)) {
      const std::size_t keep = ref_map ? 1 : 0;
      const auto ancestors = systematic(w, particles - keep, rng);
      std::vector<Trace> next;
      std::vector<RecognitionConfig> next_cfgs;
      next.reserve(particles);
      if (keep) {
        next.push_back(ps[0]);
        next_cfgs.push_back(cfgs[0]);
      }
      for (std::size_t a : ancestors) {
        next.push_back(ps[a]);
        next_cfgs.push_back(cfgs[a]);
      }
      ps = std::move(next);
      cfgs = std::move(next_cfgs);
      // Copies must diverge from here on, so every non-reference slot gets a new stream.
      for (std::size_t i = keep; i < particles; ++i) streams[i] = Rng(derive_seed(base, fresh_slot_seed++));
      std::fill(log_w.begin(), log_w.end(), 0.0);
    }
  }

  result.log_weights = normalized(log_w);
  result.traces = std::move(ps);
  result.configs = std::move(cfgs);
  return result;
}

EngineResult run_smc(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                     std::size_t particles, Rng& rng, SmcOptions options) {
  return smc_sweep(std::move(data), config, particles, rng, options, nullptr);
}

EngineResult run_particle_gibbs(std::shared_ptr<const Dataset> data,
                                const RecognitionConfig& config, std::size_t particles,
                                std::size_t sweeps, double timeout_seconds, Rng& rng,
                                SmcOptions options) {
  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(timeout_seconds));
  if (!options.deadline || deadline < *options.deadline) options.deadline = deadline;

  EngineResult result;
  std::optional<Trace> reference;
  RecognitionConfig reference_config = config;
  for (std::size_t s = 0; s < sweeps; ++s) {
    EngineResult sweep = smc_sweep(data, config, particles, rng, options,
                                   reference ? &*reference : nullptr, &reference_config);
    if (sweep.status == EngineStatus::Timeout) {
      if (s == 0) {
        result.traces = std::move(sweep.traces);
        result.log_weights = std::move(sweep.log_weights);
        result.configs = std::move(sweep.configs);
      }
      result.status = EngineStatus::Timeout;
      return result;
    }
    if (sweep.status == EngineStatus::AllRejected) {
      reference.reset();
      continue;
    }
    for (const Trace& t : sweep.traces)
      if (t.status() == TraceStatus::Complete) result.traces.push_back(t);
    const std::size_t pick = rng.categorical(sweep.log_weights);
    reference = sweep.traces[pick];
    reference_config = sweep.configs[pick];
  }
  if (result.traces.empty()) result.status = EngineStatus::AllRejected;
  return result;
}

}  // namespace regrow
