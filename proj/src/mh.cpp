#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "regrow/errors.hpp"
#include "regrow/inference.hpp"

namespace regrow {

namespace {

ChoiceValue propose_value(const Choice& site, Rng& rng) {
  if (site.options.empty()) {
    // Uniform permutation by Fisher-Yates.
    std::vector<int> perm = std::get<std::vector<int>>(site.value);
    for (std::size_t i = perm.size(); i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
    return perm;
  }
  return site.options[rng.categorical(site.probabilities)];
}

double site_log_prob(const Trace& trace, const Address& address) {
  for (const Choice& c : trace.choices())
    if (c.address == address) return c.log_prob;
  throw ContractViolation("edited site missing from replayed trace");
}

}  // namespace

EngineResult run_mh(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                    std::size_t n, Rng& rng, MhOptions options) {
  EngineResult result;
  const auto start = Clock::now();
  auto expired = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count() >= options.timeout_seconds;
  };

  std::optional<Trace> current;
  for (std::size_t attempt = 0; attempt < options.max_restarts; ++attempt) {
    Trace t = grow(data, config, rng);
    if (t.status() == TraceStatus::Complete) {
      current = std::move(t);
      break;
    }
    if (expired()) break;
  }
  if (!current) {
    result.status = expired() ? EngineStatus::Timeout : EngineStatus::InitializationFailed;
    return result;
  }

  for (std::size_t i = 0; i < n; ++i) {
    if (expired()) {
      result.status = EngineStatus::Timeout;
      break;
    }
    const std::vector<Choice> sites = current->choices();
    const Choice& site = sites[rng.below(sites.size())];
    const ChoiceValue proposal = propose_value(site, rng);
    ReplayResult r = replay(*current, site.address, proposal, config, rng);
    if (r.trace.status() == TraceStatus::Complete) {
      const double new_site = site_log_prob(r.trace, site.address);
      const double log_alpha = (r.trace.log_joint() - new_site) - (current->log_joint() - site.log_prob) +
                               std::log(static_cast<double>(sites.size())) -
                               std::log(static_cast<double>(r.trace.choice_count())) +
                               r.stale_log_prob - r.fresh_log_prob;
      if (log_alpha >= 0.0 || std::log(rng.uniform()) < log_alpha) current = std::move(r.trace);
    }
    result.traces.push_back(*current);
  }
  return result;
}

}  // namespace regrow
