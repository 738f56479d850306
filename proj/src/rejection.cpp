#include <chrono>

#include "regrow/inference.hpp"

namespace regrow {

namespace {

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

}  // namespace

EngineResult run_rejection(std::shared_ptr<const Dataset> data, const RecognitionConfig& config,
                           std::size_t n, Rng& rng, RejectionOptions options) {
  EngineResult result;
  const auto start = Clock::now();
  bool probed = false;
  for (std::size_t i = 0; i < n; ++i) {
    Trace t = grow(data, draw_alphas(config, options.alpha_r_grid, options.alpha_n_grid, rng), rng);
    if (t.status() == TraceStatus::Complete) result.traces.push_back(std::move(t));

    const double elapsed = seconds_since(start);
    if (elapsed >= options.timeout_seconds) {
      result.status = EngineStatus::Timeout;
      break;
    }
    if (!probed && elapsed >= options.probe_window_seconds) {
      probed = true;
      if (static_cast<double>(result.traces.size()) / elapsed < options.min_accept_rate) {
        result.status = EngineStatus::Disabled;
        break;
      }
    }
  }
  return result;
}

}  // namespace regrow
