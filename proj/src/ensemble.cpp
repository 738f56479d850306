#include <algorithm>
#include <chrono>
#include <map>
#include <set>

#include <json.hpp>

#include "regrow/automata.hpp"
#include "regrow/errors.hpp"
#include "regrow/inference.hpp"

namespace regrow {

using nlohmann::json;

const char* to_string(EngineKind kind) {
  switch (kind) {
    case EngineKind::Rejection:
      return "rejection";
    case EngineKind::MetropolisHastings:
      return "mh";
    case EngineKind::Smc:
      return "smc";
    case EngineKind::ParticleGibbs:
      return "pg";
  }
  return "?";
}

EngineKind parse_engine_kind(std::string_view text) {
  if (text == "rejection") return EngineKind::Rejection;
  if (text == "mh") return EngineKind::MetropolisHastings;
  if (text == "smc") return EngineKind::Smc;
  if (text == "pg") return EngineKind::ParticleGibbs;
  throw InputError("unknown engine '" + std::string(text) + "'");
}

const char* to_string(EngineStatus status) {
  switch (status) {
    case EngineStatus::Ok:
      return "ok";
    case EngineStatus::Timeout:
      return "timeout";
    case EngineStatus::Disabled:
      return "disabled";
    case EngineStatus::InitializationFailed:
      return "initialization-failed";
    case EngineStatus::AllRejected:
      return "all-rejected";
  }
  return "?";
}

RecognitionConfig draw_alphas(const RecognitionConfig& config, const std::vector<double>& alpha_r_grid,
                              const std::vector<double>& alpha_n_grid, Rng& rng) {
  RecognitionConfig c = config;
  if (!alpha_r_grid.empty()) c.alpha_r = alpha_r_grid[rng.below(alpha_r_grid.size())];
  if (!alpha_n_grid.empty()) c.alpha_n = alpha_n_grid[rng.below(alpha_n_grid.size())];
  return c;
}

void EngineSpec::validate() const {
  if (count == 0) throw InputError("engine sample/particle count must be positive");
  if (sweeps == 0) throw InputError("sweep count must be positive");
  if (!(timeout_seconds > 0.0)) throw InputError("engine timeout must be positive");
}

EnsembleConfig EnsembleConfig::standard() {
  EnsembleConfig c;
  c.rounds.push_back({EngineKind::Rejection, 400, 1, 60.0, ProcessingOrder::Serial, true});
  c.rounds.push_back({EngineKind::MetropolisHastings, 5000, 1, 60.0, ProcessingOrder::Serial, true});
  for (std::size_t n : {10, 50, 100, 200})
    c.rounds.push_back({EngineKind::ParticleGibbs, n, 5, 3.0, ProcessingOrder::Serial, true});
  c.rounds.push_back({EngineKind::ParticleGibbs, 500, 4, 7.0, ProcessingOrder::Serial, true});
  for (std::size_t n : {50, 100})
    c.rounds.push_back({EngineKind::ParticleGibbs, n, 5, 6.0, ProcessingOrder::Parallel, true});
  c.alpha_r_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  c.alpha_n_grid = {0.99, 1.0};
  return c;
}

void EnsembleConfig::validate() const {
  if (rounds.empty()) throw InputError("ensemble needs at least one round");
  for (const auto& r : rounds) r.validate();
  if (alpha_r_grid.empty() || alpha_n_grid.empty()) throw InputError("alpha grids must be non-empty");
  for (double a : alpha_r_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("alpha_r values must lie in [0,1]");
  for (double a : alpha_n_grid)
    if (!(a >= 0.0 && a <= 1.0)) throw InputError("alpha_n values must lie in [0,1]");
  weights.validate();
  if (!(xi > 0.0)) throw InputError("xi must be positive");
  if (max_seconds && !(*max_seconds > 0.0)) throw InputError("max_seconds must be positive");
}

EnsembleConfig parse_ensemble_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw InputError(std::string("ensemble config: ") + e.what());
  }
  if (!j.is_object()) throw InputError("ensemble config must be a JSON object");
  EnsembleConfig c = EnsembleConfig::standard();
  try {
    if (j.contains("rounds")) {
      c.rounds.clear();
      for (const auto& r : j.at("rounds")) {
        EngineSpec s;
        s.kind = parse_engine_kind(r.at("engine").get<std::string>());
        s.count = r.at("count").get<std::size_t>();
        s.sweeps = r.value("sweeps", std::size_t{1});
        s.timeout_seconds = r.value("timeout", 10.0);
        s.order = parse_processing_order(r.value("order", std::string("serial")));
        s.use_prior_importance = r.value("prior_importance", true);
        c.rounds.push_back(s);
      }
    }
    if (j.contains("alpha_r")) c.alpha_r_grid = j.at("alpha_r").get<std::vector<double>>();
    if (j.contains("alpha_n")) c.alpha_n_grid = j.at("alpha_n").get<std::vector<double>>();
    c.seed = j.value("seed", c.seed);
    c.weights.gamma = j.value("gamma", c.weights.gamma);
    c.weights.xi = j.value("xi", c.weights.xi);
    c.xi = c.weights.xi;
    c.xi = j.value("recognition_xi", c.xi);
    if (j.contains("max_seconds") && !j.at("max_seconds").is_null())
      c.max_seconds = j.at("max_seconds").get<double>();
  } catch (const json::exception& e) {
    throw InputError(std::string("ensemble config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string to_json_text(const EnsembleConfig& config) {
  json rounds = json::array();
  for (const auto& r : config.rounds) {
    rounds.push_back({{"engine", to_string(r.kind)},
                      {"count", r.count},
                      {"sweeps", r.sweeps},
                      {"timeout", r.timeout_seconds},
                      {"order", to_string(r.order)},
                      {"prior_importance", r.use_prior_importance}});
  }
  json j = {{"rounds", rounds},
            {"alpha_r", config.alpha_r_grid},
            {"alpha_n", config.alpha_n_grid},
            {"seed", config.seed},
            {"gamma", config.weights.gamma},
            {"xi", config.weights.xi},
            {"recognition_xi", config.xi}};
  if (config.max_seconds) j["max_seconds"] = *config.max_seconds;
  return j.dump(2);
}

namespace {

double elapsed_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EngineResult run_round(const std::shared_ptr<const Dataset>& data, const EngineSpec& spec,
                       const RecognitionConfig& rc, const EnsembleConfig& config, double timeout,
                       Rng& rng) {
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(timeout));
  switch (spec.kind) {
    case EngineKind::Rejection:
      return run_rejection(data, rc, spec.count, rng,
                           {timeout, 2.0, 2.0, config.alpha_r_grid, config.alpha_n_grid});
    case EngineKind::MetropolisHastings:
      return run_mh(data, rc, spec.count, rng, {timeout, 1000});
    case EngineKind::Smc:
      return run_smc(data, rc, spec.count, rng,
                     {spec.use_prior_importance, config.weights, 0.5, deadline, config.alpha_r_grid,
                      config.alpha_n_grid});
    case EngineKind::ParticleGibbs:
      return run_particle_gibbs(data, rc, spec.count, spec.sweeps, timeout, rng,
                                {spec.use_prior_importance, config.weights, 0.5, std::nullopt,
                                 config.alpha_r_grid, config.alpha_n_grid});
  }
  throw ContractViolation("unknown engine");
}

}  // namespace

EnsembleResult run_ensemble(const Dataset& data, const EnsembleConfig& config, AlphabetPtr alphabet) {
  config.validate();
  if (!data.runnable()) throw PositivesRequired();
  const auto problems = validate(data, *alphabet);
  if (!problems.empty()) throw InputError(problems.front());

  const auto shared = std::make_shared<const Dataset>(data);
  const auto start = Clock::now();
  EnsembleResult result;
  std::map<std::string, Grammar> grammars;

  for (std::size_t r = 0; r < config.rounds.size(); ++r) {
    const EngineSpec& spec = config.rounds[r];
    double timeout = spec.timeout_seconds;
    if (config.max_seconds) {
      const double remaining = *config.max_seconds - elapsed_since(start);
      if (remaining <= 0.0) break;
      timeout = std::min(timeout, remaining);
    }
    Rng rng(derive_seed(config.seed, r));
    RecognitionConfig rc;
    rc.xi = config.xi;
    rc.order = spec.order;
    rc.alphabet = alphabet;
    RoundReport report{spec, std::nullopt, std::nullopt, EngineStatus::Ok, 0, 0.0};
    // A single MH chain uses one draw for the whole round; the other engines
    // draw per sample or per particle.
    if (spec.kind == EngineKind::MetropolisHastings) {
      rc = draw_alphas(rc, config.alpha_r_grid, config.alpha_n_grid, rng);
      report.alpha_r = rc.alpha_r;
      report.alpha_n = rc.alpha_n;
    }

    const auto round_start = Clock::now();
    EngineResult er = run_round(shared, spec, rc, config, timeout, rng);
    report.status = er.status;
    report.seconds = elapsed_since(round_start);
    for (const Trace& t : er.traces) {
      if (t.status() != TraceStatus::Complete) continue;
      ++report.traces;
      grammars.try_emplace(to_text(t.grammar()), t.grammar());
    }
    result.rounds.push_back(report);
  }

  result.distinct_grammars = grammars.size();
  std::map<std::string, Regex> regexes;
  for (const auto& [text, g] : grammars) {
    try {
      Regex re = grammar_to_regex(g);
      std::string canonical = print_regex(re, *alphabet);
      regexes.try_emplace(std::move(canonical), std::move(re));
    } catch (const BudgetExceeded&) {
      ++result.dropped_grammars;
    }
  }

  std::vector<Candidate> candidates;
  candidates.reserve(regexes.size());
  for (const auto& [canonical, re] : regexes)
    candidates.push_back(score_candidate(re, data, alphabet, config.weights));
  result.ranking = normalize_posterior(std::move(candidates));
  return result;
}

}  // namespace regrow
