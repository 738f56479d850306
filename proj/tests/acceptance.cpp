// Runs each primary acceptance criterion and prints one PASS/FAIL line per
// criterion. Exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "oracles.hpp"
#include "regrow/automata.hpp"
#include "regrow/cli.hpp"
#include "regrow/corpus.hpp"
#include "regrow/earley.hpp"
#include "regrow/errors.hpp"
#include "regrow/service.hpp"

using namespace regrow;
using nlohmann::json;

namespace {

const std::string kSource = REGROW_SOURCE_DIR;
const std::string kFixtures = kSource + "/data/fixtures.jsonl";

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* format, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, format, x);
  return buf;
}

struct CliRun {
  int code;
  std::string out, err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "regrow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const Dataset& fixture(const std::vector<Dataset>& corpus, const std::string& id) {
  for (const auto& d : corpus)
    if (d.id == id) return d;
  throw std::runtime_error("missing fixture " + id);
}

// Every ranked candidate produced anywhere below is collected here and
// checked against its dataset with std::regex at the end.
std::vector<std::pair<const Dataset*, Ranking>> g_runs;

Outcome ab_star_b(const std::vector<Dataset>& corpus) {
  const Dataset& data = fixture(corpus, "ab-abb");
  const auto alphabet = Alphabet::printable_ascii();
  const Regex target = parse_regex("ab*b", *alphabet);
  int ok = 0;
  double slowest = 0;
  std::string ranks;
  for (int seed = 1; seed <= 5; ++seed) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto run = cli({"synth", "--data", kFixtures, "--id", data.id, "--k", "5", "--seed",
                          std::to_string(seed), "--format", "json"});
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    if (run.code != 0) {
      ranks += " seed" + std::to_string(seed) + ":exit" + std::to_string(run.code);
      continue;
    }
    const json doc = json::parse(run.out);
    int rank = 0;
    for (const auto& c : doc["candidates"]) {
      if (equivalent(parse_regex(c["regex"].get<std::string>(), *alphabet), target, *alphabet)) {
        rank = c["rank"].get<int>();
        break;
      }
    }
    ranks += " seed" + std::to_string(seed) + ":" + (rank ? "rank " + std::to_string(rank) : "absent");
    if (rank >= 1 && rank <= 5 && secs < 30.0) ++ok;
  }
  return {ok == 5, "ab*b in top 5 for " + std::to_string(ok) + "/5 seeds;" + ranks + "; slowest run " +
                       fmt("%.2fs", slowest)};
}

Outcome ends_in_s(const std::vector<Dataset>& corpus) {
  const Dataset& data = fixture(corpus, "ends-in-s-8");
  const auto alphabet = Alphabet::printable_ascii();
  const Regex target = parse_regex(".*s", *alphabet);
  int ok = 0;
  double slowest = 0;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EnsembleConfig config = EnsembleConfig::standard();
    config.seed = seed;
    const auto t0 = std::chrono::steady_clock::now();
    const auto result = run_ensemble(data, config);
    const double secs = seconds_since(t0);
    slowest = std::max(slowest, secs);
    g_runs.emplace_back(&data, result.ranking);
    const auto& c = result.ranking.candidates;
    const bool hit = !c.empty() && equivalent(c[0].ast, target, *alphabet) && c[0].posterior >= 0.9 && secs < 180.0;
    ok += hit;
    detail += " seed" + std::to_string(seed) + ":" + (c.empty() ? "none" : c[0].canonical + "@" + fmt("%.3f", c[0].posterior));
  }
  return {ok >= 4, "top-1 ~ .*s with posterior >= 0.9 in " + std::to_string(ok) + "/5 seeds;" + detail +
                       "; slowest run " + fmt("%.2fs", slowest)};
}

// The bounds hold in every seed; the ordering ".hello] above the target" is
// sampler-dependent, so it is required in a majority of the seeds.
Outcome bracket(const std::vector<Dataset>& corpus) {
  const Dataset& data = fixture(corpus, "bracket-hello");
  const auto alphabet = Alphabet::printable_ascii();
  const Regex target = parse_regex("\\[.*]", *alphabet);
  const Regex map = parse_regex(".hello]", *alphabet);
  int ordered = 0;
  bool bounds = true;
  std::string detail;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    EnsembleConfig config = EnsembleConfig::standard();
    config.seed = seed;
    const auto result = run_ensemble(data, config);
    g_runs.emplace_back(&data, result.ranking);
    const auto& c = result.ranking.candidates;
    std::optional<std::size_t> map_rank, target_rank;
    double target_posterior = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (!map_rank && equivalent(c[i].ast, map, *alphabet)) map_rank = i + 1;
      if (!target_rank && equivalent(c[i].ast, target, *alphabet)) {
        target_rank = i + 1;
        target_posterior = c[i].posterior;
      }
    }
    if (map_rank && (!target_rank || *map_rank < *target_rank)) ++ordered;
    if (target_rank && (target_posterior > 0.01 || *target_rank <= 10)) bounds = false;
    detail += " seed" + std::to_string(seed) + ":.hello]=" + (map_rank ? "#" + std::to_string(*map_rank) : "absent") +
              ",target=" + (target_rank ? "#" + std::to_string(*target_rank) + "@" + fmt("%.4f", target_posterior) : "absent");
  }
  return {ordered >= 3 && bounds, ".hello] outranks target in " + std::to_string(ordered) +
                                      "/5 seeds (need 3); target bounds " + (bounds ? "held" : "violated") + ";" + detail};
}

Outcome earley_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 gen(20240611);
  const auto alphabet = Alphabet::make("ab1.");
  const auto words = oracle::all_strings("ab1.", 4);
  double worst = 0;
  std::size_t checked = 0;
  for (int i = 0; i < 200; ++i) {
    const Grammar g = oracle::random_grammar(gen, alphabet, 4, 8);
    const auto exact = enumerate_strings(g, 4);
    for (const auto& w : words) {
      const double expected = exact.count(w) ? exact.at(w) : 0.0;
      const double independent = oracle::path_probability(g, w);
      const auto r = string_logprob(g, w);
      const double got = r.derivable() ? std::exp(*r.log_probability) : 0.0;
      worst = std::max({worst, std::abs(got - expected), std::abs(independent - expected)});
      if (r.derivable() != (expected > 0)) worst = INFINITY;
      ++checked;
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 60.0, std::to_string(checked) + " (grammar, string) pairs; max |diff| " +
                                            fmt("%.2e", worst) + "; " + fmt("%.2fs", secs)};
}

Outcome exactness() {
  const auto alphabet = Alphabet::make("ab", false);
  const std::size_t n = 100000;
  double worst = 0;
  std::string detail;
  struct Micro {
    std::string positive;
    double alpha_r, alpha_n;
  };
  for (const Micro& m : {Micro{"ab", 0.5, 0.5}, Micro{"aa", 0.5, 0.7}, Micro{"b", 0.5, 0.99}}) {
    const auto exact = oracle::grammar_distribution({m.positive}, {}, m.alpha_r, m.alpha_n);
    RecognitionConfig config;
    config.alphabet = alphabet;
    config.alpha_r = m.alpha_r;
    config.alpha_n = m.alpha_n;
    const auto data = std::make_shared<const Dataset>(Dataset{"micro", {m.positive}, {}, std::nullopt, std::nullopt});

    Rng rng(7);
    RejectionOptions ropts;
    ropts.timeout_seconds = 600;
    const auto rej = run_rejection(data, config, n, rng, ropts);
    MhOptions mopts;
    mopts.timeout_seconds = 600;
    const auto mh = run_mh(data, config, n, rng, mopts);
    for (const auto* result : {&rej, &mh}) {
      std::map<std::string, double> freq;
      for (const auto& t : result->traces) freq[oracle::grammar_key(t.grammar())] += 1.0 / static_cast<double>(result->traces.size());
      const double tv = result->traces.size() == n ? oracle::total_variation(exact, freq) : INFINITY;
      worst = std::max(worst, tv);
      detail += " " + m.positive + "/" + (result == &rej ? "rejection" : "mh") + " TV " + fmt("%.4f", tv);
    }
  }
  return {worst <= 0.05, "1e5 samples each;" + detail};
}

Outcome consistency(const std::vector<Dataset>& corpus) {
  auto config = EnsembleConfig::standard();
  config.seed = 1;
  for (const auto& d : corpus) {
    if (!d.runnable()) continue;
    g_runs.emplace_back(&d, run_ensemble(d, config).ranking);
  }
  const auto alphabet = Alphabet::printable_ascii();
  std::size_t checked = 0, bad = 0;
  std::string first_bad;
  for (const auto& [data, ranking] : g_runs) {
    for (const auto& c : ranking.candidates) {
      ++checked;
      bool ok = true;
      for (const auto& p : data->positives) ok = ok && oracle::std_match(c.ast, p, *alphabet);
      for (const auto& n : data->negatives) ok = ok && !oracle::std_match(c.ast, n, *alphabet);
      if (!ok) {
        ++bad;
        if (first_bad.empty()) first_bad = data->id + ": " + c.canonical;
      }
    }
  }
  return {bad == 0 && checked > 0, std::to_string(checked) + " candidates from " + std::to_string(g_runs.size()) +
                                       " runs; " + std::to_string(bad) + " inconsistent" +
                                       (first_bad.empty() ? "" : " (first: " + first_bad + ")")};
}

Outcome round_trip() {
  const auto alphabet = Alphabet::make("ab(.*");
  std::mt19937_64 gen(99);
  int structural = 0, semantic = 0;
  for (int i = 0; i < 500; ++i) {
    const Regex r = oracle::random_regex(gen, *alphabet, "ab(.*", 3);
    if (parse_regex(print_regex(r, *alphabet), *alphabet) != r) ++structural;
    const Grammar g = regex_to_grammar(r, alphabet);
    try {
      if (!equivalent(grammar_to_regex(g), r, *alphabet, r.nullable())) ++semantic;
    } catch (const EmptyLanguage&) {
      // Only valid when the regex matches nothing but the empty string.
      bool only_empty = r.nullable();
      for (const auto& w : oracle::all_strings("ab(.*", 3))
        if (!w.empty() && matches(r, w, *alphabet)) only_empty = false;
      if (!only_empty) ++semantic;
    }
  }
  return {structural == 0 && semantic == 0, "500 random ASTs; " + std::to_string(structural) +
                                                " structural and " + std::to_string(semantic) + " semantic failures"};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / "regrow_acceptance";
  std::filesystem::remove_all(dir);
  std::string csv[2];
  for (int i = 0; i < 2; ++i) {
    const auto out = dir / ("run" + std::to_string(i));
    const auto run = cli({"eval", "--corpus", kFixtures, "--k", "1,5,10", "--seed", "17", "--out", out.string()});
    if (run.code != 0) return {false, "eval exited with " + std::to_string(run.code) + ": " + run.err};
    std::ifstream in(out / "report.csv", std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    csv[i] = s.str();
  }
  std::filesystem::remove_all(dir);
  const bool same = csv[0] == csv[1] && !csv[0].empty();
  return {same, std::string("two eval runs over the fixture corpus, seed 17: CSV ") +
                    (same ? "byte-identical" : "differs") + " (" + std::to_string(csv[0].size()) + " bytes)"};
}

Outcome error_contract() {
  const auto run = cli({"synth", "--data", kFixtures, "--id", "odd-a-negatives-only"});
  const bool cli_ok = run.code == kExitPositivesRequired && run.err.find("positive") != std::string::npos;

  Service service;
  httplib::Server server;
  service.mount(server);
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread thread([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  httplib::Client client("127.0.0.1", port);
  std::string reason;
  int status = 0;
  const auto created = client.Post("/sessions", R"({"examples":[{"text":"a","label":"-"},{"text":"aaa","label":"-"}]})",
                                    "application/json");
  if (created && created->status == 201) {
    const std::string sid = json::parse(created->body)["id"];
    const auto r = client.Post("/sessions/" + sid + "/infer", "{}", "application/json");
    if (r) {
      status = r->status;
      reason = json::parse(r->body).value("reason", "");
    }
  }
  server.stop();
  thread.join();
  const bool service_ok = status == 422 && reason == "positives-required";
  return {cli_ok && service_ok, "cli exit " + std::to_string(run.code) + "; service " + std::to_string(status) +
                                    " reason '" + reason + "'"};
}

}  // namespace

int main() {
  const auto corpus = load_corpus(kFixtures);
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ab-abb-walkthrough", [&] { return ab_star_b(corpus); }},
      {"ends-in-s", [&] { return ends_in_s(corpus); }},
      {"bracket-ordering", [&] { return bracket(corpus); }},
      {"earley-oracle", earley_oracle},
      {"recognition-exactness", exactness},
      {"consistency", [&] { return consistency(corpus); }},
      {"round-trip", round_trip},
      {"determinism", determinism},
      {"error-contract", error_contract},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
  }
  std::cout << (failures ? "acceptance: " + std::to_string(failures) + " criteria failed" : "acceptance: all criteria passed")
            << std::endl;
  return failures ? 1 : 0;
}
