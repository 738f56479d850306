#include "regrow/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "regrow/automata.hpp"
#include "regrow/corpus.hpp"
#include "regrow/errors.hpp"
#include "regrow/service.hpp"

namespace regrow {

namespace {

std::string read_text(const std::string& path) {
  if (path == "-") {
    std::ostringstream ss;
    ss << std::cin.rdbuf();
    return ss.str();
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fixed(double x, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

EnsembleConfig load_ensemble(const std::string& path) {
  return path.empty() ? EnsembleConfig::standard() : parse_ensemble_config(read_text(path));
}

Dataset load_dataset(const std::string& path, const std::string& id) {
  const std::string text = read_text(path);
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    auto records = parse_corpus(text);
    if (records.size() == 1 && (id.empty() || records[0].id == id)) return records[0];
    for (auto& d : records)
      if (d.id == id) return d;
    throw InputError(id.empty() ? "file holds several datasets; pick one with --id"
                                : "no dataset with id '" + id + "'");
  }
  return parse_dataset_file(text, id.empty() ? "dataset" : id);
}

struct SynthArgs {
  std::string data, ensemble, id, format = "text";
  std::size_t k = 10;
  std::optional<std::uint64_t> seed;
  double threshold = 0.9;
};

int synth(const SynthArgs& a, std::ostream& out) {
  const Dataset data = load_dataset(a.data, a.id);
  EnsembleConfig config = load_ensemble(a.ensemble);
  if (a.seed) config.seed = *a.seed;
  const EnsembleResult result = run_ensemble(data, config);
  const auto& cands = result.ranking.candidates;
  const bool uninformative = cands.empty() || cands.front().posterior < a.threshold;

  if (a.format == "json") {
    nlohmann::json list = nlohmann::json::array();
    for (std::size_t i = 0; i < cands.size() && i < a.k; ++i)
      list.push_back({{"rank", i + 1}, {"regex", cands[i].canonical}, {"posterior", cands[i].posterior}});
    out << nlohmann::json{{"status", to_string(result.ranking.status)},
                          {"uninformative", uninformative},
                          {"candidates", list}}
               .dump(2)
        << "\n";
    return kExitOk;
  }

  if (result.ranking.status == RankStatus::NoConsistentCandidate) {
    out << "status: no consistent candidate (try adding positive examples)\n";
    return kExitOk;
  }
  out << "status: ok\n";
  out << "rank  posterior  regex\n";
  for (std::size_t i = 0; i < cands.size() && i < a.k; ++i) {
    std::string rank = std::to_string(i + 1);
    rank.resize(6, ' ');
    out << rank << fixed(cands[i].posterior, 6) << "   " << cands[i].canonical << "\n";
  }
  if (uninformative)
    out << "uninformative: posterior max " << fixed(cands.front().posterior, 3) << " < " << a.threshold
        << "; more examples would help\n";
  return kExitOk;
}

std::vector<std::size_t> parse_ks(const std::string& text) {
  std::vector<std::size_t> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    long v = 0;
    try {
      v = std::stol(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 1) throw InputError("--k expects positive integers like 1,5,10");
    ks.push_back(static_cast<std::size_t>(v));
  }
  if (ks.empty()) throw InputError("--k expects at least one value");
  return ks;
}

std::string opt_text(const std::optional<double>& v) { return v ? fixed(*v, 3) : "-"; }

int eval(const std::string& corpus_path, const std::string& ks_text, std::optional<std::uint64_t> seed,
         const std::string& out_dir, const std::string& ensemble, std::ostream& out) {
  const auto ks = parse_ks(ks_text);
  const auto corpus = load_corpus(corpus_path);
  if (corpus.empty()) throw InputError("corpus is empty");
  EnsembleConfig config = load_ensemble(ensemble);
  if (seed) config.seed = *seed;
  const auto alphabet = Alphabet::printable_ascii();
  const auto results = run_corpus(corpus, config, alphabet);
  const EvalReport report = build_report(results, ks, *alphabet);

  for (const auto& row : report.rows) {
    out << row.id << ": ";
    if (row.error)
      out << "error: " << *row.error;
    else if (row.found)
      out << "target at rank " << *row.rank << " (posterior " << fixed(*row.target_posterior, 6) << ")";
    else
      out << "target not found";
    out << "\n";
  }
  out << "k    score  datasets  human>=0.5  human<0.5  human-mean\n";
  for (std::size_t i = 0; i < ks.size(); ++i) {
    const auto& s = report.kbest[i];
    const auto& b = report.breakdowns[i];
    std::string k = std::to_string(s.k);
    k.resize(5, ' ');
    out << k << fixed(s.score, 3) << "  " << s.counted << "         " << opt_text(b.majority_recovered)
        << "       " << opt_text(b.majority_failed) << "      " << opt_text(b.mean_human_recovery) << "\n";
  }
  if (!out_dir.empty()) {
    save_results(report, out_dir);
    out << "wrote " << out_dir << "/report.json and report.csv\n";
  }
  return kExitOk;
}

int convert(const std::string& to, const std::string& input, const std::string& file, std::ostream& out) {
  const std::string text = !file.empty() ? read_text(file) : input;
  const auto alphabet = Alphabet::printable_ascii();
  if (to == "grammar") {
    std::string line = text;
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
    out << to_text(regex_to_grammar(parse_regex(line, *alphabet), alphabet));
  } else {
    out << print_regex(grammar_to_regex(parse_grammar(text, alphabet)), *alphabet) << "\n";
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Grow probabilistic regular grammars from examples and rank regexes by posterior", "regrow"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth_cmd = app.add_subcommand("synth", "Rank regexes for one dataset");
  synth_cmd->add_option("--data", sa.data, "Dataset: JSON record(s) or lines of +example / -example")->required();
  synth_cmd->add_option("--id", sa.id, "Dataset id when the file holds several");
  synth_cmd->add_option("--k", sa.k, "Number of candidates to print")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--seed", sa.seed, "Ensemble seed");
  synth_cmd->add_option("--ensemble", sa.ensemble, "Ensemble configuration (JSON)");
  synth_cmd->add_option("--threshold", sa.threshold, "Posterior below which results are flagged uninformative");
  synth_cmd->add_option("--format", sa.format, "text or json")->check(CLI::IsMember({"text", "json"}));

  std::string corpus, ks = "1,5,10", out_dir, eval_ensemble;
  std::optional<std::uint64_t> eval_seed;
  auto* eval_cmd = app.add_subcommand("eval", "k-best evaluation over a corpus");
  eval_cmd->add_option("--corpus", corpus, "Corpus file (one JSON record per line)")->required();
  eval_cmd->add_option("--k", ks, "Comma-separated k values");
  eval_cmd->add_option("--seed", eval_seed, "Ensemble seed");
  eval_cmd->add_option("--out", out_dir, "Directory for report.json and report.csv");
  eval_cmd->add_option("--ensemble", eval_ensemble, "Ensemble configuration (JSON)");

  std::string to, input, file;
  auto* convert_cmd = app.add_subcommand("convert", "Convert between regex and grammar text");
  convert_cmd->add_option("--to", to, "regex or grammar")->required()->check(CLI::IsMember({"regex", "grammar"}));
  convert_cmd->add_option("input", input, "Regex or grammar text");
  convert_cmd->add_option("--file", file, "Read the input from a file ('-' for stdin)");

  std::string host = "127.0.0.1", serve_ensemble;
  int port = 8080;
  double max_budget = 60.0;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP teaching service");
  serve_cmd->add_option("--port", port, "Port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host, "Bind address");
  serve_cmd->add_option("--max-budget", max_budget, "Cap on seconds per inference job")->check(CLI::PositiveNumber);
  serve_cmd->add_option("--ensemble", serve_ensemble, "Default ensemble configuration (JSON)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*synth_cmd) return synth(sa, out);
    if (*eval_cmd) return eval(corpus, ks, eval_seed, out_dir, eval_ensemble, out);
    if (*convert_cmd) {
      if (input.empty() == file.empty()) {
        err << "error: convert needs exactly one of INPUT or --file\n";
        return kExitUsage;
      }
      return convert(to, input, file, out);
    }
    if (*serve_cmd) {
      ServiceOptions options;
      options.defaults = load_ensemble(serve_ensemble);
      options.max_budget_seconds = max_budget;
      out << "serving on http://" << host << ":" << port << std::endl;
      serve(host, port, std::move(options));
      return kExitOk;
    }
  } catch (const PositivesRequired& e) {
    err << "error: " << e.what() << " (the recognition model grows grammars from positive strings)\n";
    return kExitPositivesRequired;
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kExitParse;
  } catch (const BudgetExceeded& e) {
    err << "error: " << e.what() << "\n";
    return kExitTooLarge;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace regrow
