#include "regrow/corpus.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "regrow/automata.hpp"
#include "regrow/errors.hpp"

namespace regrow {

using nlohmann::json;

namespace {

std::vector<std::string> string_list(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return {};
  return j.at(key).get<std::vector<std::string>>();
}

Dataset dataset_from_json(const json& j) {
  if (!j.is_object()) throw InputError("record is not a JSON object");
  Dataset d;
  d.id = j.at("id").get<std::string>();
  d.positives = string_list(j, "positives");
  d.negatives = string_list(j, "negatives");
  if (j.contains("target") && !j.at("target").is_null()) d.target = j.at("target").get<std::string>();
  if (j.contains("human_recovery") && !j.at("human_recovery").is_null()) {
    const double h = j.at("human_recovery").get<double>();
    if (!(h >= 0.0 && h <= 1.0)) throw InputError("human_recovery must lie in [0,1]");
    d.human_recovery = h;
  }
  return d;
}

nlohmann::ordered_json dataset_to_json(const Dataset& d) {
  nlohmann::ordered_json j = {{"id", d.id}, {"positives", d.positives}, {"negatives", d.negatives}};
  j["target"] = d.target ? nlohmann::ordered_json(*d.target) : nlohmann::ordered_json(nullptr);
  j["human_recovery"] = d.human_recovery ? nlohmann::ordered_json(*d.human_recovery) : nlohmann::ordered_json(nullptr);
  return j;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

std::string number(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

}  // namespace

std::vector<Dataset> parse_corpus(std::string_view text) {
  std::vector<Dataset> out;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) {
      if (end == text.size()) break;
      continue;
    }
    Dataset d;
    try {
      d = dataset_from_json(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InputError& e) {
      throw InputError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!ids.insert(d.id).second)
      throw InputError("line " + std::to_string(line_no) + ": duplicate id '" + d.id + "'");
    out.push_back(std::move(d));
    if (end == text.size()) break;
  }
  return out;
}

std::vector<Dataset> load_corpus(const std::filesystem::path& path) { return parse_corpus(read_file(path)); }

std::string to_json_line(const Dataset& data) { return dataset_to_json(data).dump(); }

void save_corpus(const std::vector<Dataset>& corpus, const std::filesystem::path& path) {
  std::string text;
  for (const auto& d : corpus) text += to_json_line(d) + "\n";
  write_file(path, text);
}

Dataset parse_dataset_file(std::string_view text, std::string id) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string_view::npos && text[first] == '{') {
    try {
      json j = json::parse(text);
      if (!j.contains("id")) j["id"] = id;
      return dataset_from_json(j);
    } catch (const json::exception& e) {
      throw InputError(std::string("dataset: ") + e.what());
    }
  }
  Dataset d;
  d.id = std::move(id);
  std::size_t line_no = 0;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (line.size() < 2 || (line[0] != '+' && line[0] != '-'))
      throw InputError("dataset line " + std::to_string(line_no) + ": expected '+example' or '-example'");
    (line[0] == '+' ? d.positives : d.negatives).push_back(line.substr(1));
  }
  return d;
}

std::optional<std::size_t> target_rank(const Dataset& data, const Ranking& ranking,
                                       const Alphabet& alphabet) {
  if (!data.target) return std::nullopt;
  const Regex target = parse_regex(*data.target, alphabet);
  for (std::size_t i = 0; i < ranking.candidates.size(); ++i)
    if (equivalent(ranking.candidates[i].ast, target, alphabet)) return i + 1;
  return std::nullopt;
}

KBestScore kbest_score(const std::vector<DatasetResult>& results, std::size_t k,
                       const Alphabet& alphabet) {
  if (k == 0) throw InputError("k must be at least 1");
  KBestScore s;
  s.k = k;
  std::size_t hits = 0;
  for (const auto& r : results) {
    if (!r.dataset.target) {
      ++s.excluded;
      continue;
    }
    ++s.counted;
    const auto rank = target_rank(r.dataset, r.ranking, alphabet);
    if (rank && *rank <= k) ++hits;
  }
  s.score = s.counted ? static_cast<double>(hits) / static_cast<double>(s.counted) : 0.0;
  return s;
}

Breakdown breakdown(const std::vector<DatasetResult>& results, std::size_t k, const Alphabet& alphabet) {
  if (k == 0) throw InputError("k must be at least 1");
  Breakdown b;
  b.k = k;
  std::size_t hi = 0, hi_hits = 0, lo = 0, lo_hits = 0;
  double human_sum = 0.0;
  for (const auto& r : results) {
    if (!r.dataset.target || !r.dataset.human_recovery) {
      ++b.excluded;
      continue;
    }
    const auto rank = target_rank(r.dataset, r.ranking, alphabet);
    const bool hit = rank && *rank <= k;
    human_sum += *r.dataset.human_recovery;
    if (*r.dataset.human_recovery >= 0.5) {
      ++hi;
      hi_hits += hit;
    } else {
      ++lo;
      lo_hits += hit;
    }
  }
  if (hi) b.majority_recovered = static_cast<double>(hi_hits) / static_cast<double>(hi);
  if (lo) b.majority_failed = static_cast<double>(lo_hits) / static_cast<double>(lo);
  if (hi + lo) b.mean_human_recovery = human_sum / static_cast<double>(hi + lo);
  return b;
}

EvalReport build_report(const std::vector<DatasetResult>& results, const std::vector<std::size_t>& ks,
                        const Alphabet& alphabet) {
  EvalReport report;
  for (const auto& r : results) {
    EvalRow row;
    row.id = r.dataset.id;
    row.human_recovery = r.dataset.human_recovery;
    row.error = r.error;
    row.rank = target_rank(r.dataset, r.ranking, alphabet);
    row.found = row.rank.has_value();
    if (row.rank) row.target_posterior = r.ranking.candidates[*row.rank - 1].posterior;
    report.rows.push_back(std::move(row));
  }
  for (std::size_t k : ks) {
    report.kbest.push_back(kbest_score(results, k, alphabet));
    report.breakdowns.push_back(breakdown(results, k, alphabet));
  }
  return report;
}

std::vector<DatasetResult> run_corpus(const std::vector<Dataset>& corpus, const EnsembleConfig& config,
                                      AlphabetPtr alphabet) {
  if (corpus.empty()) throw InputError("corpus is empty");
  std::vector<DatasetResult> out;
  for (const auto& d : corpus) {
    DatasetResult r{d, {}, std::nullopt};
    try {
      r.ranking = run_ensemble(d, config, alphabet).ranking;
    } catch (const Error& e) {
      r.error = e.what();
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::string report_json(const EvalReport& report) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"id", r.id},
                    {"found", r.found},
                    {"rank", opt(r.rank)},
                    {"target_posterior", opt(r.target_posterior)},
                    {"human_recovery", opt(r.human_recovery)},
                    {"error", opt(r.error)}});
  }
  json kbest = json::array();
  for (const auto& s : report.kbest)
    kbest.push_back({{"k", s.k}, {"score", s.score}, {"counted", s.counted}, {"excluded", s.excluded}});
  json breakdowns = json::array();
  for (const auto& b : report.breakdowns) {
    breakdowns.push_back({{"k", b.k},
                          {"human_majority_recovered", opt(b.majority_recovered)},
                          {"human_majority_failed", opt(b.majority_failed)},
                          {"mean_human_recovery", opt(b.mean_human_recovery)},
                          {"excluded", b.excluded}});
  }
  return json{{"datasets", rows}, {"kbest", kbest}, {"breakdown", breakdowns}}.dump(2) + "\n";
}

std::string report_csv(const EvalReport& report) {
  std::string out = "id,found,rank,target_posterior,human_recovery\n";
  for (const auto& r : report.rows) {
    std::string id = r.id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : id) quoted += c == '"' ? std::string("\"\"") : std::string(1, c);
      id = quoted + "\"";
    }
    out += id + "," + (r.found ? "true" : "false") + "," + (r.rank ? std::to_string(*r.rank) : "") + "," +
           (r.target_posterior ? number(*r.target_posterior) : "") + "," +
           (r.human_recovery ? number(*r.human_recovery) : "") + "\n";
  }
  return out;
}

void save_results(const EvalReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file(dir / "report.json", report_json(report));
  write_file(dir / "report.csv", report_csv(report));
}

}  // namespace regrow
