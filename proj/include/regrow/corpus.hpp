#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "regrow/dataset.hpp"
#include "regrow/inference.hpp"
#include "regrow/scoring.hpp"

namespace regrow {

// One JSON object per line: {"id", "positives", "negatives", "target",
// "human_recovery"}. Blank lines are skipped. Throws InputError naming the
// line for malformed records and duplicate ids.
std::vector<Dataset> parse_corpus(std::string_view text);
std::vector<Dataset> load_corpus(const std::filesystem::path& path);

std::string to_json_line(const Dataset& data);
void save_corpus(const std::vector<Dataset>& corpus, const std::filesystem::path& path);

// Parses the dataset form used by `synth`: either a single JSON record or a
// plain text file with one example per line prefixed by '+' or '-'.
Dataset parse_dataset_file(std::string_view text, std::string id = "dataset");

struct DatasetResult {
  Dataset dataset;
  Ranking ranking;
  std::optional<std::string> error;  // set when inference could not run
};

// 1-based rank of the first candidate equivalent to the dataset's target.
std::optional<std::size_t> target_rank(const Dataset& data, const Ranking& ranking,
                                       const Alphabet& alphabet);

struct KBestScore {
  std::size_t k = 0;
  double score = 0.0;
  std::size_t counted = 0;   // datasets with a target
  std::size_t excluded = 0;  // datasets without a target
};

KBestScore kbest_score(const std::vector<DatasetResult>& results, std::size_t k,
                       const Alphabet& alphabet);

struct Breakdown {
  std::size_t k = 0;
  std::optional<double> majority_recovered;  // human_recovery >= 0.5
  std::optional<double> majority_failed;     // human_recovery < 0.5
  std::optional<double> mean_human_recovery;
  std::size_t excluded = 0;  // no target or no human_recovery
};

Breakdown breakdown(const std::vector<DatasetResult>& results, std::size_t k,
                    const Alphabet& alphabet);

struct EvalRow {
  std::string id;
  bool found = false;
  std::optional<std::size_t> rank;
  std::optional<double> target_posterior;
  std::optional<double> human_recovery;
  std::optional<std::string> error;
};

struct EvalReport {
  std::vector<EvalRow> rows;
  std::vector<KBestScore> kbest;
  std::vector<Breakdown> breakdowns;
};

EvalReport build_report(const std::vector<DatasetResult>& results, const std::vector<std::size_t>& ks,
                        const Alphabet& alphabet);

// Runs the ensemble on every dataset; failures are recorded per dataset.
// Throws InputError for an empty corpus.
std::vector<DatasetResult> run_corpus(const std::vector<Dataset>& corpus, const EnsembleConfig& config,
                                      AlphabetPtr alphabet = Alphabet::printable_ascii());

std::string report_json(const EvalReport& report);
// Columns: id,found,rank,target_posterior,human_recovery
std::string report_csv(const EvalReport& report);

// Writes report.json and report.csv into `dir`, creating it if needed.
void save_results(const EvalReport& report, const std::filesystem::path& dir);

}  // namespace regrow
