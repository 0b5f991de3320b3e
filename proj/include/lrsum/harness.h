#pragma once

#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lrsum/corpus.h"
#include "lrsum/embedding.h"
#include "lrsum/extractive.h"
#include "lrsum/metrics.h"
#include "lrsum/text.h"

namespace lrsum::harness {

using metrics::ScoreTriple;

/// Metric battery for one (generated, reference) pair.
struct PairScores {
  ScoreTriple r1, r2, rl, embed;
};

struct RecordScore {
  std::string id;
  std::string reference;
  std::string generated;
  PairScores scores;
  std::vector<std::size_t> selected;  // extractive runs only
  int k = 0;
};

/// One table row: macro-averaged metric triples over n pairs.
struct EvalRow {
  std::string system;
  std::string dataset;
  ScoreTriple r1, r2, rl, embed;
  std::size_t n = 0;
};

struct EvalResult {
  EvalRow row;
  std::vector<RecordScore> per_record;
};

struct MetricOptions {
  bool include_punct = false;
};

PairScores score_pair(const std::string& generated, const std::string& reference,
                      const embedding::Provider& provider, const MetricOptions& opts = {});

/// Mean of each triple component over the per-record scores, summed in order.
EvalRow average(const std::vector<RecordScore>& per_record, std::string system,
                std::string dataset);

struct ExtractiveEvalConfig {
  std::string system = "extractive";
  std::string dataset = "dataset";
  /// Unset: the dataset's mean compression ratio.
  std::optional<extractive::Target> target;
  std::uint64_t seed = 7;
  MetricOptions metric;
};

EvalResult run_extractive_eval(const std::vector<corpus::Record>& dataset,
                               const embedding::Provider& provider,
                               const text::SubwordVocab& vocab,
                               const ExtractiveEvalConfig& config);

struct TextPair {
  std::string id;
  std::string reference;
  std::string generated;
};

/// Reads {"id"?, "reference", "generated"} lines.
std::vector<TextPair> parse_pairs(std::istream& in);

EvalResult score_pairs(const std::vector<TextPair>& pairs,
                       const embedding::Provider& provider, std::string system,
                       std::string dataset, const MetricOptions& opts = {});

nlohmann::json to_json(const EvalRow& row);
EvalRow eval_row_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RecordScore& r, const EvalRow& row);
/// Pretty-printed row followed by a newline; the golden-file format.
std::string serialize_row(const EvalRow& row);
void write_per_record(std::ostream& out, const EvalResult& result);

struct HumanScore {
  std::string annotator;
  std::string summary_id;
  std::string system;
  int accuracy = 0;
  int coherence = 0;
  std::string timestamp;

  bool operator==(const HumanScore&) const = default;
};

nlohmann::json to_json(const HumanScore& s);
/// Throws ValidationError naming the offending field.
HumanScore human_score_from_json(const nlohmann::json& j);
std::vector<HumanScore> read_scores(std::istream& in);

struct AutoScore {
  std::string summary_id;
  std::string system;
  double r1_f = 0;
  double embed_f = 0;
};

/// Reads per-record lines written by write_per_record.
std::vector<AutoScore> read_auto_scores(std::istream& in);

struct HumanItem {
  std::string summary_id;
  std::string system;
  double accuracy = 0;
  double coherence = 0;
  std::size_t annotators = 0;
};

struct HumanSystem {
  std::string system;
  double accuracy = 0;   // mean of per-summary means
  double coherence = 0;
  std::size_t summaries = 0;
};

struct ComparisonRow {
  std::string summary_id;
  std::string system;
  std::optional<double> r1_f;
  std::optional<double> embed_f;
  double accuracy = 0;
  double coherence = 0;
};

struct HumanReport {
  std::vector<HumanItem> items;
  std::vector<HumanSystem> systems;
  std::vector<ComparisonRow> comparison;
};

/// Validates scores (0..5, unique (annotator, summary_id, system)) and
/// aggregates them; automatic scores are joined on (summary_id, system).
HumanReport aggregate_human_eval(const std::vector<HumanScore>& scores,
                                 const std::vector<AutoScore>& automatic = {});

nlohmann::json to_json(const HumanReport& r);
void print_report(std::ostream& out, const HumanReport& r);
/// summary_id,system,rouge1_f,embed_f,human_accuracy,human_coherence
void write_comparison_csv(std::ostream& out, const HumanReport& r);

/// Picks up to `count` ids spread over the ROUGE-1 F ranking: best, worst
/// and evenly spaced ranks between them.
std::vector<std::string> stratified_ids(const std::vector<RecordScore>& per_record,
                                        std::size_t count);

}  // namespace lrsum::harness
