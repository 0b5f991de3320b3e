#pragma once

#include <functional>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace lrsum::corpus {

enum class Source { kBbc, kDw, kOther };

std::string_view to_string(Source s);
Source parse_source(std::string_view s);

/// One article/summary pair. Article paragraphs are separated by blank lines.
struct Record {
  std::string id;
  Source source = Source::kOther;
  std::string url;
  std::string title;
  std::string article;
  std::string summary;

  bool operator==(const Record&) const = default;
};

nlohmann::json to_json(const Record& r);

/// Parses a line-delimited JSON record stream. Blank lines are skipped but
/// still counted for error line numbers. Missing ids become the zero-padded
/// 0-based line index.
std::vector<Record> parse_records(std::istream& in);
std::vector<Record> read_records(const std::string& path);
void write_records(std::ostream& out, const std::vector<Record>& records);

struct CleanOptions {
  /// Lines whose trimmed text begins with one of these are captions.
  std::vector<std::string> caption_markers = default_caption_markers();

  static std::vector<std::string> default_caption_markers();
};

/// Removes URLs and caption lines, squeezes horizontal whitespace, collapses
/// blank-line runs to one, and trims. Idempotent.
std::string clean_text(std::string_view raw, const CleanOptions& opts = {});

/// Word-token counter; defaults to text::word_tokenize.
using Tokenizer = std::function<std::size_t(std::string_view)>;
Tokenizer word_counter();

/// 100 * tokens(summary) / tokens(article).
double compression_ratio(const Record& rec, const Tokenizer& tok = word_counter());

struct FilterResult {
  std::vector<Record> kept;
  std::vector<Record> removed;
};

/// Removes records whose ratio is strictly greater than max_ratio_pct.
FilterResult filter_corpus(const std::vector<Record>& records,
                           double max_ratio_pct = 50.0,
                           const Tokenizer& tok = word_counter());

struct Summary {
  double min = 0;
  double max = 0;
  double mean = 0;
  double median = 0;  // lower middle for even counts
};

Summary summarize_values(std::vector<double> values);

struct CorpusStats {
  std::size_t count = 0;
  Summary article_tokens;
  Summary summary_tokens;
  Summary compression_ratio_pct;
};

CorpusStats corpus_stats(const std::vector<Record>& records,
                         const Tokenizer& tok = word_counter());

nlohmann::json to_json(const CorpusStats& s);
void print_stats_table(std::ostream& out, const CorpusStats& s);

}  // namespace lrsum::corpus
