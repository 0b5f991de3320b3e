#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lrsum/text.h"

namespace lrsum::truncation {

enum class BudgetUnit { kSubword, kWord };

struct Paragraph {
  std::size_t index = 0;  // 0-based position in the original article
  std::string text;
  double score = 0;
  std::size_t token_len = 0;
};

struct TruncatedArticle {
  std::vector<Paragraph> paragraphs;  // retained, original order
  std::size_t total_tokens = 0;
  std::size_t tokens_before = 0;
  std::vector<std::size_t> removed;  // in removal order
  bool hard_cut = false;

  std::string text() const;
};

/// ROUGE-1 recall of each paragraph against the summary.
std::vector<double> score_paragraphs(const std::vector<std::string>& paragraphs,
                                     const std::string& summary);

struct TruncateOptions {
  std::size_t budget = 512;
  BudgetUnit unit = BudgetUnit::kSubword;
};

/// Drops the lowest-recall paragraph (later index on ties) until the article
/// fits the budget. Scores are computed once up front. A lone survivor that
/// still exceeds the budget is cut to exactly `budget` tokens.
TruncatedArticle truncate_article(const std::string& article,
                                  const std::string& summary,
                                  const text::SubwordVocab* vocab,
                                  const TruncateOptions& opts = {});

nlohmann::json audit_json(const std::string& record_id, const TruncatedArticle& t);

}  // namespace lrsum::truncation
