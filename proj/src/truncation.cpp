#include "lrsum/truncation.h"

#include "lrsum/error.h"
#include "lrsum/metrics.h"

namespace lrsum::truncation {

std::string TruncatedArticle::text() const {
  std::string out;
  for (std::size_t i = 0; i < paragraphs.size(); ++i) {
    if (i) out += "\n\n";
    out += paragraphs[i].text;
  }
  return out;
}

std::vector<double> score_paragraphs(const std::vector<std::string>& paragraphs,
                                     const std::string& summary) {
  const metrics::Tokens ref = metrics::rouge_tokens(summary);
  if (ref.empty()) throw ValidationError("summary has no tokens");
  std::vector<double> scores;
  scores.reserve(paragraphs.size());
  for (const std::string& p : paragraphs) {
    scores.push_back(metrics::rouge_n(metrics::rouge_tokens(p), ref, 1).recall);
  }
  return scores;
}

namespace {

// End offsets of each budget unit in `text`.
std::vector<std::size_t> token_ends(const std::string& text,
                                    const text::SubwordVocab* vocab,
                                    BudgetUnit unit) {
  std::vector<std::size_t> ends;
  if (unit == BudgetUnit::kSubword) {
    for (const auto& t : text::subword_segment(*vocab, text)) ends.push_back(t.span.end);
  } else {
    for (const auto& s : text::word_spans(text)) ends.push_back(s.end);
  }
  return ends;
}

}  // namespace

TruncatedArticle truncate_article(const std::string& article,
                                  const std::string& summary,
                                  const text::SubwordVocab* vocab,
                                  const TruncateOptions& opts) {
  if (opts.budget < 1) throw ValidationError("budget must be >= 1");
  if (opts.unit == BudgetUnit::kSubword && vocab == nullptr) {
    throw ValidationError("subword budgeting needs a vocabulary");
  }
  const std::vector<std::string> texts = text::paragraph_split(article);
  if (texts.empty()) throw ValidationError("article has no paragraphs");

  std::vector<std::vector<std::size_t>> ends;
  std::vector<Paragraph> paras;
  std::size_t total = 0;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    ends.push_back(token_ends(texts[i], vocab, opts.unit));
    paras.push_back({i, texts[i], 0.0, ends.back().size()});
    total += ends.back().size();
  }

  TruncatedArticle out;
  out.tokens_before = total;
  if (total <= opts.budget) {
    out.paragraphs = std::move(paras);
    out.total_tokens = total;
    return out;
  }

  const std::vector<double> scores = score_paragraphs(texts, summary);
  for (std::size_t i = 0; i < paras.size(); ++i) paras[i].score = scores[i];

  // paras stays in original order; erase keeps it sorted.
  while (total > opts.budget && paras.size() > 1) {
    std::size_t victim = 0;
    for (std::size_t i = 1; i < paras.size(); ++i) {
      if (paras[i].score <= paras[victim].score) victim = i;
    }
    total -= paras[victim].token_len;
    out.removed.push_back(paras[victim].index);
    paras.erase(paras.begin() + static_cast<std::ptrdiff_t>(victim));
  }

  if (total > opts.budget) {
    Paragraph& p = paras.front();
    const std::size_t cut = ends[p.index][opts.budget - 1];
    p.text = std::string(text::trim(std::string_view(p.text).substr(0, cut)));
    p.token_len = opts.budget;
    total = opts.budget;
    out.hard_cut = true;
  }
  out.paragraphs = std::move(paras);
  out.total_tokens = total;
  return out;
}

nlohmann::json audit_json(const std::string& record_id, const TruncatedArticle& t) {
  return {{"id", record_id},
          {"removed", t.removed},
          {"hard_cut", t.hard_cut},
          {"tokens_before", t.tokens_before},
          {"tokens_after", t.total_tokens}};
}

}  // namespace lrsum::truncation
