#include "lrsum/metrics.h"

#include <algorithm>
#include <map>

#include "lrsum/error.h"
#include "lrsum/text.h"

namespace lrsum::metrics {

ScoreTriple make_triple(double precision, double recall) {
  ScoreTriple s{precision, recall, 0.0};
  if (precision + recall > 0) {
    const double f = 2 * precision * recall / (precision + recall);
    s.f1 = std::clamp(f, std::min(precision, recall), std::max(precision, recall));
  }
  return s;
}

nlohmann::json to_json(const ScoreTriple& s) {
  return {{"p", s.precision}, {"r", s.recall}, {"f", s.f1}};
}

ScoreTriple triple_from_json(const nlohmann::json& j) {
  return {j.at("p").get<double>(), j.at("r").get<double>(), j.at("f").get<double>()};
}

namespace {

std::map<Tokens, std::size_t> ngram_counts(const Tokens& tokens, std::size_t n) {
  std::map<Tokens, std::size_t> counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    ++counts[Tokens(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                    tokens.begin() + static_cast<std::ptrdiff_t>(i + n))];
  }
  return counts;
}

}  // namespace

ScoreTriple rouge_n(const Tokens& candidate, const Tokens& reference, int n) {
  if (n < 1) throw ValidationError("rouge_n: n must be >= 1");
  const auto un = static_cast<std::size_t>(n);
  if (candidate.size() < un || reference.size() < un) return {};
  const auto cand = ngram_counts(candidate, un);
  const auto ref = ngram_counts(reference, un);
  std::size_t overlap = 0;
  for (const auto& [gram, count] : cand) {
    auto it = ref.find(gram);
    if (it != ref.end()) overlap += std::min(count, it->second);
  }
  const double cand_total = static_cast<double>(candidate.size() - un + 1);
  const double ref_total = static_cast<double>(reference.size() - un + 1);
  return make_triple(static_cast<double>(overlap) / cand_total,
                     static_cast<double>(overlap) / ref_total);
}

std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

ScoreTriple rouge_l(const Tokens& candidate, const Tokens& reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double l = static_cast<double>(lcs_length(candidate, reference));
  return make_triple(l / static_cast<double>(candidate.size()),
                     l / static_cast<double>(reference.size()));
}

namespace {

double mean_best_match(const std::vector<embedding::Vector>& from,
                       const std::vector<embedding::Vector>& to) {
  double sum = 0;
  for (const auto& u : from) {
    double best = 0;
    for (const auto& v : to) best = std::max(best, embedding::cosine_similarity(u, v));
    sum += best;
  }
  return sum / static_cast<double>(from.size());
}

}  // namespace

ScoreTriple embed_score(const Tokens& candidate, const Tokens& reference,
                        const embedding::Provider& provider) {
  if (candidate.empty() || reference.empty()) {
    throw ValidationError("embed_score: empty token sequence");
  }
  const auto cand = provider.embed_tokens(candidate);
  const auto ref = provider.embed_tokens(reference);
  if (cand.size() != candidate.size() || ref.size() != reference.size()) {
    throw ValidationError("embed_score: provider returned wrong vector count");
  }
  return make_triple(mean_best_match(cand, ref), mean_best_match(ref, cand));
}

Tokens rouge_tokens(const std::string& s, bool include_punct) {
  return include_punct ? text::word_tokenize(s) : text::content_tokens(s);
}

}  // namespace lrsum::metrics
