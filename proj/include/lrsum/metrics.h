#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "lrsum/embedding.h"

namespace lrsum::metrics {

using Tokens = std::vector<std::string>;

struct ScoreTriple {
  double precision = 0;
  double recall = 0;
  double f1 = 0;

  bool operator==(const ScoreTriple&) const = default;
};

/// F1 is the harmonic mean, 0 when P + R = 0, and kept within [min, max].
ScoreTriple make_triple(double precision, double recall);

nlohmann::json to_json(const ScoreTriple& s);
ScoreTriple triple_from_json(const nlohmann::json& j);

/// Clipped n-gram overlap. Any side without an n-gram scores (0, 0, 0).
ScoreTriple rouge_n(const Tokens& candidate, const Tokens& reference, int n);

std::size_t lcs_length(const Tokens& a, const Tokens& b);

/// LCS-based precision/recall with beta = 1.
ScoreTriple rouge_l(const Tokens& candidate, const Tokens& reference);

/// Greedy max-cosine matching of token vectors. Per-token best similarity
/// is floored at 0. Throws if either side is empty.
ScoreTriple embed_score(const Tokens& candidate, const Tokens& reference,
                        const embedding::Provider& provider);

/// Word tokens used for ROUGE; punctuation dropped unless requested.
Tokens rouge_tokens(const std::string& text, bool include_punct = false);

}  // namespace lrsum::metrics
