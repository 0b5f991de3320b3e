#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lrsum/embedding.h"
#include "lrsum/text.h"

namespace lrsum::extractive {

using embedding::Vector;

/// k = clamp(round_half_up(n_sentences * target / article), 1, n_sentences).
int num_clusters(long long article_tokens, long long target_summary_tokens,
                 long long n_sentences);
/// Same rule with target / article given as a ratio.
int num_clusters_for_ratio(double target_ratio, long long n_sentences);

struct KMeansOptions {
  int max_iterations = 100;
  double shift_tolerance = 1e-4;
  /// Independent seeded initializations; the lowest final SSQ wins, earlier
  /// runs on ties.
  int restarts = 10;
};

struct ClusterResult {
  std::vector<int> assignments;
  std::vector<Vector> centroids;
  int iterations = 0;
  bool converged = false;
  /// Within-cluster sum of squared distances after each Lloyd update, over
  /// the unit-normalized vectors.
  std::vector<double> objective_history;
};

/// Spherical k-means: inputs are unit-normalized, seeded with k-means++,
/// then Lloyd iterations until the assignment is a fixpoint, the largest
/// centroid shift drops below tolerance, or the iteration cap is hit. An
/// empty cluster takes the point farthest from its own centroid. All
/// restarts draw from one generator seeded with `seed`.
ClusterResult kmeans(const std::vector<Vector>& vectors, int k, std::uint64_t seed,
                     const KMeansOptions& opts = {});

/// Summed squared distance of each (normalized) point to its centroid.
double within_cluster_ssq(const std::vector<Vector>& normalized,
                          const std::vector<int>& assignments,
                          const std::vector<Vector>& centroids);

Vector normalized(const Vector& v);

struct TargetRatio {
  double value;
};
struct TargetTokens {
  long long value;
};
using Target = std::variant<TargetRatio, TargetTokens>;

struct ExtractiveSummary {
  std::vector<std::size_t> selected;  // ascending sentence indices
  std::string text;
  int k_used = 0;
  std::size_t n_sentences = 0;
};

/// Sentence-cluster summary: one sentence nearest (by cosine) to each
/// centroid, emitted in article order. Token counts for the k rule use the
/// subword vocabulary.
ExtractiveSummary summarize_extractive(const std::string& article, const Target& target,
                                       const embedding::Provider& provider,
                                       const text::SubwordVocab& vocab,
                                       std::uint64_t seed);

/// Selection step alone, exposed for tests: per non-empty cluster, the member
/// with the highest cosine to its centroid (lower index wins ties).
std::vector<std::size_t> select_representatives(const std::vector<Vector>& vectors,
                                                const ClusterResult& clusters);

}  // namespace lrsum::extractive
