#include "lrsum/extractive.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "lrsum/error.h"

namespace lrsum::extractive {

int num_clusters(long long article_tokens, long long target_summary_tokens,
                 long long n_sentences) {
  if (article_tokens < 1 || target_summary_tokens < 1 || n_sentences < 1) {
    throw ValidationError("num_clusters: arguments must be >= 1");
  }
  // round_half_up(N * T / A) in exact integer arithmetic
  const long long k =
      (2 * n_sentences * target_summary_tokens + article_tokens) / (2 * article_tokens);
  return static_cast<int>(std::clamp(k, 1LL, n_sentences));
}

int num_clusters_for_ratio(double target_ratio, long long n_sentences) {
  if (!(target_ratio > 0) || n_sentences < 1) {
    throw ValidationError("num_clusters: ratio must be > 0 and N >= 1");
  }
  const double k = std::floor(static_cast<double>(n_sentences) * target_ratio + 0.5);
  return static_cast<int>(std::clamp(k, 1.0, static_cast<double>(n_sentences)));
}

Vector normalized(const Vector& v) {
  double norm = 0;
  for (double x : v) norm += x * x;
  if (norm == 0) throw ValidationError("kmeans: zero vector");
  norm = std::sqrt(norm);
  Vector out(v);
  for (double& x : out) x /= norm;
  return out;
}

namespace {

double squared_distance(const Vector& a, const Vector& b) {
  double d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

// Portable draws; std distributions differ between standard libraries.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<Vector> seed_plus_plus(const std::vector<Vector>& points, int k,
                                   std::mt19937_64& rng) {
  const std::size_t n = points.size();
  std::vector<std::size_t> chosen = {static_cast<std::size_t>(rng() % n)};
  std::vector<double> d2(n);
  for (std::size_t i = 0; i < n; ++i) d2[i] = squared_distance(points[i], points[chosen[0]]);

  while (chosen.size() < static_cast<std::size_t>(k)) {
    double total = 0;
    for (double d : d2) total += d;
    std::size_t pick = n;
    if (total > 0) {
      const double r = uniform01(rng) * total;
      double acc = 0;
      for (std::size_t i = 0; i < n; ++i) {
        if (d2[i] == 0) continue;
        acc += d2[i];
        pick = i;
        if (acc > r) break;
      }
    } else {
      // All remaining points coincide with a center.
      for (std::size_t i = 0; i < n && pick == n; ++i) {
        if (std::find(chosen.begin(), chosen.end(), i) == chosen.end()) pick = i;
      }
    }
    chosen.push_back(pick);
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], squared_distance(points[i], points[pick]));
    }
  }

  std::vector<Vector> centroids;
  for (std::size_t c : chosen) centroids.push_back(points[c]);
  return centroids;
}

// Distances or cosines this close count as equal, so the lower index wins
// regardless of rounding in the input scale.
constexpr double kTieTolerance = 1e-12;

int nearest(const Vector& p, const std::vector<Vector>& centroids) {
  int best = 0;
  double best_d = squared_distance(p, centroids[0]);
  for (std::size_t c = 1; c < centroids.size(); ++c) {
    const double d = squared_distance(p, centroids[c]);
    if (d < best_d - kTieTolerance) {
      best_d = d;
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

double within_cluster_ssq(const std::vector<Vector>& normalized_points,
                          const std::vector<int>& assignments,
                          const std::vector<Vector>& centroids) {
  double total = 0;
  for (std::size_t i = 0; i < normalized_points.size(); ++i) {
    total += squared_distance(normalized_points[i],
                              centroids[static_cast<std::size_t>(assignments[i])]);
  }
  return total;
}

namespace {

ClusterResult lloyd(const std::vector<Vector>& points, int k, std::mt19937_64& rng,
                    const KMeansOptions& opts) {
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  ClusterResult result;
  result.centroids = seed_plus_plus(points, k, rng);
  result.assignments.assign(n, -1);
  const auto uk = static_cast<std::size_t>(k);

  for (int iter = 0; iter < opts.max_iterations; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      const int c = nearest(points[i], result.centroids);
      changed |= c != result.assignments[i];
      result.assignments[i] = c;
    }
    if (!changed) {
      result.converged = true;
      break;
    }

    std::vector<std::size_t> sizes(uk, 0);
    for (int a : result.assignments) ++sizes[static_cast<std::size_t>(a)];
    for (std::size_t c = 0; c < uk; ++c) {
      if (sizes[c] != 0) continue;
      std::size_t donor = n;
      double far = -1;
      for (std::size_t i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(result.assignments[i]);
        if (sizes[a] < 2) continue;
        const double d = squared_distance(points[i], result.centroids[a]);
        if (d > far) {
          far = d;
          donor = i;
        }
      }
      --sizes[static_cast<std::size_t>(result.assignments[donor])];
      result.assignments[donor] = static_cast<int>(c);
      sizes[c] = 1;
      result.centroids[c] = points[donor];
    }

    std::vector<Vector> next(uk, Vector(dim, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
      Vector& acc = next[static_cast<std::size_t>(result.assignments[i])];
      for (std::size_t d = 0; d < dim; ++d) acc[d] += points[i][d];
    }
    double shift = 0;
    for (std::size_t c = 0; c < uk; ++c) {
      for (double& x : next[c]) x /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(squared_distance(next[c], result.centroids[c])));
    }
    result.centroids = std::move(next);
    ++result.iterations;
    result.objective_history.push_back(
        within_cluster_ssq(points, result.assignments, result.centroids));
    if (shift < opts.shift_tolerance) {
      result.converged = true;
      break;
    }
  }
  return result;
}

}  // namespace

ClusterResult kmeans(const std::vector<Vector>& vectors, int k, std::uint64_t seed,
                     const KMeansOptions& opts) {
  const std::size_t n = vectors.size();
  if (k < 1 || static_cast<std::size_t>(k) > n) {
    throw ValidationError("kmeans: k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
  }
  const std::size_t dim = vectors[0].size();
  std::vector<Vector> points;
  points.reserve(n);
  for (const Vector& v : vectors) {
    if (v.size() != dim) throw ValidationError("kmeans: mixed dimensions");
    points.push_back(normalized(v));
  }

  std::mt19937_64 rng(seed);
  ClusterResult best;
  for (int run = 0; run < std::max(1, opts.restarts); ++run) {
    ClusterResult r = lloyd(points, k, rng, opts);
    if (run == 0 || r.objective_history.back() < best.objective_history.back() - kTieTolerance) {
      best = std::move(r);
    }
  }
  return best;
}

std::vector<std::size_t> select_representatives(const std::vector<Vector>& vectors,
                                                const ClusterResult& clusters) {
  std::vector<std::size_t> selected;
  for (std::size_t c = 0; c < clusters.centroids.size(); ++c) {
    const Vector& centroid = clusters.centroids[c];
    const bool degenerate =
        std::all_of(centroid.begin(), centroid.end(), [](double x) { return x == 0; });
    std::size_t best = vectors.size();
    double best_sim = -2;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
      if (clusters.assignments[i] != static_cast<int>(c)) continue;
      if (degenerate) {
        best = i;
        break;
      }
      const double sim = embedding::cosine_similarity(centroid, vectors[i]);
      if (sim > best_sim + kTieTolerance) {
        best_sim = sim;
        best = i;
      }
    }
    if (best < vectors.size()) selected.push_back(best);
  }
  std::sort(selected.begin(), selected.end());
  return selected;
}

ExtractiveSummary summarize_extractive(const std::string& article, const Target& target,
                                       const embedding::Provider& provider,
                                       const text::SubwordVocab& vocab,
                                       std::uint64_t seed) {
  const std::vector<std::string> sentences = text::sentence_split(article);
  if (sentences.empty()) throw ValidationError("article has no sentences");
  const auto n = static_cast<long long>(sentences.size());

  int k;
  if (const auto* ratio = std::get_if<TargetRatio>(&target)) {
    k = num_clusters_for_ratio(ratio->value, n);
  } else {
    const long long article_tokens =
        static_cast<long long>(text::subword_tokenize(vocab, article).size());
    k = num_clusters(article_tokens, std::get<TargetTokens>(target).value, n);
  }

  ExtractiveSummary out;
  out.n_sentences = sentences.size();
  if (sentences.size() == 1) {
    out.selected = {0};
  } else {
    const std::vector<Vector> vectors = embedding::embed_sentences(provider, sentences);
    const ClusterResult clusters = kmeans(vectors, k, seed);
    out.selected = select_representatives(vectors, clusters);
  }
  out.k_used = static_cast<int>(out.selected.size());
  for (std::size_t i = 0; i < out.selected.size(); ++i) {
    if (i) out.text.push_back(' ');
    out.text += sentences[out.selected[i]];
  }
  return out;
}

}  // namespace lrsum::extractive
