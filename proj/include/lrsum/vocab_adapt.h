#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lrsum/corpus.h"
#include "lrsum/embedding.h"
#include "lrsum/text.h"

namespace lrsum::vocab_adapt {

struct FreqTable {
  std::vector<std::uint64_t> counts;  // indexed by piece id
  std::uint64_t total = 0;
};

/// Piece-id counts over the subword tokens of every article and summary.
FreqTable count_frequencies(const std::vector<corpus::Record>& records,
                            const text::SubwordVocab& vocab);
void add_text(FreqTable& table, const text::SubwordVocab& vocab, std::string_view text);

struct VocabMap {
  std::vector<int> kept;          // ascending old ids
  std::map<int, int> old_to_new;  // new id = position in kept
  text::SubwordVocab new_vocab;
};

struct SelectResult {
  VocabMap map;
  bool clamped = false;  // target exceeded the source size
};

/// Keeps every special id plus the most frequent non-special ids (lower id
/// wins ties) up to target_size, then orders the kept ids ascending.
SelectResult select_vocabulary(const FreqTable& freqs, const text::SubwordVocab& source,
                               std::size_t target_size = 40000);

/// Row-major float matrix; the matrix view of an EmbeddingStore keyed by id.
struct Matrix {
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> data;
};

/// Reorders store rows by decimal piece-id key into a matrix whose row i is
/// piece i. Every id in [0, vocab_size) must be present exactly once.
Matrix matrix_from_store(const embedding::EmbeddingStore& store, std::size_t vocab_size);
embedding::EmbeddingStore store_from_matrix(const Matrix& m);

/// Output row j is input row kept[j], copied bit for bit.
Matrix prune_embeddings(const Matrix& matrix, const VocabMap& map,
                        std::size_t source_vocab_size);

struct MatrixMeta {
  std::uint64_t rows = 0;
  std::uint64_t bytes = 0;
};

struct SizeReport {
  std::uint64_t rows_before = 0;
  std::uint64_t rows_after = 0;
  std::uint64_t bytes_before = 0;
  std::uint64_t bytes_after = 0;
  double retained_fraction = 0;  // rows_after / rows_before
  double reduction_pct = 0;      // 100 * (1 - bytes_after / bytes_before)
  double bytes_retained_pct = 0; // 100 * bytes_after / bytes_before
};

SizeReport size_report(const MatrixMeta& before, const MatrixMeta& after);
nlohmann::json to_json(const SizeReport& r);

void write_remap(std::ostream& out, const VocabMap& map);
/// Parses `old_id<TAB>new_id` lines.
std::map<int, int> read_remap(std::istream& in);

}  // namespace lrsum::vocab_adapt
