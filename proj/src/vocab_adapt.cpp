#include "lrsum/vocab_adapt.h"

#include <algorithm>
#include <charconv>

#include "lrsum/error.h"

namespace lrsum::vocab_adapt {

void add_text(FreqTable& table, const text::SubwordVocab& vocab, std::string_view s) {
  if (table.counts.size() != vocab.size()) table.counts.resize(vocab.size(), 0);
  for (int id : text::subword_tokenize(vocab, s)) {
    ++table.counts[static_cast<std::size_t>(id)];
    ++table.total;
  }
}

FreqTable count_frequencies(const std::vector<corpus::Record>& records,
                            const text::SubwordVocab& vocab) {
  FreqTable table;
  table.counts.assign(vocab.size(), 0);
  for (const corpus::Record& r : records) {
    add_text(table, vocab, r.article);
    add_text(table, vocab, r.summary);
  }
  return table;
}

SelectResult select_vocabulary(const FreqTable& freqs, const text::SubwordVocab& source,
                               std::size_t target_size) {
  const std::size_t n = source.size();
  if (freqs.counts.size() != n) {
    throw ValidationError("frequency table size " + std::to_string(freqs.counts.size()) +
                          " != vocabulary size " + std::to_string(n));
  }
  const std::size_t n_special = source.special_ids().size();
  if (target_size < n_special) {
    throw ValidationError("target size " + std::to_string(target_size) +
                          " is below the " + std::to_string(n_special) +
                          " special ids");
  }
  SelectResult result{{{}, {}, source}, target_size > n};
  const std::size_t budget = std::min(target_size, n) - n_special;

  std::vector<int> candidates;
  for (int id = 0; id < static_cast<int>(n); ++id) {
    if (!source.is_special(id)) candidates.push_back(id);
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](int a, int b) {
    return freqs.counts[static_cast<std::size_t>(a)] > freqs.counts[static_cast<std::size_t>(b)];
  });
  candidates.resize(budget);

  std::vector<int> kept(source.special_ids().begin(), source.special_ids().end());
  kept.insert(kept.end(), candidates.begin(), candidates.end());
  std::sort(kept.begin(), kept.end());

  std::vector<std::string> pieces;
  std::set<int> specials;
  VocabMap& map = result.map;
  for (std::size_t j = 0; j < kept.size(); ++j) {
    const int old_id = kept[j];
    map.old_to_new[old_id] = static_cast<int>(j);
    pieces.push_back(source.pieces()[static_cast<std::size_t>(old_id)]);
    if (source.is_special(old_id)) specials.insert(static_cast<int>(j));
  }
  map.kept = std::move(kept);
  map.new_vocab = text::SubwordVocab(std::move(pieces), std::move(specials),
                                     map.old_to_new.at(source.unk_id()));
  return result;
}

Matrix matrix_from_store(const embedding::EmbeddingStore& store, std::size_t vocab_size) {
  if (store.rows() != vocab_size) {
    throw ValidationError("embedding rows " + std::to_string(store.rows()) +
                          " != vocabulary size " + std::to_string(vocab_size));
  }
  Matrix m{vocab_size, store.dimension(), std::vector<float>(vocab_size * store.dimension())};
  std::vector<bool> seen(vocab_size, false);
  const auto& keys = store.keys();
  for (std::size_t r = 0; r < keys.size(); ++r) {
    std::size_t id = 0;
    const char* first = keys[r].data();
    const char* last = first + keys[r].size();
    auto [ptr, ec] = std::from_chars(first, last, id);
    if (ec != std::errc() || ptr != last || id >= vocab_size || seen[id]) {
      throw ValidationError("embedding key '" + keys[r] + "' is not a fresh piece id");
    }
    seen[id] = true;
    const std::vector<float> row = store.row(r);
    std::copy(row.begin(), row.end(), m.data.begin() + static_cast<std::ptrdiff_t>(id * m.dim));
  }
  return m;
}

embedding::EmbeddingStore store_from_matrix(const Matrix& m) {
  embedding::EmbeddingStore store(m.dim);
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto begin = m.data.begin() + static_cast<std::ptrdiff_t>(r * m.dim);
    store.add(std::to_string(r),
              std::vector<float>(begin, begin + static_cast<std::ptrdiff_t>(m.dim)));
  }
  return store;
}

Matrix prune_embeddings(const Matrix& matrix, const VocabMap& map,
                        std::size_t source_vocab_size) {
  if (matrix.rows != source_vocab_size) {
    throw ValidationError("matrix has " + std::to_string(matrix.rows) +
                          " rows but the vocabulary has " +
                          std::to_string(source_vocab_size) + " pieces");
  }
  Matrix out{map.kept.size(), matrix.dim, {}};
  out.data.reserve(out.rows * out.dim);
  for (int old_id : map.kept) {
    auto begin = matrix.data.begin() + static_cast<std::ptrdiff_t>(old_id) *
                                           static_cast<std::ptrdiff_t>(matrix.dim);
    out.data.insert(out.data.end(), begin, begin + static_cast<std::ptrdiff_t>(matrix.dim));
  }
  return out;
}

SizeReport size_report(const MatrixMeta& before, const MatrixMeta& after) {
  SizeReport r;
  r.rows_before = before.rows;
  r.rows_after = after.rows;
  r.bytes_before = before.bytes;
  r.bytes_after = after.bytes;
  if (before.rows > 0) {
    r.retained_fraction = static_cast<double>(after.rows) / static_cast<double>(before.rows);
  }
  if (before.bytes > 0) {
    const double kept = static_cast<double>(after.bytes) / static_cast<double>(before.bytes);
    r.reduction_pct = 100.0 * (1.0 - kept);
    r.bytes_retained_pct = 100.0 * kept;
  }
  return r;
}

nlohmann::json to_json(const SizeReport& r) {
  return {{"rows_before", r.rows_before},
          {"rows_after", r.rows_after},
          {"bytes_before", r.bytes_before},
          {"bytes_after", r.bytes_after},
          {"retained_fraction", r.retained_fraction},
          {"reduction_pct", r.reduction_pct},
          {"bytes_retained_pct", r.bytes_retained_pct}};
}

void write_remap(std::ostream& out, const VocabMap& map) {
  for (const auto& [old_id, new_id] : map.old_to_new) out << old_id << '\t' << new_id << '\n';
}

std::map<int, int> read_remap(std::istream& in) {
  std::map<int, int> remap;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::size_t tab = line.find('\t');
    int old_id = 0, new_id = 0;
    bool ok = tab != std::string::npos;
    if (ok) {
      auto a = std::from_chars(line.data(), line.data() + tab, old_id);
      auto b = std::from_chars(line.data() + tab + 1, line.data() + line.size(), new_id);
      ok = a.ec == std::errc() && a.ptr == line.data() + tab && b.ec == std::errc() &&
           b.ptr == line.data() + line.size();
    }
    if (!ok || !remap.emplace(old_id, new_id).second) {
      throw ValidationError("remap line " + std::to_string(line_no) + " is malformed");
    }
  }
  return remap;
}

}  // namespace lrsum::vocab_adapt
