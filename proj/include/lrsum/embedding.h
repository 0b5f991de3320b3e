#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrsum/text.h"

namespace lrsum::embedding {

using Vector = std::vector<double>;

/// u.v / (|u||v|), clamped to [-1, 1]. Throws on zero vectors or a
/// dimension mismatch.
double cosine_similarity(const Vector& u, const Vector& v);

enum class Mode { kToken, kSentence, kBoth };

/// Source of token and/or sentence vectors. Implementations must be
/// deterministic for a fixed configuration and safe for concurrent calls.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string name() const = 0;
  virtual std::size_t dimension() const = 0;
  virtual Mode mode() const = 0;

  bool supports_tokens() const { return mode() != Mode::kSentence; }
  bool supports_sentences() const { return mode() != Mode::kToken; }

  /// One vector per token, order preserved.
  virtual std::vector<Vector> embed_tokens(const std::vector<std::string>& tokens) const;
  /// One vector per sentence, order preserved.
  virtual std::vector<Vector> embed_sentence_batch(
      const std::vector<std::string>& sentences) const;
};

/// Sentence vectors from the provider's sentence mode when available,
/// otherwise the mean of its token vectors over the sentence's word tokens
/// (punctuation tokens are skipped unless the sentence has nothing else).
std::vector<Vector> embed_sentences(const Provider& provider,
                                    const std::vector<std::string>& sentences);

/// Token t maps to the standard basis vector of its piece id; a token that
/// is not a single piece maps to the mean of its greedy segmentation.
class OneHotProvider final : public Provider {
 public:
  explicit OneHotProvider(std::shared_ptr<const text::SubwordVocab> vocab);

  std::string name() const override { return "onehot"; }
  std::size_t dimension() const override { return vocab_->size(); }
  Mode mode() const override { return Mode::kToken; }
  std::vector<Vector> embed_tokens(const std::vector<std::string>& tokens) const override;

 private:
  std::shared_ptr<const text::SubwordVocab> vocab_;
};

std::unique_ptr<Provider> onehot_provider(std::shared_ptr<const text::SubwordVocab> vocab);

/// Rows of float32 vectors addressed by string key, in insertion order.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t rows() const { return keys_.size(); }
  const std::vector<std::string>& keys() const { return keys_; }
  const std::vector<float>& data() const { return data_; }

  /// Throws on duplicate key, wrong dimension or non-finite entries. The
  /// first insert into a dimension-0 store fixes the dimension.
  void add(std::string key, const std::vector<float>& row);
  void add(std::string key, const Vector& row);

  bool contains(const std::string& key) const { return index_.count(key) != 0; }
  std::optional<std::size_t> find(const std::string& key) const;
  std::vector<float> row(std::size_t r) const;
  Vector row_as_double(std::size_t r) const;

 private:
  std::size_t dimension_;
  std::vector<std::string> keys_;
  std::vector<float> data_;
  std::map<std::string, std::size_t> index_;
};

/// Binary layout, all integers little-endian:
///   "EMBV1\0" | rows:u32 | dim:u32 | rows*dim float32 row-major |
///   rows * (len:u32 | key bytes)
std::string serialize_store(const EmbeddingStore& store);
EmbeddingStore parse_store(std::string_view bytes);
EmbeddingStore load_store(const std::filesystem::path& path);
void save_store(const EmbeddingStore& store, const std::filesystem::path& path);

/// Cache key for a text under a given mode: 16 hex digits of FNV-1a 64.
std::string content_key(Mode mode, std::string_view text);

/// Serves vectors from a store keyed by content_key. A missing key is an
/// error naming the index of the failed input.
class StoreProvider final : public Provider {
 public:
  StoreProvider(std::string name, EmbeddingStore store, Mode mode = Mode::kBoth);

  std::string name() const override { return name_; }
  std::size_t dimension() const override { return store_.dimension(); }
  Mode mode() const override { return mode_; }
  std::vector<Vector> embed_tokens(const std::vector<std::string>& tokens) const override;
  std::vector<Vector> embed_sentence_batch(
      const std::vector<std::string>& sentences) const override;

 private:
  std::vector<Vector> lookup(Mode m, const std::vector<std::string>& texts) const;

  std::string name_;
  EmbeddingStore store_;
  Mode mode_;
};

struct RemoteConfig {
  std::string endpoint;  // e.g. http://127.0.0.1:8080
  std::string name = "remote";
  std::size_t batch_size = 64;
  int max_retries = 2;
  int timeout_seconds = 30;
  /// When set, the cache is loaded from and persisted to this file.
  std::optional<std::filesystem::path> cache_path;
};

/// Client for POST /embed {"texts": [...], "mode": "sentence"|"token"}
/// answering {"dim": d, "vectors": [[...], ...]}. Responses are rounded to
/// float32 and cached by content hash.
class RemoteProvider final : public Provider {
 public:
  explicit RemoteProvider(RemoteConfig config);

  std::string name() const override { return config_.name; }
  std::size_t dimension() const override;
  Mode mode() const override { return Mode::kBoth; }
  std::vector<Vector> embed_tokens(const std::vector<std::string>& tokens) const override;
  std::vector<Vector> embed_sentence_batch(
      const std::vector<std::string>& sentences) const override;

  std::size_t network_calls() const;

 private:
  std::vector<Vector> embed(Mode m, const std::vector<std::string>& texts) const;
  std::vector<std::vector<float>> fetch(Mode m, const std::vector<std::string>& texts) const;

  RemoteConfig config_;
  mutable std::mutex mu_;
  mutable EmbeddingStore cache_;
  mutable std::size_t calls_ = 0;
};

std::unique_ptr<Provider> remote_provider(RemoteConfig config);

}  // namespace lrsum::embedding
