#include "lrsum/embedding.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "httplib.h"
#include "json.hpp"
#include "lrsum/error.h"

namespace lrsum::embedding {

static_assert(std::endian::native == std::endian::little,
              "store serialization assumes a little-endian host");

double cosine_similarity(const Vector& u, const Vector& v) {
  if (u.size() != v.size()) {
    throw ValidationError("cosine: dimension mismatch " +
                          std::to_string(u.size()) + " vs " +
                          std::to_string(v.size()));
  }
  double dot = 0, nu = 0, nv = 0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw ValidationError("cosine: zero vector");
  return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

std::vector<Vector> Provider::embed_tokens(const std::vector<std::string>&) const {
  throw ValidationError("provider '" + name() + "' has no token mode");
}

std::vector<Vector> Provider::embed_sentence_batch(
    const std::vector<std::string>&) const {
  throw ValidationError("provider '" + name() + "' has no sentence mode");
}

std::vector<Vector> embed_sentences(const Provider& provider,
                                    const std::vector<std::string>& sentences) {
  if (sentences.empty()) return {};
  std::vector<Vector> out;
  if (provider.supports_sentences()) {
    out = provider.embed_sentence_batch(sentences);
  } else {
    out.reserve(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      std::vector<std::string> tokens = text::content_tokens(sentences[i]);
      if (tokens.empty()) tokens = text::word_tokenize(sentences[i]);
      if (tokens.empty()) {
        throw ValidationError("sentence " + std::to_string(i) + " has no tokens");
      }
      std::vector<Vector> vecs;
      try {
        vecs = provider.embed_tokens(tokens);
      } catch (const std::exception& e) {
        throw ValidationError("sentence " + std::to_string(i) + ": " + e.what());
      }
      Vector mean(provider.dimension(), 0.0);
      for (const Vector& v : vecs) {
        for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += v[d];
      }
      for (double& x : mean) x /= static_cast<double>(vecs.size());
      out.push_back(std::move(mean));
    }
  }
  if (out.size() != sentences.size()) {
    throw ValidationError("provider returned " + std::to_string(out.size()) +
                          " vectors for " + std::to_string(sentences.size()) +
                          " sentences");
  }
  return out;
}

OneHotProvider::OneHotProvider(std::shared_ptr<const text::SubwordVocab> vocab)
    : vocab_(std::move(vocab)) {
  if (!vocab_) throw ValidationError("one-hot provider needs a vocabulary");
}

std::vector<Vector> OneHotProvider::embed_tokens(
    const std::vector<std::string>& tokens) const {
  std::vector<Vector> out;
  out.reserve(tokens.size());
  for (const std::string& t : tokens) {
    Vector v(vocab_->size(), 0.0);
    std::vector<int> ids = text::subword_tokenize(*vocab_, t);
    if (ids.empty()) ids.push_back(vocab_->unk_id());
    const double w = 1.0 / static_cast<double>(ids.size());
    for (int id : ids) v[static_cast<std::size_t>(id)] += w;
    out.push_back(std::move(v));
  }
  return out;
}

std::unique_ptr<Provider> onehot_provider(
    std::shared_ptr<const text::SubwordVocab> vocab) {
  return std::make_unique<OneHotProvider>(std::move(vocab));
}

void EmbeddingStore::add(std::string key, const std::vector<float>& row) {
  if (dimension_ == 0 && keys_.empty()) dimension_ = row.size();
  if (row.size() != dimension_ || dimension_ == 0) {
    throw ValidationError("store row '" + key + "' has dimension " +
                          std::to_string(row.size()) + ", expected " +
                          std::to_string(dimension_));
  }
  for (float x : row) {
    if (!std::isfinite(x)) {
      throw ValidationError("store row '" + key + "' has a non-finite entry");
    }
  }
  if (!index_.emplace(key, keys_.size()).second) {
    throw ValidationError("duplicate store key '" + key + "'");
  }
  keys_.push_back(std::move(key));
  data_.insert(data_.end(), row.begin(), row.end());
}

void EmbeddingStore::add(std::string key, const Vector& row) {
  std::vector<float> f(row.begin(), row.end());
  add(std::move(key), f);
}

std::optional<std::size_t> EmbeddingStore::find(const std::string& key) const {
  auto it = index_.find(key);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<float> EmbeddingStore::row(std::size_t r) const {
  auto begin = data_.begin() + static_cast<std::ptrdiff_t>(r * dimension_);
  return {begin, begin + static_cast<std::ptrdiff_t>(dimension_)};
}

Vector EmbeddingStore::row_as_double(std::size_t r) const {
  std::vector<float> f = row(r);
  return {f.begin(), f.end()};
}

namespace {

constexpr char kMagic[6] = {'E', 'M', 'B', 'V', '1', '\0'};

void put_u32(std::string& out, std::uint32_t v) {
  char buf[4];
  std::memcpy(buf, &v, 4);
  out.append(buf, 4);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  void need(std::size_t n, const char* what) const {
    if (bytes_.size() - pos_ < n) {
      throw ValidationError(std::string("embedding store truncated in ") + what);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v;
    std::memcpy(&v, bytes_.data() + pos_, 4);
    pos_ += 4;
    return v;
  }
  std::string_view take(std::size_t n, const char* what) {
    need(n, what);
    std::string_view s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string serialize_store(const EmbeddingStore& store) {
  std::string out(kMagic, sizeof kMagic);
  put_u32(out, static_cast<std::uint32_t>(store.rows()));
  put_u32(out, static_cast<std::uint32_t>(store.dimension()));
  const std::vector<float>& data = store.data();
  out.append(reinterpret_cast<const char*>(data.data()), data.size() * sizeof(float));
  for (const std::string& key : store.keys()) {
    put_u32(out, static_cast<std::uint32_t>(key.size()));
    out += key;
  }
  return out;
}

EmbeddingStore parse_store(std::string_view bytes) {
  Reader r(bytes);
  if (r.take(sizeof kMagic, "magic") != std::string_view(kMagic, sizeof kMagic)) {
    throw ValidationError("embedding store: bad magic");
  }
  const std::uint32_t rows = r.u32("header");
  const std::uint32_t dim = r.u32("header");
  if (rows > 0 && dim == 0) throw ValidationError("embedding store: dim is 0");
  const std::size_t payload = static_cast<std::size_t>(rows) * dim * sizeof(float);
  std::string_view raw = r.take(payload, "payload");
  std::vector<float> data(static_cast<std::size_t>(rows) * dim);
  std::memcpy(data.data(), raw.data(), payload);

  // A file that ends right after the payload is keyed by row number.
  const bool has_index = !r.done();
  EmbeddingStore store(dim);
  for (std::uint32_t i = 0; i < rows; ++i) {
    std::string key;
    if (has_index) {
      const std::uint32_t len = r.u32("index");
      key = std::string(r.take(len, "index"));
    } else {
      key = std::to_string(i);
    }
    auto begin = data.begin() + static_cast<std::ptrdiff_t>(i) * dim;
    store.add(std::move(key), std::vector<float>(begin, begin + dim));
  }
  if (!r.done()) throw ValidationError("embedding store: trailing bytes");
  return store;
}

EmbeddingStore load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embedding store " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_store(buf.str());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_store(const EmbeddingStore& store, const std::filesystem::path& path) {
  const std::string bytes = serialize_store(store);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string content_key(Mode mode, std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](unsigned char c) {
    h ^= c;
    h *= 0x100000001b3ULL;
  };
  mix(mode == Mode::kToken ? 't' : 's');
  mix(0x1f);
  for (char c : text) mix(static_cast<unsigned char>(c));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

StoreProvider::StoreProvider(std::string name, EmbeddingStore store, Mode mode)
    : name_(std::move(name)), store_(std::move(store)), mode_(mode) {}

std::vector<Vector> StoreProvider::lookup(Mode m,
                                          const std::vector<std::string>& texts) const {
  std::vector<Vector> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    auto row = store_.find(content_key(m, texts[i]));
    if (!row) {
      throw ValidationError("provider '" + name_ + "': no vector for input " +
                            std::to_string(i));
    }
    out.push_back(store_.row_as_double(*row));
  }
  return out;
}

std::vector<Vector> StoreProvider::embed_tokens(
    const std::vector<std::string>& tokens) const {
  if (!supports_tokens()) return Provider::embed_tokens(tokens);
  return lookup(Mode::kToken, tokens);
}

std::vector<Vector> StoreProvider::embed_sentence_batch(
    const std::vector<std::string>& sentences) const {
  if (!supports_sentences()) return Provider::embed_sentence_batch(sentences);
  return lookup(Mode::kSentence, sentences);
}

RemoteProvider::RemoteProvider(RemoteConfig config) : config_(std::move(config)) {
  if (config_.batch_size == 0) config_.batch_size = 1;
  if (config_.cache_path && std::filesystem::exists(*config_.cache_path)) {
    cache_ = load_store(*config_.cache_path);
  }
}

std::size_t RemoteProvider::dimension() const {
  std::lock_guard lock(mu_);
  return cache_.dimension();
}

std::size_t RemoteProvider::network_calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::vector<Vector> RemoteProvider::embed_tokens(
    const std::vector<std::string>& tokens) const {
  return embed(Mode::kToken, tokens);
}

std::vector<Vector> RemoteProvider::embed_sentence_batch(
    const std::vector<std::string>& sentences) const {
  return embed(Mode::kSentence, sentences);
}

std::vector<std::vector<float>> RemoteProvider::fetch(
    Mode m, const std::vector<std::string>& texts) const {
  nlohmann::json body = {{"texts", texts},
                         {"mode", m == Mode::kToken ? "token" : "sentence"}};
  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    httplib::Client client(config_.endpoint);
    client.set_connection_timeout(config_.timeout_seconds, 0);
    client.set_read_timeout(config_.timeout_seconds, 0);
    ++calls_;
    auto res = client.Post("/embed", payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("dim") || !reply.contains("vectors") ||
        !reply["vectors"].is_array()) {
      throw IoError("embedding service returned a malformed response");
    }
    const auto dim = reply["dim"].get<std::size_t>();
    const auto& vectors = reply["vectors"];
    if (vectors.size() != texts.size()) {
      throw IoError("embedding service returned " + std::to_string(vectors.size()) +
                    " vectors for " + std::to_string(texts.size()) + " texts");
    }
    std::vector<std::vector<float>> out;
    for (const auto& v : vectors) {
      std::vector<float> row = v.get<std::vector<float>>();
      if (row.size() != dim) {
        throw ValidationError("embedding service vector length " +
                              std::to_string(row.size()) + " != dim " +
                              std::to_string(dim));
      }
      out.push_back(std::move(row));
    }
    return out;
  }
  throw IoError("embedding service at " + config_.endpoint + " failed after " +
                std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

std::vector<Vector> RemoteProvider::embed(Mode m,
                                          const std::vector<std::string>& texts) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> keys;
  std::vector<std::size_t> missing;
  std::unordered_set<std::string> pending;
  keys.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    keys.push_back(content_key(m, texts[i]));
    if (!cache_.contains(keys.back()) && pending.insert(keys.back()).second) {
      missing.push_back(i);
    }
  }
  bool added = false;
  for (std::size_t start = 0; start < missing.size(); start += config_.batch_size) {
    const std::size_t end = std::min(missing.size(), start + config_.batch_size);
    std::vector<std::string> batch;
    for (std::size_t j = start; j < end; ++j) batch.push_back(texts[missing[j]]);
    std::vector<std::vector<float>> rows;
    try {
      rows = fetch(m, batch);
    } catch (const ValidationError& e) {
      throw ValidationError("input " + std::to_string(missing[start]) + ": " + e.what());
    } catch (const std::exception& e) {
      throw IoError("input " + std::to_string(missing[start]) + ": " + e.what());
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (cache_.rows() > 0 && rows[j].size() != cache_.dimension()) {
        throw ValidationError("embedding service dimension drifted from " +
                              std::to_string(cache_.dimension()) + " to " +
                              std::to_string(rows[j].size()));
      }
      cache_.add(keys[missing[start + j]], rows[j]);
      added = true;
    }
  }
  if (added && config_.cache_path) save_store(cache_, *config_.cache_path);

  std::vector<Vector> out;
  out.reserve(texts.size());
  for (const std::string& k : keys) out.push_back(cache_.row_as_double(*cache_.find(k)));
  return out;
}

std::unique_ptr<Provider> remote_provider(RemoteConfig config) {
  return std::make_unique<RemoteProvider>(std::move(config));
}

}  // namespace lrsum::embedding
