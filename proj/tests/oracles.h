// Reference implementations used by the unit and acceptance tests. They are
// written for clarity over speed and share no code with the library.
#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle {

using Seq = std::vector<std::string>;

inline bool is_subsequence(const Seq& sub, const Seq& of) {
  std::size_t j = 0;
  for (std::size_t i = 0; i < of.size() && j < sub.size(); ++i) {
    if (of[i] == sub[j]) ++j;
  }
  return j == sub.size();
}

// Enumerates every subsequence of the shorter side (2^12 at most).
inline std::size_t brute_lcs(const Seq& a, const Seq& b) {
  const Seq& s = a.size() <= b.size() ? a : b;
  const Seq& t = a.size() <= b.size() ? b : a;
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << s.size()); ++mask) {
    const auto bits = static_cast<std::size_t>(__builtin_popcount(mask));
    if (bits <= best) continue;
    Seq sub;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (mask & (1u << i)) sub.push_back(s[i]);
    }
    if (is_subsequence(sub, t)) best = bits;
  }
  return best;
}

inline std::vector<Seq> ngrams(const Seq& s, std::size_t n) {
  std::vector<Seq> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) {
    out.emplace_back(s.begin() + static_cast<std::ptrdiff_t>(i),
                     s.begin() + static_cast<std::ptrdiff_t>(i + n));
  }
  return out;
}

// Multiset intersection size by pairing each candidate n-gram with an unused
// identical reference n-gram.
inline std::size_t ngram_overlap(const Seq& cand, const Seq& ref, std::size_t n) {
  const std::vector<Seq> c = ngrams(cand, n);
  const std::vector<Seq> r = ngrams(ref, n);
  std::vector<bool> used(r.size(), false);
  std::size_t hits = 0;
  for (const Seq& g : c) {
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (!used[j] && r[j] == g) {
        used[j] = true;
        ++hits;
        break;
      }
    }
  }
  return hits;
}

inline Seq random_seq(std::mt19937_64& rng, std::size_t max_len, int alphabet) {
  const std::size_t len = rng() % (max_len + 1);
  Seq s;
  for (std::size_t i = 0; i < len; ++i) {
    s.push_back(std::string(1, static_cast<char>('a' + rng() % static_cast<unsigned>(alphabet))));
  }
  return s;
}

struct TruncationTrace {
  std::vector<std::size_t> removed;
  std::vector<std::size_t> retained;
  std::size_t total = 0;
};

// Procedure loop with the minimum recomputed from scratch every step. Ties go
// to the paragraph with the larger index.
inline TruncationTrace greedy_truncation(const std::vector<double>& scores,
                                         const std::vector<std::size_t>& lengths,
                                         std::size_t budget) {
  TruncationTrace t;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    t.retained.push_back(i);
    t.total += lengths[i];
  }
  while (t.total > budget && t.retained.size() > 1) {
    std::size_t victim = t.retained.front();
    for (std::size_t i : t.retained) {
      if (scores[i] < scores[victim] || (scores[i] == scores[victim] && i > victim)) victim = i;
    }
    t.removed.push_back(victim);
    t.total -= lengths[victim];
    t.retained.erase(std::find(t.retained.begin(), t.retained.end(), victim));
  }
  return t;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out << s;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const std::filesystem::path dir = std::filesystem::temp_directory_path() /
                                    ("lrsum_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace oracle
