#include <random>
#include <sstream>

#include "doctest.h"
#include "lrsum/error.h"
#include "lrsum/text.h"
#include "lrsum/truncation.h"
#include "oracles.h"

using namespace lrsum;
using namespace lrsum::truncation;

namespace {

std::vector<std::string> split_words(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

std::string join_words(const std::vector<std::string>& ws) {
  std::string s;
  for (const auto& w : ws) {
    if (!s.empty()) s += ' ';
    s += w;
  }
  return s;
}

// Paragraph of `n` words: the first `hits` summary words, then filler.
std::string para(std::size_t n, std::size_t hits) {
  std::vector<std::string> ws;
  for (std::size_t i = 0; i < n; ++i) ws.push_back(i < hits ? "s" + std::to_string(i) : "f");
  return join_words(ws);
}

const std::string kTenWordSummary = "s0 s1 s2 s3 s4 s5 s6 s7 s8 s9";

struct RandomArticle {
  std::vector<std::string> paragraphs;
  std::string summary;
  std::string article() const {
    std::string a;
    for (const auto& p : paragraphs) a += (a.empty() ? "" : "\n\n") + p;
    return a;
  }
};

RandomArticle random_article(std::mt19937_64& rng) {
  RandomArticle r;
  const std::size_t np = 1 + rng() % 8;
  for (std::size_t p = 0; p < np; ++p) {
    std::vector<std::string> ws;
    const std::size_t len = 1 + rng() % 250;
    for (std::size_t i = 0; i < len; ++i) ws.push_back("w" + std::to_string(rng() % 12));
    r.paragraphs.push_back(join_words(ws));
  }
  std::vector<std::string> ws;
  const std::size_t len = 1 + rng() % 15;
  for (std::size_t i = 0; i < len; ++i) ws.push_back("w" + std::to_string(rng() % 12));
  r.summary = join_words(ws);
  return r;
}

double oracle_recall(const std::string& paragraph, const std::string& summary) {
  const auto ref = split_words(summary);
  return static_cast<double>(oracle::ngram_overlap(split_words(paragraph), ref, 1)) /
         static_cast<double>(ref.size());
}

}  // namespace

TEST_CASE("score_paragraphs") {
  const auto s = score_paragraphs({"x y z", "q r", "only x"}, "x y");
  CHECK(s[0] == 1.0);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.5);
  CHECK_THROWS_AS(score_paragraphs({"x"}, ""), ValidationError);
  CHECK_THROWS_AS(score_paragraphs({"x"}, "۔ ،"), ValidationError);
}

TEST_CASE("article within budget is unchanged") {
  TruncateOptions o{512, BudgetUnit::kWord};
  const auto t = truncate_article("a b\n\nc d", "a", nullptr, o);
  CHECK(t.removed.empty());
  CHECK_FALSE(t.hard_cut);
  CHECK(t.paragraphs.size() == 2);
  CHECK(t.total_tokens == 4);
  CHECK(t.text() == "a b\n\nc d");
}

TEST_CASE("greedy removal drops the lowest recall paragraphs") {
  // scores 0.2, 0.9, 0.5 over 300-word paragraphs, budget 512
  const std::string article = para(300, 2) + "\n\n" + para(300, 9) + "\n\n" + para(300, 5);
  const auto t = truncate_article(article, kTenWordSummary, nullptr, {512, BudgetUnit::kWord});
  CHECK(t.removed == std::vector<std::size_t>{0, 2});
  REQUIRE(t.paragraphs.size() == 1);
  CHECK(t.paragraphs[0].index == 1);
  CHECK(t.paragraphs[0].score == doctest::Approx(0.9));
  CHECK(t.total_tokens == 300);
  CHECK(t.tokens_before == 900);
  CHECK_FALSE(t.hard_cut);
}

TEST_CASE("ties remove the later paragraph") {
  const std::string article = para(200, 3) + "\n\n" + para(200, 3) + "\n\n" + para(200, 3);
  const auto t = truncate_article(article, kTenWordSummary, nullptr, {450, BudgetUnit::kWord});
  CHECK(t.removed == std::vector<std::size_t>{2});
  CHECK(t.paragraphs[0].index == 0);
  CHECK(t.paragraphs[1].index == 1);
}

TEST_CASE("single oversized paragraph is hard cut to the budget") {
  const auto t = truncate_article(para(600, 0), "s0", nullptr, {512, BudgetUnit::kWord});
  CHECK(t.hard_cut);
  REQUIRE(t.paragraphs.size() == 1);
  CHECK(t.total_tokens == 512);
  CHECK(text::word_tokenize(t.text()).size() == 512);
}

TEST_CASE("hard cut in subword units lands exactly on the budget") {
  const text::SubwordVocab v({"<unk>", "ab", "a", "b", "abc"}, {0}, 0);
  std::mt19937_64 rng(51);
  for (int i = 0; i < 100; ++i) {
    std::vector<std::string> ws;
    for (int w = 0; w < 80; ++w) {
      std::string word;
      for (std::size_t c = 0, n = 1 + rng() % 6; c < n; ++c) word += "abcx"[rng() % 4];
      ws.push_back(word);
    }
    const std::string article = join_words(ws);
    const std::size_t budget = 1 + rng() % 60;
    const auto t = truncate_article(article, "a", &v, {budget, BudgetUnit::kSubword});
    CHECK(t.hard_cut);
    CHECK(t.total_tokens == budget);
    CHECK(text::subword_tokenize(v, t.text()).size() == budget);
    const auto full = text::subword_tokenize(v, article);
    const auto kept = text::subword_tokenize(v, t.text());
    CHECK(std::equal(kept.begin(), kept.end(), full.begin()));
  }
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(truncate_article("", "x", nullptr, {512, BudgetUnit::kWord}), ValidationError);
  CHECK_THROWS_AS(truncate_article("a", "x", nullptr, {0, BudgetUnit::kWord}), ValidationError);
  CHECK_THROWS_AS(truncate_article("a", "x", nullptr, {512, BudgetUnit::kSubword}),
                  ValidationError);
}

TEST_CASE("random articles agree with the greedy oracle") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 300; ++trial) {
    const RandomArticle a = random_article(rng);
    const auto t = truncate_article(a.article(), a.summary, nullptr, {512, BudgetUnit::kWord});

    std::vector<double> scores;
    std::vector<std::size_t> lengths;
    for (const auto& p : a.paragraphs) {
      scores.push_back(oracle_recall(p, a.summary));
      lengths.push_back(split_words(p).size());
    }
    const auto expect = oracle::greedy_truncation(scores, lengths, 512);
    CHECK(t.removed == expect.removed);

    std::vector<std::size_t> kept;
    for (const auto& p : t.paragraphs) kept.push_back(p.index);
    CHECK(kept == expect.retained);
    for (std::size_t i = 1; i < kept.size(); ++i) CHECK(kept[i - 1] < kept[i]);

    if (t.hard_cut) {
      CHECK(t.paragraphs.size() == 1);
      CHECK(t.total_tokens == 512);
    } else {
      CHECK(t.total_tokens <= 512);
      CHECK(t.total_tokens == expect.total);
    }

    // Every removal was a minimum among what remained at that step.
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < scores.size(); ++i) remaining.push_back(i);
    for (std::size_t r : t.removed) {
      for (std::size_t i : remaining) {
        CHECK(scores[r] <= scores[i]);
        if (scores[r] == scores[i]) CHECK(r >= i);
      }
      remaining.erase(std::find(remaining.begin(), remaining.end(), r));
    }

    const auto again = truncate_article(a.article(), a.summary, nullptr, {512, BudgetUnit::kWord});
    CHECK(again.removed == t.removed);
    CHECK(again.text() == t.text());
  }
}

TEST_CASE("audit record") {
  const std::string article = para(300, 2) + "\n\n" + para(300, 9);
  const auto t = truncate_article(article, kTenWordSummary, nullptr, {512, BudgetUnit::kWord});
  const auto j = audit_json("r1", t);
  CHECK(j.at("id") == "r1");
  CHECK(j.at("removed") == nlohmann::json::array({0}));
  CHECK(j.at("hard_cut") == false);
  CHECK(j.at("tokens_before") == 600);
  CHECK(j.at("tokens_after") == 300);
}
