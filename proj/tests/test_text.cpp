#include <random>

#include "doctest.h"
#include "lrsum/error.h"
#include "lrsum/text.h"
#include "oracles.h"

using namespace lrsum;
using namespace lrsum::text;

namespace {

std::string strip_spaces(std::string_view s) {
  std::string out;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t len = 0;
    const char32_t cp = decode_utf8(s, pos, &len);
    if (!is_space(cp)) out.append(s.substr(pos, len));
    pos += len;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) out += p;
  return out;
}

// Random text over Urdu letters, ASCII, punctuation and assorted whitespace.
std::string random_text(std::mt19937_64& rng, std::size_t n) {
  static const std::vector<std::string> atoms = {
      "آ", "ج", "ا", "چ", "ھ", "د", "ن", "ہ", "ے", "۔", "؟", "،", "a", "b", "1",
      ".", ",", "!", "?", "(", ")", " ", " ", "\n", "\n\n", "\t", "\xc2\xa0"};
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += atoms[rng() % atoms.size()];
  return s;
}

SubwordVocab abc_vocab() { return SubwordVocab({"<unk>", "a", "ab", "b"}, {0}, 0); }

}  // namespace

TEST_CASE("word_tokenize detaches Urdu and ASCII punctuation") {
  CHECK(word_tokenize("آج اچھا دن ہے۔") ==
        std::vector<std::string>{"آج", "اچھا", "دن", "ہے", "۔"});
  CHECK(word_tokenize("").empty());
  CHECK(word_tokenize("a,b c") == std::vector<std::string>{"a", ",", "b", "c"});
  CHECK(word_tokenize("کیا؟ ہاں، ٹھیک") ==
        std::vector<std::string>{"کیا", "؟", "ہاں", "،", "ٹھیک"});
  CHECK(word_tokenize("  \n\t ").empty());
}

TEST_CASE("content_tokens drops punctuation-only tokens") {
  CHECK(content_tokens("آج، دن۔") == std::vector<std::string>{"آج", "دن"});
  CHECK(is_punct_token("۔"));
  CHECK_FALSE(is_punct_token("a."));
}

TEST_CASE("word_tokenize keeps every non-space character exactly once") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 300; ++i) {
    const std::string s = random_text(rng, rng() % 40);
    const auto toks = word_tokenize(s);
    for (const auto& t : toks) CHECK_FALSE(t.empty());
    CHECK(join(toks) == strip_spaces(s));
  }
}

TEST_CASE("word_spans point at the token bytes") {
  const std::string s = "ایک، دو";
  const auto spans = word_spans(s);
  const auto toks = word_tokenize(s);
  REQUIRE(spans.size() == toks.size());
  for (std::size_t i = 0; i < spans.size(); ++i) {
    CHECK(s.substr(spans[i].begin, spans[i].size()) == toks[i]);
  }
}

TEST_CASE("malformed UTF-8 is handled without throwing") {
  const std::string bad = "a\xff\xfe b\xc3";
  CHECK_NOTHROW(word_tokenize(bad));
  CHECK(join(word_tokenize(bad)) == strip_spaces(bad));
  std::size_t len = 0;
  CHECK(decode_utf8(bad, 1, &len) == 0xFFFD);
  CHECK(len == 1);
}

TEST_CASE("sentence_split") {
  CHECK(sentence_split("ایک۔ دو؟ تین").size() == 3);
  CHECK(sentence_split("ایک۔ دو؟ تین") == std::vector<std::string>{"ایک۔", "دو؟", "تین"});
  CHECK(sentence_split("no terminal marks here").size() == 1);
  CHECK(sentence_split("").empty());
  CHECK(sentence_split("Pi is 3.14 exactly. Yes!") ==
        std::vector<std::string>{"Pi is 3.14 exactly.", "Yes!"});
  CHECK(sentence_split("one\n\ntwo") == std::vector<std::string>{"one", "two"});
  CHECK(sentence_split("a. b", {U'!'}).size() == 1);
}

TEST_CASE("sentence and paragraph splits preserve non-space content in order") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 300; ++i) {
    const std::string s = random_text(rng, rng() % 60);
    const auto sents = sentence_split(s);
    for (const auto& x : sents) CHECK_FALSE(x.empty());
    CHECK(strip_spaces(join(sents)) == strip_spaces(s));
    const auto paras = paragraph_split(s);
    for (const auto& x : paras) CHECK_FALSE(x.empty());
    CHECK(strip_spaces(join(paras)) == strip_spaces(s));
  }
}

TEST_CASE("paragraph_split") {
  CHECK(paragraph_split("p1\n\np2") == std::vector<std::string>{"p1", "p2"});
  CHECK(paragraph_split("  single  ") == std::vector<std::string>{"single"});
  CHECK(paragraph_split("\n\n\n").empty());
  CHECK(paragraph_split("a\nb\n \nc") == std::vector<std::string>{"a\nb", "c"});
}

TEST_CASE("subword_tokenize greedy longest match") {
  const SubwordVocab v = abc_vocab();
  CHECK(subword_tokenize(v, "ab") == std::vector<int>{2});
  // a|ab: the longest prefix of "aab" is "a", then "ab" covers the rest.
  CHECK(subword_tokenize(v, "aab") == std::vector<int>{1, 2});
  CHECK(subword_tokenize(v, "c") == std::vector<int>{0});
  CHECK(subword_tokenize(v, "acb") == std::vector<int>{1, 0, 3});
  CHECK(subword_tokenize(v, "ab ab") == std::vector<int>{2, 2});
  CHECK(subword_tokenize(v, "").empty());
}

TEST_CASE("special pieces never match text") {
  const SubwordVocab v({"<unk>", "</s>", "a"}, {0, 1}, 0);
  CHECK_FALSE(v.find("</s>").has_value());
  const auto ids = subword_tokenize(v, "</s>");
  for (int id : ids) CHECK(id != 1);
}

TEST_CASE("unknown code points yield one unk per code point") {
  const SubwordVocab v = abc_vocab();
  CHECK(subword_tokenize(v, "ٹ") == std::vector<int>{0});
  CHECK(subword_tokenize(v, "ٹٹ") == std::vector<int>{0, 0});
}

TEST_CASE("segmentation over non-special pieces decodes back to the word") {
  const SubwordVocab v({"<unk>", "ا", "اچ", "چھا", "ھ", "دن", "د", "ن", "ہے"}, {0}, 0);
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    std::string word;
    const int parts = 1 + static_cast<int>(rng() % 5);
    for (int p = 0; p < parts; ++p) word += v.pieces()[1 + rng() % (v.size() - 1)];
    const auto ids = subword_tokenize(v, word);
    std::string decoded;
    for (int id : ids) {
      REQUIRE(id != v.unk_id());
      decoded += v.pieces()[static_cast<std::size_t>(id)];
    }
    CHECK(decoded == word);
    CHECK(subword_tokenize(v, word) == ids);
  }
}

TEST_CASE("subword spans cover the text of each token") {
  const SubwordVocab v = abc_vocab();
  const std::string s = "aab b";
  const auto toks = subword_segment(v, s);
  REQUIRE(toks.size() == 3);
  CHECK(s.substr(toks[0].span.begin, toks[0].span.size()) == "a");
  CHECK(s.substr(toks[1].span.begin, toks[1].span.size()) == "ab");
  CHECK(s.substr(toks[2].span.begin, toks[2].span.size()) == "b");
}

TEST_CASE("SubwordVocab validation") {
  CHECK_THROWS_AS(SubwordVocab({}, {}, 0), ValidationError);
  CHECK_THROWS_AS(SubwordVocab({"a", "a"}, {0}, 0), ValidationError);
  CHECK_THROWS_AS(SubwordVocab({"a", ""}, {0}, 0), ValidationError);
  CHECK_THROWS_AS(SubwordVocab({"a"}, {0}, 3), ValidationError);
  CHECK_THROWS_AS(SubwordVocab({"a", "b"}, {5}, 0), ValidationError);
  const SubwordVocab v({"x", "y"}, {}, 1);
  CHECK(v.is_special(1));
}

TEST_CASE("load_vocab and headers") {
  const auto dir = oracle::scratch_dir("vocab");
  oracle::write_file(dir / "three.txt", "a\nb\nc\n");
  const SubwordVocab three = load_vocab(dir / "three.txt");
  CHECK(three.size() == 3);
  CHECK(three.pieces() == std::vector<std::string>{"a", "b", "c"});
  CHECK(three.unk_id() == 0);
  CHECK(three.is_special(0));

  oracle::write_file(dir / "dup.txt", "a\nb\na\n");
  CHECK_THROWS_AS(load_vocab(dir / "dup.txt"), ValidationError);
  oracle::write_file(dir / "empty.txt", "");
  CHECK_THROWS_AS(load_vocab(dir / "empty.txt"), ValidationError);
  CHECK_THROWS_AS(load_vocab(dir / "missing.txt"), IoError);

  oracle::write_file(dir / "unk.txt", "<unk>\nx\ny\n");
  const SubwordVocab unk = load_vocab(dir / "unk.txt");
  CHECK(unk.unk_id() == 0);
  CHECK(unk.special_ids().count(0) == 1);

  oracle::write_file(dir / "hdr.txt", "#unk=2\n#special=0,2\n<pad>\nx\n<unk>\r\n");
  const SubwordVocab hdr = load_vocab(dir / "hdr.txt");
  CHECK(hdr.size() == 3);
  CHECK(hdr.unk_id() == 2);
  CHECK(hdr.special_ids() == std::set<int>{0, 2});
  CHECK(hdr.pieces()[2] == "<unk>");

  const SubwordVocab over = load_vocab(dir / "three.txt", {1, std::set<int>{2}});
  CHECK(over.unk_id() == 1);
  CHECK(over.special_ids() == std::set<int>{1, 2});

  const SubwordVocab back = parse_vocab(serialize_vocab(hdr));
  CHECK(back.pieces() == hdr.pieces());
  CHECK(back.special_ids() == hdr.special_ids());
  CHECK(back.unk_id() == hdr.unk_id());
  std::filesystem::remove_all(dir);
}
