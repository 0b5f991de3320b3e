#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace lrsum::text {

/// Byte range [begin, end) into the source string.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - begin; }
  bool operator==(const Span&) const = default;
};

// UTF-8 helpers. Malformed bytes decode as U+FFFD with length 1 so every
// function here is total over arbitrary byte strings.
char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* len);
void append_utf8(std::string& out, char32_t cp);

bool is_space(char32_t cp);
bool is_punct(char32_t cp);

/// Strips Unicode whitespace from both ends.
std::string_view trim(std::string_view s);

/// Whitespace split with every punctuation code point detached as its own
/// token. Never yields empty tokens.
std::vector<std::string> word_tokenize(std::string_view text);
std::vector<Span> word_spans(std::string_view text);

/// Word tokens with punctuation-only tokens dropped (the ROUGE default).
std::vector<std::string> content_tokens(std::string_view text);
bool is_punct_token(std::string_view token);

/// Default sentence terminals: Urdu full stop and question mark, '!', '?', '.'.
const std::vector<char32_t>& default_terminals();

/// Splits after a terminal mark that is followed by whitespace or end of
/// text. Blank-line paragraph breaks also end a sentence. Sentences are
/// trimmed; empty ones are dropped.
std::vector<std::string> sentence_split(std::string_view text,
                                        const std::vector<char32_t>& terminals =
                                            default_terminals());

/// Splits on blank lines (lines holding only whitespace).
std::vector<std::string> paragraph_split(std::string_view text);

class SubwordVocab {
 public:
  SubwordVocab(std::vector<std::string> pieces, std::set<int> special_ids,
               int unk_id);

  const std::vector<std::string>& pieces() const { return pieces_; }
  const std::set<int>& special_ids() const { return special_ids_; }
  int unk_id() const { return unk_id_; }
  std::size_t size() const { return pieces_.size(); }
  bool is_special(int id) const { return special_ids_.count(id) != 0; }

  /// Id of a non-special piece, if present.
  std::optional<int> find(std::string_view piece) const;
  std::size_t max_piece_bytes() const { return max_piece_bytes_; }

 private:
  std::vector<std::string> pieces_;
  std::set<int> special_ids_;
  int unk_id_;
  std::unordered_map<std::string, int> matchable_;
  std::size_t max_piece_bytes_ = 0;
};

struct SubwordToken {
  int id;
  Span span;
};

/// Greedy longest-prefix segmentation of each word token. Special pieces
/// never match text; a code point no piece covers becomes one unk token.
std::vector<SubwordToken> subword_segment(const SubwordVocab& vocab,
                                          std::string_view text);
std::vector<int> subword_tokenize(const SubwordVocab& vocab,
                                  std::string_view text);

struct VocabOverrides {
  std::optional<int> unk_id;
  std::optional<std::set<int>> special_ids;
};

/// Reads one piece per line. Leading `#unk=<id>` / `#special=<id,...>`
/// lines are headers, not pieces. Without a declared unk, a literal
/// "<unk>" piece is used, else id 0.
SubwordVocab load_vocab(const std::filesystem::path& path,
                        const VocabOverrides& overrides = {});
SubwordVocab parse_vocab(std::string_view contents,
                         const VocabOverrides& overrides = {});
std::string serialize_vocab(const SubwordVocab& vocab);
void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path);

}  // namespace lrsum::text
