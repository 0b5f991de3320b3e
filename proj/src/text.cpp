#include "lrsum/text.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lrsum/error.h"

namespace lrsum::text {

char32_t decode_utf8(std::string_view s, std::size_t pos, std::size_t* len) {
  const auto b0 = static_cast<unsigned char>(s[pos]);
  auto bad = [&] {
    *len = 1;
    return char32_t{0xFFFD};
  };
  if (b0 < 0x80) {
    *len = 1;
    return b0;
  }
  std::size_t n;
  char32_t cp;
  if ((b0 & 0xE0) == 0xC0) {
    n = 2;
    cp = b0 & 0x1F;
  } else if ((b0 & 0xF0) == 0xE0) {
    n = 3;
    cp = b0 & 0x0F;
  } else if ((b0 & 0xF8) == 0xF0) {
    n = 4;
    cp = b0 & 0x07;
  } else {
    return bad();
  }
  if (pos + n > s.size()) return bad();
  for (std::size_t i = 1; i < n; ++i) {
    const auto b = static_cast<unsigned char>(s[pos + i]);
    if ((b & 0xC0) != 0x80) return bad();
    cp = (cp << 6) | (b & 0x3F);
  }
  *len = n;
  return cp;
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

bool is_space(char32_t cp) {
  switch (cp) {
    case ' ': case '\t': case '\n': case '\r': case '\v': case '\f':
    case 0x85: case 0xA0: case 0x1680: case 0x200B: case 0x2028:
    case 0x2029: case 0x202F: case 0x205F: case 0x3000: case 0xFEFF:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

bool is_punct(char32_t cp) {
  if (cp < 0x80) {
    return (cp >= 0x21 && cp <= 0x2F) || (cp >= 0x3A && cp <= 0x40) ||
           (cp >= 0x5B && cp <= 0x60) || (cp >= 0x7B && cp <= 0x7E);
  }
  switch (cp) {
    case 0x00A1: case 0x00AB: case 0x00BB: case 0x00BF:
    case 0x060C:  // Arabic comma
    case 0x061B:  // Arabic semicolon
    case 0x061F:  // Arabic question mark
    case 0x066A: case 0x066B: case 0x066C: case 0x066D:
    case 0x06D4:  // Urdu full stop
    case 0x2026: case 0xFD3E: case 0xFD3F:
      return true;
    default:
      return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205E);
  }
}

std::string_view trim(std::string_view s) {
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t len;
    if (!is_space(decode_utf8(s, begin, &len))) break;
    begin += len;
  }
  std::size_t end = begin;
  std::size_t pos = begin;
  while (pos < s.size()) {
    std::size_t len;
    const char32_t cp = decode_utf8(s, pos, &len);
    pos += len;
    if (!is_space(cp)) end = pos;
  }
  return s.substr(begin, end - begin);
}

std::vector<Span> word_spans(std::string_view text) {
  std::vector<Span> spans;
  std::size_t pos = 0;
  std::size_t word_start = std::string_view::npos;
  auto flush = [&](std::size_t end) {
    if (word_start != std::string_view::npos && end > word_start) {
      spans.push_back({word_start, end});
    }
    word_start = std::string_view::npos;
  };
  while (pos < text.size()) {
    std::size_t len;
    const char32_t cp = decode_utf8(text, pos, &len);
    if (is_space(cp)) {
      flush(pos);
    } else if (is_punct(cp)) {
      flush(pos);
      spans.push_back({pos, pos + len});
    } else if (word_start == std::string_view::npos) {
      word_start = pos;
    }
    pos += len;
  }
  flush(pos);
  return spans;
}

std::vector<std::string> word_tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  for (const Span& s : word_spans(text)) {
    tokens.emplace_back(text.substr(s.begin, s.size()));
  }
  return tokens;
}

bool is_punct_token(std::string_view token) {
  if (token.empty()) return false;
  std::size_t pos = 0;
  while (pos < token.size()) {
    std::size_t len;
    if (!is_punct(decode_utf8(token, pos, &len))) return false;
    pos += len;
  }
  return true;
}

std::vector<std::string> content_tokens(std::string_view text) {
  std::vector<std::string> tokens = word_tokenize(text);
  std::erase_if(tokens, [](const std::string& t) { return is_punct_token(t); });
  return tokens;
}

const std::vector<char32_t>& default_terminals() {
  static const std::vector<char32_t> kTerminals = {0x06D4, 0x061F, '!', '?',
                                                   '.'};
  return kTerminals;
}

namespace {

// A whitespace run holding two newlines separates paragraphs.
bool is_blank_break(std::string_view s) {
  return std::count(s.begin(), s.end(), '\n') >= 2;
}

}  // namespace

std::vector<std::string> sentence_split(std::string_view text,
                                        const std::vector<char32_t>& terminals) {
  std::vector<std::string> out;
  auto emit = [&](std::size_t begin, std::size_t end) {
    std::string_view piece = trim(text.substr(begin, end - begin));
    if (!piece.empty()) out.emplace_back(piece);
  };
  std::size_t start = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t len;
    const char32_t cp = decode_utf8(text, pos, &len);
    const std::size_t next = pos + len;
    if (std::find(terminals.begin(), terminals.end(), cp) != terminals.end()) {
      bool boundary = next >= text.size();
      if (!boundary) {
        std::size_t nlen;
        boundary = is_space(decode_utf8(text, next, &nlen));
      }
      if (boundary) {
        emit(start, next);
        start = next;
      }
    } else if (is_space(cp)) {
      std::size_t run_end = next;
      while (run_end < text.size()) {
        std::size_t rlen;
        if (!is_space(decode_utf8(text, run_end, &rlen))) break;
        run_end += rlen;
      }
      if (is_blank_break(text.substr(pos, run_end - pos))) {
        emit(start, pos);
        start = run_end;
      }
      pos = run_end;
      continue;
    }
    pos = next;
  }
  emit(start, text.size());
  return out;
}

std::vector<std::string> paragraph_split(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    std::string_view p = trim(current);
    if (!p.empty()) out.emplace_back(p);
    current.clear();
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (trim(line).empty()) {
      flush();
    } else {
      if (!current.empty()) current.push_back('\n');
      current.append(line);
    }
    pos = nl + 1;
  }
  flush();
  return out;
}

SubwordVocab::SubwordVocab(std::vector<std::string> pieces,
                           std::set<int> special_ids, int unk_id)
    : pieces_(std::move(pieces)),
      special_ids_(std::move(special_ids)),
      unk_id_(unk_id) {
  if (pieces_.empty()) throw ValidationError("vocabulary is empty");
  const int n = static_cast<int>(pieces_.size());
  special_ids_.insert(unk_id_);
  for (int id : special_ids_) {
    if (id < 0 || id >= n) {
      throw ValidationError("special id " + std::to_string(id) +
                            " outside vocabulary of size " + std::to_string(n));
    }
  }
  std::unordered_map<std::string, int> seen;
  for (int id = 0; id < n; ++id) {
    const std::string& p = pieces_[id];
    if (p.empty()) {
      throw ValidationError("empty piece at id " + std::to_string(id));
    }
    auto [it, inserted] = seen.emplace(p, id);
    if (!inserted) {
      throw ValidationError("duplicate piece '" + p + "' at ids " +
                            std::to_string(it->second) + " and " +
                            std::to_string(id));
    }
    if (!is_special(id)) {
      matchable_.emplace(p, id);
      max_piece_bytes_ = std::max(max_piece_bytes_, p.size());
    }
  }
}

std::optional<int> SubwordVocab::find(std::string_view piece) const {
  auto it = matchable_.find(std::string(piece));
  if (it == matchable_.end()) return std::nullopt;
  return it->second;
}

std::vector<SubwordToken> subword_segment(const SubwordVocab& vocab,
                                          std::string_view text) {
  std::vector<SubwordToken> out;
  std::vector<std::size_t> bounds;
  for (const Span& word : word_spans(text)) {
    std::string_view w = text.substr(word.begin, word.size());
    bounds.clear();
    for (std::size_t p = 0; p < w.size();) {
      std::size_t len;
      decode_utf8(w, p, &len);
      p += len;
      bounds.push_back(p);
    }
    std::size_t start = 0;
    std::size_t bi = 0;  // bounds[bi] is the first code point end after start
    while (start < w.size()) {
      const std::size_t limit = start + vocab.max_piece_bytes();
      std::size_t best_end = 0;
      int best_id = -1;
      for (std::size_t j = bi; j < bounds.size() && bounds[j] <= limit; ++j) {
        if (auto id = vocab.find(w.substr(start, bounds[j] - start))) {
          best_end = bounds[j];
          best_id = *id;
        }
      }
      if (best_id < 0) {
        best_id = vocab.unk_id();
        best_end = bounds[bi];
      }
      out.push_back({best_id, {word.begin + start, word.begin + best_end}});
      start = best_end;
      while (bi < bounds.size() && bounds[bi] <= start) ++bi;
    }
  }
  return out;
}

std::vector<int> subword_tokenize(const SubwordVocab& vocab,
                                  std::string_view text) {
  std::vector<int> ids;
  for (const SubwordToken& t : subword_segment(vocab, text)) ids.push_back(t.id);
  return ids;
}

namespace {

int parse_id(std::string_view s, std::size_t line_no) {
  std::string str(trim(s));
  std::size_t used = 0;
  int value = -1;
  try {
    value = std::stoi(str, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != str.size()) {
    throw ValidationError("vocab header line " + std::to_string(line_no) +
                          ": bad id '" + str + "'");
  }
  return value;
}

}  // namespace

SubwordVocab parse_vocab(std::string_view contents,
                         const VocabOverrides& overrides) {
  std::vector<std::string> pieces;
  std::optional<int> unk;
  std::set<int> specials;
  bool in_header = true;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < contents.size()) {
    std::size_t nl = contents.find('\n', pos);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (in_header && line.starts_with("#unk=")) {
      unk = parse_id(line.substr(5), line_no);
      continue;
    }
    if (in_header && line.starts_with("#special=")) {
      std::string_view rest = line.substr(9);
      while (!rest.empty()) {
        std::size_t comma = rest.find(',');
        std::string_view item = rest.substr(0, comma);
        if (!trim(item).empty()) specials.insert(parse_id(item, line_no));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      continue;
    }
    in_header = false;
    if (line.empty()) {
      throw ValidationError("vocab line " + std::to_string(line_no) +
                            ": empty piece");
    }
    pieces.emplace_back(line);
  }
  if (pieces.empty()) throw ValidationError("vocabulary file has no pieces");

  if (overrides.special_ids) specials = *overrides.special_ids;
  if (overrides.unk_id) unk = overrides.unk_id;
  if (!unk) {
    auto it = std::find(pieces.begin(), pieces.end(), "<unk>");
    unk = it == pieces.end() ? 0 : static_cast<int>(it - pieces.begin());
  }
  return SubwordVocab(std::move(pieces), std::move(specials), *unk);
}

SubwordVocab load_vocab(const std::filesystem::path& path,
                        const VocabOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open vocab file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_vocab(buf.str(), overrides);
}

std::string serialize_vocab(const SubwordVocab& vocab) {
  std::string out = "#unk=" + std::to_string(vocab.unk_id()) + "\n#special=";
  bool first = true;
  for (int id : vocab.special_ids()) {
    if (!first) out.push_back(',');
    out += std::to_string(id);
    first = false;
  }
  out.push_back('\n');
  for (const std::string& p : vocab.pieces()) {
    out += p;
    out.push_back('\n');
  }
  return out;
}

void save_vocab(const SubwordVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write vocab file " + path.string());
  out << serialize_vocab(vocab);
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace lrsum::text
