#include "lrsum/corpus.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <regex>
#include <unordered_set>

#include "lrsum/error.h"
#include "lrsum/text.h"

namespace lrsum::corpus {

using nlohmann::json;

std::string_view to_string(Source s) {
  switch (s) {
    case Source::kBbc:
      return "bbc";
    case Source::kDw:
      return "dw";
    case Source::kOther:
      break;
  }
  return "other";
}

Source parse_source(std::string_view s) {
  if (s == "bbc") return Source::kBbc;
  if (s == "dw") return Source::kDw;
  if (s == "other" || s.empty()) return Source::kOther;
  throw ValidationError("unknown source '" + std::string(s) + "'");
}

json to_json(const Record& r) {
  json j;
  j["id"] = r.id;
  j["source"] = to_string(r.source);
  j["url"] = r.url;
  j["title"] = r.title;
  j["article"] = r.article;
  j["summary"] = r.summary;
  return j;
}

namespace {

std::string padded_index(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%08zu", i);
  return buf;
}

std::string optional_string(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) {
    throw ValidationError(std::string("field '") + key + "' must be a string");
  }
  return it->get<std::string>();
}

std::string required_text(const json& obj, const char* key) {
  std::string value = optional_string(obj, key);
  if (!obj.contains(key)) {
    throw ValidationError(std::string("missing field '") + key + "'");
  }
  if (text::trim(value).empty()) {
    throw ValidationError(std::string("field '") + key + "' is empty");
  }
  return value;
}

}  // namespace

std::vector<Record> parse_records(std::istream& in) {
  std::vector<Record> records;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_index = 0;
  for (; std::getline(in, line); ++line_index) {
    if (text::trim(line).empty()) continue;
    const std::string where = "line " + std::to_string(line_index + 1) + ": ";
    Record rec;
    try {
      json obj = json::parse(line);
      if (!obj.is_object()) throw ValidationError("expected a JSON object");
      rec.id = optional_string(obj, "id");
      if (rec.id.empty()) rec.id = padded_index(line_index);
      rec.source = parse_source(optional_string(obj, "source"));
      rec.url = optional_string(obj, "url");
      rec.title = optional_string(obj, "title");
      rec.article = required_text(obj, "article");
      rec.summary = required_text(obj, "summary");
    } catch (const json::exception& e) {
      throw ValidationError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
    if (!ids.insert(rec.id).second) {
      throw ValidationError(where + "duplicate id '" + rec.id + "'");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<Record> read_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  try {
    return parse_records(in);
  } catch (const ValidationError& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

void write_records(std::ostream& out, const std::vector<Record>& records) {
  for (const Record& r : records) out << to_json(r).dump() << '\n';
}

std::vector<std::string> CleanOptions::default_caption_markers() {
  return {"تصویر کا ذریعہ", "تصویر کا کیپشن", "Image source", "Image caption",
          "[caption]"};
}

namespace {

const std::regex& url_start() {
  static const std::regex re(R"(([A-Za-z][A-Za-z0-9+.\-]*://)|([Ww][Ww][Ww]\.))");
  return re;
}

std::string strip_urls(std::string line) {
  std::smatch m;
  std::size_t from = 0;
  while (true) {
    auto begin = line.cbegin() + static_cast<std::ptrdiff_t>(from);
    if (!std::regex_search(begin, line.cend(), m, url_start())) break;
    const std::size_t start = from + static_cast<std::size_t>(m.position(0));
    std::size_t end = start;
    while (end < line.size()) {
      std::size_t len;
      if (text::is_space(text::decode_utf8(line, end, &len))) break;
      end += len;
    }
    line.erase(start, end - start);
    from = start;
  }
  return line;
}

std::string squeeze_spaces(std::string_view line) {
  std::string out;
  bool pending_space = false;
  std::size_t pos = 0;
  while (pos < line.size()) {
    std::size_t len;
    const char32_t cp = text::decode_utf8(line, pos, &len);
    if (text::is_space(cp)) {
      pending_space = !out.empty();
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.append(line.substr(pos, len));
    }
    pos += len;
  }
  return out;
}

}  // namespace

std::string clean_text(std::string_view raw, const CleanOptions& opts) {
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    std::size_t nl = raw.find('\n', pos);
    if (nl == std::string_view::npos) nl = raw.size();
    std::string line = squeeze_spaces(strip_urls(std::string(raw.substr(pos, nl - pos))));
    pos = nl + 1;
    const bool caption =
        std::any_of(opts.caption_markers.begin(), opts.caption_markers.end(),
                    [&](const std::string& m) {
                      return !m.empty() && line.starts_with(m);
                    });
    if (caption) continue;
    if (line.empty() && (lines.empty() || lines.back().empty())) continue;
    lines.push_back(std::move(line));
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out.push_back('\n');
    out += lines[i];
  }
  return out;
}

Tokenizer word_counter() {
  return [](std::string_view s) { return text::word_spans(s).size(); };
}

double compression_ratio(const Record& rec, const Tokenizer& tok) {
  const std::size_t article = tok(rec.article);
  if (article == 0) {
    throw ValidationError("record '" + rec.id + "': article has no tokens");
  }
  return 100.0 * static_cast<double>(tok(rec.summary)) /
         static_cast<double>(article);
}

FilterResult filter_corpus(const std::vector<Record>& records,
                           double max_ratio_pct, const Tokenizer& tok) {
  if (!(max_ratio_pct > 0)) {
    throw ValidationError("max ratio must be positive");
  }
  FilterResult result;
  for (const Record& r : records) {
    if (compression_ratio(r, tok) > max_ratio_pct) {
      result.removed.push_back(r);
    } else {
      result.kept.push_back(r);
    }
  }
  return result;
}

Summary summarize_values(std::vector<double> values) {
  if (values.empty()) throw ValidationError("no values to summarize");
  std::sort(values.begin(), values.end());
  Summary s;
  s.min = values.front();
  s.max = values.back();
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  s.median = values[(values.size() - 1) / 2];
  return s;
}

CorpusStats corpus_stats(const std::vector<Record>& records,
                         const Tokenizer& tok) {
  if (records.empty()) throw ValidationError("corpus is empty");
  std::vector<double> article, summary, ratio;
  for (const Record& r : records) {
    const std::size_t a = tok(r.article);
    const std::size_t s = tok(r.summary);
    if (a == 0) {
      throw ValidationError("record '" + r.id + "': article has no tokens");
    }
    article.push_back(static_cast<double>(a));
    summary.push_back(static_cast<double>(s));
    ratio.push_back(100.0 * static_cast<double>(s) / static_cast<double>(a));
  }
  CorpusStats st;
  st.count = records.size();
  st.article_tokens = summarize_values(std::move(article));
  st.summary_tokens = summarize_values(std::move(summary));
  st.compression_ratio_pct = summarize_values(std::move(ratio));
  return st;
}

namespace {

json summary_json(const Summary& s) {
  return {{"min", s.min}, {"max", s.max}, {"mean", s.mean}, {"median", s.median}};
}

}  // namespace

json to_json(const CorpusStats& s) {
  return {{"count", s.count},
          {"article_tokens", summary_json(s.article_tokens)},
          {"summary_tokens", summary_json(s.summary_tokens)},
          {"compression_ratio_pct", summary_json(s.compression_ratio_pct)}};
}

void print_stats_table(std::ostream& out, const CorpusStats& s) {
  out << "records: " << s.count << '\n';
  out << std::left << std::setw(24) << "" << std::right << std::setw(10)
      << "min" << std::setw(10) << "max" << std::setw(10) << "mean"
      << std::setw(10) << "median" << '\n';
  auto row = [&](const char* name, const Summary& v) {
    out << std::left << std::setw(24) << name << std::right << std::fixed
        << std::setprecision(2) << std::setw(10) << v.min << std::setw(10)
        << v.max << std::setw(10) << v.mean << std::setw(10) << v.median
        << '\n';
  };
  row("article tokens", s.article_tokens);
  row("summary tokens", s.summary_tokens);
  row("compression ratio (%)", s.compression_ratio_pct);
}

}  // namespace lrsum::corpus
