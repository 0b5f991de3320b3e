#include "lrsum/harness.h"

#include <algorithm>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "lrsum/error.h"

namespace lrsum::harness {

using nlohmann::json;

PairScores score_pair(const std::string& generated, const std::string& reference,
                      const embedding::Provider& provider, const MetricOptions& opts) {
  const metrics::Tokens cand = metrics::rouge_tokens(generated, opts.include_punct);
  const metrics::Tokens ref = metrics::rouge_tokens(reference, opts.include_punct);
  PairScores s;
  s.r1 = metrics::rouge_n(cand, ref, 1);
  s.r2 = metrics::rouge_n(cand, ref, 2);
  s.rl = metrics::rouge_l(cand, ref);
  s.embed = metrics::embed_score(cand, ref, provider);
  return s;
}

namespace {

struct TripleSum {
  double p = 0, r = 0, f = 0;

  void add(const ScoreTriple& t) {
    p += t.precision;
    r += t.recall;
    f += t.f1;
  }
  ScoreTriple mean(std::size_t n) const {
    const auto d = static_cast<double>(n);
    return {p / d, r / d, f / d};
  }
};

}  // namespace

EvalRow average(const std::vector<RecordScore>& per_record, std::string system,
                std::string dataset) {
  if (per_record.empty()) throw ValidationError("no scored pairs to average");
  TripleSum r1, r2, rl, embed;
  for (const RecordScore& r : per_record) {
    r1.add(r.scores.r1);
    r2.add(r.scores.r2);
    rl.add(r.scores.rl);
    embed.add(r.scores.embed);
  }
  const std::size_t n = per_record.size();
  return {std::move(system), std::move(dataset), r1.mean(n), r2.mean(n),
          rl.mean(n),        embed.mean(n),      n};
}

EvalResult run_extractive_eval(const std::vector<corpus::Record>& dataset,
                               const embedding::Provider& provider,
                               const text::SubwordVocab& vocab,
                               const ExtractiveEvalConfig& config) {
  if (dataset.empty()) throw ValidationError("evaluation dataset is empty");
  const extractive::Target target =
      config.target ? *config.target
                    : extractive::Target{extractive::TargetRatio{
                          corpus::corpus_stats(dataset).compression_ratio_pct.mean / 100.0}};

  EvalResult result;
  for (const corpus::Record& rec : dataset) {
    try {
      const extractive::ExtractiveSummary summary =
          extractive::summarize_extractive(rec.article, target, provider, vocab, config.seed);
      RecordScore rs;
      rs.id = rec.id;
      rs.reference = rec.summary;
      rs.generated = summary.text;
      rs.selected = summary.selected;
      rs.k = summary.k_used;
      rs.scores = score_pair(summary.text, rec.summary, provider, config.metric);
      result.per_record.push_back(std::move(rs));
    } catch (const IoError& e) {
      throw IoError("record '" + rec.id + "': " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("record '" + rec.id + "': " + e.what());
    }
  }
  result.row = average(result.per_record, config.system, config.dataset);
  return result;
}

std::vector<TextPair> parse_pairs(std::istream& in) {
  std::vector<TextPair> pairs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      TextPair p;
      p.id = j.value("id", std::to_string(pairs.size()));
      p.reference = j.at("reference").get<std::string>();
      p.generated = j.at("generated").get<std::string>();
      pairs.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw ValidationError("pairs line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return pairs;
}

EvalResult score_pairs(const std::vector<TextPair>& pairs,
                       const embedding::Provider& provider, std::string system,
                       std::string dataset, const MetricOptions& opts) {
  if (pairs.empty()) throw ValidationError("no pairs to score");
  EvalResult result;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const TextPair& p = pairs[i];
    if (text::trim(p.reference).empty() || text::trim(p.generated).empty()) {
      throw ValidationError("pair " + std::to_string(i) + " has an empty member");
    }
    RecordScore rs;
    rs.id = p.id;
    rs.reference = p.reference;
    rs.generated = p.generated;
    try {
      rs.scores = score_pair(p.generated, p.reference, provider, opts);
    } catch (const IoError& e) {
      throw IoError("pair " + std::to_string(i) + ": " + e.what());
    } catch (const std::exception& e) {
      throw ValidationError("pair " + std::to_string(i) + ": " + e.what());
    }
    result.per_record.push_back(std::move(rs));
  }
  result.row = average(result.per_record, std::move(system), std::move(dataset));
  return result;
}

json to_json(const EvalRow& row) {
  return {{"system", row.system},
          {"dataset", row.dataset},
          {"n", row.n},
          {"r1", metrics::to_json(row.r1)},
          {"r2", metrics::to_json(row.r2)},
          {"rl", metrics::to_json(row.rl)},
          {"embed", metrics::to_json(row.embed)}};
}

EvalRow eval_row_from_json(const json& j) {
  EvalRow row;
  row.system = j.at("system").get<std::string>();
  row.dataset = j.at("dataset").get<std::string>();
  row.n = j.at("n").get<std::size_t>();
  row.r1 = metrics::triple_from_json(j.at("r1"));
  row.r2 = metrics::triple_from_json(j.at("r2"));
  row.rl = metrics::triple_from_json(j.at("rl"));
  row.embed = metrics::triple_from_json(j.at("embed"));
  return row;
}

json to_json(const RecordScore& r, const EvalRow& row) {
  json j = {{"id", r.id},
            {"system", row.system},
            {"dataset", row.dataset},
            {"r1", metrics::to_json(r.scores.r1)},
            {"r2", metrics::to_json(r.scores.r2)},
            {"rl", metrics::to_json(r.scores.rl)},
            {"embed", metrics::to_json(r.scores.embed)},
            {"reference", r.reference},
            {"generated", r.generated}};
  if (r.k > 0) {
    j["selected_indices"] = r.selected;
    j["k"] = r.k;
  }
  return j;
}

std::string serialize_row(const EvalRow& row) { return to_json(row).dump(2) + "\n"; }

void write_per_record(std::ostream& out, const EvalResult& result) {
  for (const RecordScore& r : result.per_record) out << to_json(r, result.row).dump() << '\n';
}

json to_json(const HumanScore& s) {
  return {{"annotator", s.annotator}, {"summary_id", s.summary_id},
          {"system", s.system},       {"accuracy", s.accuracy},
          {"coherence", s.coherence}, {"timestamp", s.timestamp}};
}

namespace {

int rating(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_number_integer()) {
    throw ValidationError(std::string(field) + ": expected an integer 0-5");
  }
  const auto v = it->get<long long>();
  if (v < 0 || v > 5) {
    throw ValidationError(std::string(field) + ": " + std::to_string(v) +
                          " is outside 0-5");
  }
  return static_cast<int>(v);
}

std::string required_string(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
    throw ValidationError(std::string(field) + ": expected a non-empty string");
  }
  return it->get<std::string>();
}

}  // namespace

HumanScore human_score_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("score must be a JSON object");
  HumanScore s;
  s.annotator = required_string(j, "annotator");
  s.summary_id = required_string(j, "summary_id");
  s.system = required_string(j, "system");
  s.accuracy = rating(j, "accuracy");
  s.coherence = rating(j, "coherence");
  s.timestamp = j.value("timestamp", "");
  return s;
}

std::vector<HumanScore> read_scores(std::istream& in) {
  std::vector<HumanScore> scores;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      scores.push_back(human_score_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError("scores line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return scores;
}

std::vector<AutoScore> read_auto_scores(std::istream& in) {
  std::vector<AutoScore> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      out.push_back({j.at("id").get<std::string>(), j.at("system").get<std::string>(),
                     j.at("r1").at("f").get<double>(), j.at("embed").at("f").get<double>()});
    } catch (const json::exception& e) {
      throw ValidationError("per-record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

HumanReport aggregate_human_eval(const std::vector<HumanScore>& scores,
                                 const std::vector<AutoScore>& automatic) {
  using Key = std::pair<std::string, std::string>;  // (summary_id, system)
  struct Acc {
    long long accuracy = 0, coherence = 0;
    std::size_t n = 0;
  };
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  std::map<Key, Acc> per_item;
  std::vector<Key> order;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const HumanScore& s = scores[i];
    const std::string where = "score " + std::to_string(i) + " (" + s.annotator + ", " +
                              s.summary_id + ", " + s.system + "): ";
    if (s.accuracy < 0 || s.accuracy > 5 || s.coherence < 0 || s.coherence > 5) {
      throw ValidationError(where + "rating outside 0-5");
    }
    if (!seen.emplace(s.annotator, s.summary_id, s.system).second) {
      throw ValidationError(where + "duplicate submission");
    }
    Key key{s.summary_id, s.system};
    auto [it, inserted] = per_item.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second.accuracy += s.accuracy;
    it->second.coherence += s.coherence;
    ++it->second.n;
  }

  std::map<Key, const AutoScore*> auto_index;
  for (const AutoScore& a : automatic) auto_index[{a.summary_id, a.system}] = &a;

  HumanReport report;
  std::map<std::string, std::pair<TripleSum, std::size_t>> per_system;
  std::vector<std::string> system_order;
  for (const Key& key : order) {
    const Acc& acc = per_item[key];
    const auto n = static_cast<double>(acc.n);
    HumanItem item{key.first, key.second, static_cast<double>(acc.accuracy) / n,
                   static_cast<double>(acc.coherence) / n, acc.n};
    report.items.push_back(item);

    auto [sit, inserted] = per_system.try_emplace(key.second);
    if (inserted) system_order.push_back(key.second);
    sit->second.first.add({item.accuracy, item.coherence, 0});
    ++sit->second.second;

    ComparisonRow row{key.first, key.second, std::nullopt, std::nullopt, item.accuracy,
                      item.coherence};
    if (auto it = auto_index.find(key); it != auto_index.end()) {
      row.r1_f = it->second->r1_f;
      row.embed_f = it->second->embed_f;
    }
    report.comparison.push_back(row);
  }
  for (const std::string& name : system_order) {
    const auto& [sum, count] = per_system[name];
    const ScoreTriple mean = sum.mean(count);
    report.systems.push_back({name, mean.precision, mean.recall, count});
  }
  return report;
}

json to_json(const HumanReport& r) {
  json items = json::array(), systems = json::array(), comparison = json::array();
  for (const HumanItem& i : r.items) {
    items.push_back({{"summary_id", i.summary_id},
                     {"system", i.system},
                     {"accuracy", i.accuracy},
                     {"coherence", i.coherence},
                     {"annotators", i.annotators}});
  }
  for (const HumanSystem& s : r.systems) {
    systems.push_back({{"system", s.system},
                       {"accuracy", s.accuracy},
                       {"coherence", s.coherence},
                       {"summaries", s.summaries}});
  }
  for (const ComparisonRow& c : r.comparison) {
    json row = {{"summary_id", c.summary_id},
                {"system", c.system},
                {"human_accuracy", c.accuracy},
                {"human_coherence", c.coherence}};
    row["rouge1_f"] = c.r1_f ? json(*c.r1_f) : json(nullptr);
    row["embed_f"] = c.embed_f ? json(*c.embed_f) : json(nullptr);
    comparison.push_back(std::move(row));
  }
  return {{"items", items}, {"systems", systems}, {"comparison", comparison}};
}

void print_report(std::ostream& out, const HumanReport& r) {
  out << std::left << std::setw(20) << "system" << std::right << std::setw(10) << "accuracy"
      << std::setw(11) << "coherence" << std::setw(11) << "summaries" << '\n';
  for (const HumanSystem& s : r.systems) {
    out << std::left << std::setw(20) << s.system << std::right << std::fixed
        << std::setprecision(2) << std::setw(10) << s.accuracy << std::setw(11)
        << s.coherence << std::setw(11) << s.summaries << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const HumanReport& r) {
  auto field = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return q + "\"";
  };
  auto num = [](std::optional<double> v) {
    if (!v) return std::string();
    std::ostringstream os;
    os << std::setprecision(17) << *v;
    return os.str();
  };
  out << "summary_id,system,rouge1_f,embed_f,human_accuracy,human_coherence\n";
  for (const ComparisonRow& c : r.comparison) {
    out << field(c.summary_id) << ',' << field(c.system) << ',' << num(c.r1_f) << ','
        << num(c.embed_f) << ',' << num(c.accuracy) << ',' << num(c.coherence) << '\n';
  }
}

std::vector<std::string> stratified_ids(const std::vector<RecordScore>& per_record,
                                        std::size_t count) {
  std::vector<const RecordScore*> ranked;
  for (const RecordScore& r : per_record) ranked.push_back(&r);
  std::stable_sort(ranked.begin(), ranked.end(), [](const RecordScore* a, const RecordScore* b) {
    return a->scores.r1.f1 > b->scores.r1.f1;
  });
  std::vector<std::string> out;
  const std::size_t n = ranked.size();
  if (count == 0 || n == 0) return out;
  if (count >= n) {
    for (const RecordScore* r : ranked) out.push_back(r->id);
    return out;
  }
  if (count == 1) return {ranked.front()->id};
  for (std::size_t i = 0; i < count; ++i) {
    // evenly spaced ranks from best (0) to worst (n - 1), rounded down
    out.push_back(ranked[i * (n - 1) / (count - 1)]->id);
  }
  return out;
}

}  // namespace lrsum::harness
