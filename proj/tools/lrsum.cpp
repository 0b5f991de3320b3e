// Command-line front end: ingest, stats, truncate, summarize, score,
// trim-vocab, evaluate, annotate-serve and friends.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error.

#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "lrsum/annotation.h"
#include "lrsum/corpus.h"
#include "lrsum/embedding.h"
#include "lrsum/error.h"
#include "lrsum/extractive.h"
#include "lrsum/harness.h"
#include "lrsum/text.h"
#include "lrsum/truncation.h"
#include "lrsum/vocab_adapt.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace lrsum;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return in;
}

void write_file(const std::string& path, const std::string& contents) {
  std::ofstream out = open_out(path);
  out << contents;
  if (!out) throw IoError("write failed for " + path);
}

std::vector<corpus::Record> read_all(const std::vector<std::string>& paths) {
  std::vector<corpus::Record> all;
  std::map<std::string, std::string> origin;
  for (const std::string& p : paths) {
    for (corpus::Record& r : corpus::read_records(p)) {
      auto [it, inserted] = origin.emplace(r.id, p);
      if (!inserted) {
        throw ValidationError("duplicate id '" + r.id + "' in " + p + " and " + it->second);
      }
      all.push_back(std::move(r));
    }
  }
  return all;
}

std::shared_ptr<const text::SubwordVocab> vocab_or_null(const std::string& path) {
  if (path.empty()) return nullptr;
  return std::make_shared<const text::SubwordVocab>(text::load_vocab(path));
}

struct ProviderArgs {
  std::string spec = "onehot";
  std::string cache;
};

void add_provider_options(CLI::App* cmd, ProviderArgs& args) {
  cmd->add_option("--provider", args.spec,
                  "onehot | store:<file> | remote:<url>")
      ->capture_default_str();
  cmd->add_option("--cache", args.cache, "Embedding cache file for remote providers");
}

std::unique_ptr<embedding::Provider> make_provider(
    const ProviderArgs& args, std::shared_ptr<const text::SubwordVocab> vocab) {
  const std::string& spec = args.spec;
  if (spec == "onehot") {
    if (!vocab) throw ValidationError("--provider onehot needs --vocab");
    return embedding::onehot_provider(std::move(vocab));
  }
  if (spec.starts_with("store:")) {
    const std::string path = spec.substr(6);
    return std::make_unique<embedding::StoreProvider>(spec, embedding::load_store(path));
  }
  if (spec.starts_with("remote:")) {
    embedding::RemoteConfig cfg;
    cfg.endpoint = spec.substr(7);
    cfg.name = spec;
    if (!args.cache.empty()) cfg.cache_path = args.cache;
    return embedding::remote_provider(std::move(cfg));
  }
  throw ValidationError("unknown provider '" + spec + "'");
}

std::optional<extractive::Target> target_from(const std::optional<double>& ratio,
                                              const std::optional<long long>& tokens) {
  if (ratio && tokens) throw ValidationError("give --target-ratio or --target-tokens, not both");
  if (ratio) return extractive::Target{extractive::TargetRatio{*ratio}};
  if (tokens) return extractive::Target{extractive::TargetTokens{*tokens}};
  return std::nullopt;
}

// --- ingest -----------------------------------------------------------------

struct IngestArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string removed;
  double max_ratio = 50.0;
  std::vector<std::string> markers;
  bool no_clean = false;
};

void run_ingest(const IngestArgs& a) {
  corpus::CleanOptions opts;
  if (!a.markers.empty()) opts.caption_markers = a.markers;
  std::vector<corpus::Record> cleaned;
  std::size_t emptied = 0;
  for (corpus::Record& r : read_all(a.inputs)) {
    if (!a.no_clean) {
      r.title = corpus::clean_text(r.title, opts);
      r.article = corpus::clean_text(r.article, opts);
      r.summary = corpus::clean_text(r.summary, opts);
    }
    if (r.article.empty() || r.summary.empty()) {
      ++emptied;
      continue;
    }
    cleaned.push_back(std::move(r));
  }
  const corpus::FilterResult f = corpus::filter_corpus(cleaned, a.max_ratio);
  std::ofstream out = open_out(a.out);
  corpus::write_records(out, f.kept);
  if (!a.removed.empty()) {
    std::ofstream rem = open_out(a.removed);
    corpus::write_records(rem, f.removed);
  }
  std::cerr << "kept " << f.kept.size() << ", removed " << f.removed.size()
            << " above " << a.max_ratio << "% compression, dropped " << emptied
            << " empty after cleaning\n";
}

// --- stats ------------------------------------------------------------------

void run_stats(const std::vector<std::string>& inputs, const std::string& json_out) {
  const corpus::CorpusStats st = corpus::corpus_stats(read_all(inputs));
  corpus::print_stats_table(std::cout, st);
  if (!json_out.empty()) write_file(json_out, corpus::to_json(st).dump(2) + "\n");
}

// --- truncate ---------------------------------------------------------------

struct TruncateArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string audit;
  std::string vocab;
  std::size_t budget = 512;
  std::string unit = "subword";
};

void run_truncate(const TruncateArgs& a) {
  truncation::TruncateOptions opts;
  opts.budget = a.budget;
  opts.unit = a.unit == "word" ? truncation::BudgetUnit::kWord : truncation::BudgetUnit::kSubword;
  auto vocab = vocab_or_null(a.vocab);
  if (opts.unit == truncation::BudgetUnit::kSubword && !vocab) {
    throw ValidationError("--unit subword needs --vocab");
  }
  std::vector<corpus::Record> records = read_all(a.inputs);
  std::ofstream audit;
  if (!a.audit.empty()) audit = open_out(a.audit);
  std::size_t changed = 0;
  for (corpus::Record& r : records) {
    truncation::TruncatedArticle t;
    try {
      t = truncation::truncate_article(r.article, r.summary, vocab.get(), opts);
    } catch (const ValidationError& e) {
      throw ValidationError("record '" + r.id + "': " + e.what());
    }
    if (!t.removed.empty() || t.hard_cut) ++changed;
    r.article = t.text();
    if (audit.is_open()) audit << truncation::audit_json(r.id, t).dump() << '\n';
  }
  std::ofstream out = open_out(a.out);
  corpus::write_records(out, records);
  std::cerr << "truncated " << changed << " of " << records.size() << " articles to "
            << a.budget << " " << a.unit << " tokens\n";
}

// --- summarize --------------------------------------------------------------

struct SummarizeArgs {
  std::vector<std::string> inputs;
  std::string out;
  std::string mode = "extractive";
  ProviderArgs provider;
  std::string vocab;
  std::optional<double> target_ratio;
  std::optional<long long> target_tokens;
  std::uint64_t seed = 7;
};

void run_summarize(const SummarizeArgs& a) {
  if (a.mode != "extractive") throw ValidationError("only --mode extractive is supported");
  auto vocab = vocab_or_null(a.vocab);
  if (!vocab) throw ValidationError("summarize needs --vocab");
  auto provider = make_provider(a.provider, vocab);
  const std::vector<corpus::Record> records = read_all(a.inputs);
  if (records.empty()) throw ValidationError("no records to summarize");
  extractive::Target target =
      target_from(a.target_ratio, a.target_tokens)
          .value_or(extractive::Target{extractive::TargetRatio{
              corpus::corpus_stats(records).compression_ratio_pct.mean / 100.0}});
  std::ofstream out = open_out(a.out);
  for (const corpus::Record& r : records) {
    extractive::ExtractiveSummary s;
    try {
      s = extractive::summarize_extractive(r.article, target, *provider, *vocab, a.seed);
    } catch (const IoError& e) {
      throw IoError("record '" + r.id + "': " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError("record '" + r.id + "': " + e.what());
    }
    out << json{{"id", r.id}, {"summary", s.text}, {"selected_indices", s.selected},
                {"k", s.k_used}}
               .dump()
        << '\n';
  }
}

// --- score / evaluate -------------------------------------------------------

struct EvalArgs {
  std::vector<std::string> inputs;
  std::string pairs;
  ProviderArgs provider;
  std::string vocab;
  std::string system;
  std::string dataset = "dataset";
  std::string out;
  std::string per_record;
  std::optional<double> target_ratio;
  std::optional<long long> target_tokens;
  std::uint64_t seed = 7;
  bool include_punct = false;
};

void emit_result(const EvalArgs& a, const harness::EvalResult& result) {
  const std::string row = harness::serialize_row(result.row);
  if (a.out.empty()) {
    std::cout << row;
  } else {
    write_file(a.out, row);
  }
  if (!a.per_record.empty()) {
    std::ofstream pr = open_out(a.per_record);
    harness::write_per_record(pr, result);
  }
}

void run_score(const EvalArgs& a) {
  auto vocab = vocab_or_null(a.vocab);
  auto provider = make_provider(a.provider, vocab);
  std::ifstream in = open_in(a.pairs);
  const std::vector<harness::TextPair> pairs = harness::parse_pairs(in);
  harness::MetricOptions m{a.include_punct};
  emit_result(a, harness::score_pairs(pairs, *provider, a.system.empty() ? "generated" : a.system,
                                      a.dataset, m));
}

void run_evaluate(const EvalArgs& a) {
  auto vocab = vocab_or_null(a.vocab);
  if (!vocab) throw ValidationError("evaluate needs --vocab");
  auto provider = make_provider(a.provider, vocab);
  harness::ExtractiveEvalConfig cfg;
  cfg.system = a.system.empty() ? "extractive-" + provider->name() : a.system;
  cfg.dataset = a.dataset;
  cfg.target = target_from(a.target_ratio, a.target_tokens);
  cfg.seed = a.seed;
  cfg.metric.include_punct = a.include_punct;
  emit_result(a, harness::run_extractive_eval(read_all(a.inputs), *provider, *vocab, cfg));
}

// --- trim-vocab -------------------------------------------------------------

struct TrimArgs {
  std::vector<std::string> corpus;
  std::string vocab;
  std::string embeddings;
  std::size_t target = 40000;
  std::string out_dir = ".";
};

void run_trim(const TrimArgs& a) {
  const text::SubwordVocab source = text::load_vocab(a.vocab);
  const embedding::EmbeddingStore store = embedding::load_store(a.embeddings);
  const vocab_adapt::Matrix matrix = vocab_adapt::matrix_from_store(store, source.size());

  const vocab_adapt::FreqTable freqs =
      vocab_adapt::count_frequencies(read_all(a.corpus), source);
  const vocab_adapt::SelectResult sel = vocab_adapt::select_vocabulary(freqs, source, a.target);
  if (sel.clamped) {
    std::cerr << "warning: target " << a.target << " exceeds vocabulary size " << source.size()
              << "; keeping every piece\n";
  }
  const vocab_adapt::Matrix pruned =
      vocab_adapt::prune_embeddings(matrix, sel.map, source.size());

  fs::create_directories(a.out_dir);
  const fs::path dir(a.out_dir);
  text::save_vocab(sel.map.new_vocab, dir / "vocab.txt");
  embedding::save_store(vocab_adapt::store_from_matrix(pruned), dir / "embeddings.embv");
  {
    std::ofstream remap = open_out((dir / "remap.tsv").string());
    vocab_adapt::write_remap(remap, sel.map);
  }
  const vocab_adapt::SizeReport report = vocab_adapt::size_report(
      {source.size(), fs::file_size(a.embeddings)},
      {pruned.rows, fs::file_size(dir / "embeddings.embv")});
  const std::string report_json = vocab_adapt::to_json(report).dump(2) + "\n";
  write_file((dir / "size_report.json").string(), report_json);
  std::cout << report_json;
}

// --- annotation -------------------------------------------------------------

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::uint64_t seed = 0;
  std::string sample;
  std::string scores = "scores.jsonl";
  std::string ui_dir;
};

void run_serve(const ServeArgs& a) {
  std::ifstream in = open_in(a.sample);
  auto service = std::make_shared<annotation::AnnotationService>(annotation::read_sample(in),
                                                                 a.seed, a.scores);
  annotation::AnnotationServer server(service, a.ui_dir);
  std::cerr << "serving " << service->task_count() << " tasks per annotator on http://"
            << a.host << ":" << a.port << "\n";
  server.listen(a.host, a.port);
}

struct SampleArgs {
  std::vector<std::string> per_record;
  std::size_t count = 20;
  std::string out;
};

// Builds an annotation sample from per-record outputs of several systems. Ids
// are stratified over the first file's ROUGE-1 ranking.
void run_make_sample(const SampleArgs& a) {
  struct Output {
    std::string system, reference, generated;
  };
  std::vector<harness::RecordScore> first;
  std::map<std::string, std::vector<Output>> by_id;
  for (std::size_t f = 0; f < a.per_record.size(); ++f) {
    std::ifstream in = open_in(a.per_record[f]);
    std::string line;
    while (std::getline(in, line)) {
      if (text::trim(line).empty()) continue;
      json j = json::parse(line, nullptr, false);
      if (j.is_discarded()) throw ValidationError(a.per_record[f] + ": malformed line");
      const std::string id = j.at("id").get<std::string>();
      by_id[id].push_back({j.at("system").get<std::string>(), j.at("reference").get<std::string>(),
                           j.at("generated").get<std::string>()});
      if (f == 0) {
        harness::RecordScore rs;
        rs.id = id;
        rs.scores.r1 = metrics::triple_from_json(j.at("r1"));
        first.push_back(std::move(rs));
      }
    }
  }
  std::ofstream out = open_out(a.out);
  for (const std::string& id : harness::stratified_ids(first, a.count)) {
    const auto& outputs = by_id[id];
    json cands = json::array();
    for (const Output& o : outputs) cands.push_back({{"system", o.system}, {"text", o.generated}});
    out << json{{"summary_id", id}, {"reference", outputs.front().reference},
                {"candidates", cands}}
               .dump()
        << '\n';
  }
}

struct AggregateArgs {
  std::string scores;
  std::vector<std::string> automatic;
  std::string out;
  std::string csv;
};

void run_aggregate(const AggregateArgs& a) {
  std::ifstream in = open_in(a.scores);
  const std::vector<harness::HumanScore> scores = harness::read_scores(in);
  std::vector<harness::AutoScore> automatic;
  for (const std::string& p : a.automatic) {
    std::ifstream ain = open_in(p);
    for (auto& s : harness::read_auto_scores(ain)) automatic.push_back(std::move(s));
  }
  const harness::HumanReport report = harness::aggregate_human_eval(scores, automatic);
  harness::print_report(std::cout, report);
  if (!a.out.empty()) write_file(a.out, harness::to_json(report).dump(2) + "\n");
  if (!a.csv.empty()) {
    std::ofstream csv = open_out(a.csv);
    harness::write_comparison_csv(csv, report);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low-resource summarization toolkit"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Clean records and drop high compression ratios");
  c_ingest->add_option("--in", ingest.inputs, "Record files (.jsonl)")->required();
  c_ingest->add_option("--out", ingest.out, "Kept records")->required();
  c_ingest->add_option("--removed", ingest.removed, "Records removed by the ratio filter");
  c_ingest->add_option("--max-ratio", ingest.max_ratio, "Maximum compression ratio (%)")
      ->capture_default_str();
  c_ingest->add_option("--caption-marker", ingest.markers, "Caption line prefixes (replaces defaults)");
  c_ingest->add_flag("--no-clean", ingest.no_clean, "Skip text cleaning");

  std::vector<std::string> stats_in;
  std::string stats_json;
  auto* c_stats = app.add_subcommand("stats", "Token and compression-ratio statistics");
  c_stats->add_option("--in", stats_in, "Record files")->required();
  c_stats->add_option("--json", stats_json, "Also write statistics as JSON");

  TruncateArgs trunc;
  auto* c_trunc = app.add_subcommand("truncate", "Recall-guided paragraph truncation");
  c_trunc->add_option("--in", trunc.inputs, "Record files")->required();
  c_trunc->add_option("--out", trunc.out, "Truncated records")->required();
  c_trunc->add_option("--audit", trunc.audit, "Per-record removal audit (.jsonl)");
  c_trunc->add_option("--vocab", trunc.vocab, "Subword vocabulary");
  c_trunc->add_option("--budget", trunc.budget, "Token budget")->capture_default_str();
  c_trunc->add_option("--unit", trunc.unit, "subword | word")
      ->check(CLI::IsMember({"subword", "word"}))
      ->capture_default_str();

  SummarizeArgs summ;
  auto* c_summ = app.add_subcommand("summarize", "Cluster-based extractive summaries");
  c_summ->add_option("--in", summ.inputs, "Record files")->required();
  c_summ->add_option("--out", summ.out, "Summaries (.jsonl)")->required();
  c_summ->add_option("--mode", summ.mode)->check(CLI::IsMember({"extractive"}))->capture_default_str();
  add_provider_options(c_summ, summ.provider);
  c_summ->add_option("--vocab", summ.vocab, "Subword vocabulary")->required();
  c_summ->add_option("--target-ratio", summ.target_ratio, "Summary/article token ratio");
  c_summ->add_option("--target-tokens", summ.target_tokens, "Summary length in subword tokens");
  c_summ->add_option("--seed", summ.seed)->capture_default_str();

  EvalArgs score;
  auto* c_score = app.add_subcommand("score", "Score generated summaries against references");
  c_score->add_option("--pairs", score.pairs, "{reference, generated} lines")->required();
  add_provider_options(c_score, score.provider);
  c_score->add_option("--vocab", score.vocab, "Subword vocabulary (onehot provider)");
  c_score->add_option("--system", score.system, "System name");
  c_score->add_option("--dataset", score.dataset)->capture_default_str();
  c_score->add_option("--out", score.out, "EvalRow JSON (default stdout)");
  c_score->add_option("--per-record", score.per_record, "Per-pair scores (.jsonl)");
  c_score->add_flag("--include-punct", score.include_punct, "Keep punctuation tokens in ROUGE");

  EvalArgs eval;
  auto* c_eval = app.add_subcommand("evaluate", "Run and score extractive summarization");
  c_eval->add_option("--in", eval.inputs, "Record files")->required();
  add_provider_options(c_eval, eval.provider);
  c_eval->add_option("--vocab", eval.vocab, "Subword vocabulary")->required();
  c_eval->add_option("--system", eval.system, "System name");
  c_eval->add_option("--dataset", eval.dataset)->capture_default_str();
  c_eval->add_option("--target-ratio", eval.target_ratio);
  c_eval->add_option("--target-tokens", eval.target_tokens);
  c_eval->add_option("--seed", eval.seed)->capture_default_str();
  c_eval->add_option("--out", eval.out, "EvalRow JSON (default stdout)");
  c_eval->add_option("--per-record", eval.per_record, "Per-record scores (.jsonl)");
  c_eval->add_flag("--include-punct", eval.include_punct);

  TrimArgs trim;
  auto* c_trim = app.add_subcommand("trim-vocab", "Prune vocabulary and embedding rows");
  c_trim->add_option("--corpus", trim.corpus, "Record files used for counting")->required();
  c_trim->add_option("--vocab", trim.vocab, "Source vocabulary")->required();
  c_trim->add_option("--embeddings", trim.embeddings, "Source store keyed by piece id")->required();
  c_trim->add_option("--target", trim.target)->capture_default_str();
  c_trim->add_option("--out-dir", trim.out_dir)->capture_default_str();

  vocab_adapt::MatrixMeta before, after;
  auto* c_size = app.add_subcommand("size-report", "Size report from row/byte metadata");
  c_size->add_option("--rows-before", before.rows)->required();
  c_size->add_option("--rows-after", after.rows)->required();
  c_size->add_option("--bytes-before", before.bytes)->required();
  c_size->add_option("--bytes-after", after.bytes)->required();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("annotate-serve", "Blind human-evaluation service");
  c_serve->add_option("--host", serve.host)->capture_default_str();
  c_serve->add_option("--port", serve.port)->capture_default_str();
  c_serve->add_option("--seed", serve.seed, "Session seed for blinding")->capture_default_str();
  c_serve->add_option("--sample", serve.sample, "Annotation sample (.jsonl)")->required();
  c_serve->add_option("--scores", serve.scores, "Append-only score log")->capture_default_str();
  c_serve->add_option("--ui-dir", serve.ui_dir, "Built annotator UI assets");

  SampleArgs sample;
  auto* c_sample = app.add_subcommand("make-sample", "Stratified annotation sample");
  c_sample->add_option("--per-record", sample.per_record, "Per-record score files, one per system")
      ->required();
  c_sample->add_option("--count", sample.count)->capture_default_str();
  c_sample->add_option("--out", sample.out)->required();

  AggregateArgs agg;
  auto* c_agg = app.add_subcommand("aggregate", "Aggregate human scores");
  c_agg->add_option("--scores", agg.scores, "Score log")->required();
  c_agg->add_option("--auto", agg.automatic, "Per-record automatic scores to join");
  c_agg->add_option("--out", agg.out, "Report JSON");
  c_agg->add_option("--csv", agg.csv, "Comparison matrix CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*c_ingest) run_ingest(ingest);
    else if (*c_stats) run_stats(stats_in, stats_json);
    else if (*c_trunc) run_truncate(trunc);
    else if (*c_summ) run_summarize(summ);
    else if (*c_score) run_score(score);
    else if (*c_eval) run_evaluate(eval);
    else if (*c_trim) run_trim(trim);
    else if (*c_size) std::cout << vocab_adapt::to_json(vocab_adapt::size_report(before, after)).dump(2) << '\n';
    else if (*c_serve) run_serve(serve);
    else if (*c_sample) run_make_sample(sample);
    else if (*c_agg) run_aggregate(agg);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
