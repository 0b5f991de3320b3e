#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "lrsum/annotation.h"
#include "lrsum/error.h"
#include "lrsum/harness.h"
#include "oracles.h"

using namespace lrsum;
using namespace lrsum::annotation;
using nlohmann::json;

namespace {

const std::vector<std::string> kSystems = {"sys-alpha", "sys-beta", "sys-gamma"};

std::vector<SampleItem> sample() {
  std::vector<SampleItem> items;
  for (int i = 0; i < 3; ++i) {
    SampleItem item{"s" + std::to_string(i), "حوالہ " + std::to_string(i), {}};
    for (std::size_t s = 0; s < kSystems.size(); ++s) {
      item.candidates.push_back({kSystems[s], "خلاصہ " + std::to_string(i * 10 + s)});
    }
    items.push_back(item);
  }
  return items;
}

std::string body(const std::string& annotator, const std::string& id, const std::string& token,
                 json acc = 4, json coh = 3) {
  return json{{"annotator", annotator}, {"summary_id", id}, {"token", token},
              {"accuracy", acc},        {"coherence", coh}}
      .dump();
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) n += !line.empty();
  return n;
}

bool mentions_system(const std::string& s) {
  for (const auto& sys : kSystems) {
    if (s.find(sys) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("read_sample") {
  std::istringstream in(
      R"({"summary_id":"a","reference":"r","candidates":[{"system":"x","text":"t"}]})" "\n");
  const auto items = read_sample(in);
  REQUIRE(items.size() == 1);
  CHECK(items[0].candidates[0].system == "x");
  std::istringstream bad(R"({"summary_id":"a"})");
  CHECK_THROWS_AS(read_sample(bad), ValidationError);
}

TEST_CASE("blinded_order is a per-annotator stable permutation") {
  const auto a1 = blinded_order("alice", "s0", 9, 6);
  CHECK(a1 == blinded_order("alice", "s0", 9, 6));
  std::vector<std::size_t> sorted = a1;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3, 4, 5});

  // Replaying the documented shuffle by hand.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::string_view bytes) {
    for (char c : bytes) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
  };
  const std::uint64_t seed = 9;
  mix(std::string_view(reinterpret_cast<const char*>(&seed), 8));
  mix("alice");
  mix(std::string_view("\x1f", 1));
  mix("s0");
  std::mt19937_64 rng(h);
  std::vector<std::size_t> expect = {0, 1, 2, 3, 4, 5};
  for (std::size_t i = 6; i > 1; --i) std::swap(expect[i - 1], expect[rng() % i]);
  CHECK(a1 == expect);

  int differing = 0;
  for (int i = 0; i < 20; ++i) {
    const std::string id = "s" + std::to_string(i);
    differing += blinded_order("alice", id, 9, 6) != blinded_order("bob", id, 9, 6);
  }
  CHECK(differing > 10);
}

TEST_CASE("service: submissions, validation and duplicates") {
  const auto dir = oracle::scratch_dir("annotation_service");
  const auto log = dir / "scores.jsonl";
  AnnotationService svc(sample(), 5, log);
  CHECK(svc.task_count() == 9);

  const Response tasks = svc.tasks("alice");
  CHECK(tasks.status == 200);
  CHECK(tasks.body.at("tasks").size() == 9);
  CHECK_FALSE(mentions_system(tasks.body.dump()));
  CHECK(svc.tasks("").status == 400);

  const std::string token = svc.token_for("s1", "sys-beta");
  const Response ok = svc.submit(body("alice", "s1", token));
  CHECK(ok.status == 200);
  CHECK(line_count(log) == 1);
  std::ifstream in(log);
  const auto stored = harness::read_scores(in);
  REQUIRE(stored.size() == 1);
  CHECK(stored[0].annotator == "alice");
  CHECK(stored[0].system == "sys-beta");
  CHECK(stored[0].accuracy == 4);
  CHECK(stored[0].coherence == 3);
  CHECK_FALSE(stored[0].timestamp.empty());

  const Response dup = svc.submit(body("alice", "s1", token, 1, 1));
  CHECK(dup.status == 409);
  CHECK(line_count(log) == 1);

  const Response high = svc.submit(body("alice", "s1", svc.token_for("s1", "sys-alpha"), 9));
  CHECK(high.status == 400);
  CHECK(high.body.at("errors").contains("accuracy"));
  CHECK(svc.submit(body("alice", "s1", token, "4")).status == 400);
  CHECK(svc.submit(body("alice", "s1", token, 4.5)).status == 400);
  CHECK(svc.submit(body("alice", "s2", token)).body.at("errors").contains("token"));
  CHECK(svc.submit(body("alice", "nope", token)).body.at("errors").contains("summary_id"));
  CHECK(svc.submit(body("", "s1", token)).body.at("errors").contains("annotator"));
  CHECK(svc.submit("not json").status == 400);
  CHECK(line_count(log) == 1);
  CHECK_FALSE(mentions_system(high.body.dump()));

  const Response progress = svc.progress();
  CHECK(progress.body.at("scores") == 1);
  CHECK(progress.body.at("annotators").at("alice") == 1);

  const Response after = svc.tasks("alice");
  int done = 0;
  for (const auto& t : after.body.at("tasks")) done += t.at("done").get<bool>();
  CHECK(done == 1);

  // A restarted service sees earlier submissions.
  AnnotationService restarted(sample(), 5, log);
  CHECK(restarted.submit(body("alice", "s1", restarted.token_for("s1", "sys-beta"))).status ==
        409);
  std::filesystem::remove_all(dir);
}

TEST_CASE("service: shuffles differ per annotator and are stable") {
  const auto dir = oracle::scratch_dir("annotation_shuffle");
  AnnotationService svc(sample(), 5, dir / "scores.jsonl");
  auto tokens = [&](const std::string& who) {
    std::vector<std::string> out;
    for (const auto& t : svc.tasks(who).body.at("tasks")) out.push_back(t.at("token"));
    return out;
  };
  CHECK(tokens("alice") == tokens("alice"));
  std::vector<std::string> a = tokens("alice"), b = tokens("bob");
  CHECK(std::set<std::string>(a.begin(), a.end()) == std::set<std::string>(b.begin(), b.end()));
  std::filesystem::remove_all(dir);
}

TEST_CASE("service rejects bad samples") {
  const auto log = std::filesystem::temp_directory_path() / "lrsum_unused.jsonl";
  CHECK_THROWS_AS(AnnotationService({}, 1, log), ValidationError);
  auto dup = sample();
  dup[1].summary_id = "s0";
  CHECK_THROWS_AS(AnnotationService(dup, 1, log), ValidationError);
}

TEST_CASE("HTTP API round trip") {
  const auto dir = oracle::scratch_dir("annotation_http");
  const auto log = dir / "scores.jsonl";
  std::filesystem::create_directories(dir / "ui");
  oracle::write_file(dir / "ui" / "index.html", "<html>ui</html>");
  auto svc = std::make_shared<AnnotationService>(sample(), 3, log);
  AnnotationServer server(svc, dir / "ui");
  const int port = server.start("127.0.0.1", 0);
  httplib::Client cli("127.0.0.1", port);

  auto page = cli.Get("/index.html");
  REQUIRE(page);
  CHECK(page->body == "<html>ui</html>");

  auto tasks = cli.Get("/api/tasks?annotator=alice");
  REQUIRE(tasks);
  CHECK(tasks->status == 200);
  CHECK_FALSE(mentions_system(tasks->body));
  const json list = json::parse(tasks->body).at("tasks");
  REQUIRE(list.size() == 9);

  // 6 submissions: every candidate of s0 and s1, ratings 0..5 and 5..0
  int posted = 0;
  for (const auto& t : list) {
    if (t.at("summary_id") == "s2" || posted == 6) continue;
    auto res = cli.Post("/api/scores",
                        body("alice", t.at("summary_id"), t.at("token"), posted % 6, 5 - posted % 6),
                        "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK_FALSE(mentions_system(res->body));
    ++posted;
  }
  const auto again = cli.Post("/api/scores", body("alice", list[0].at("summary_id"), list[0].at("token")),
                              "application/json");
  REQUIRE(again);
  CHECK(again->status == 409);
  const auto bad = cli.Post("/api/scores", body("alice", "s0", list[0].at("token"), 9),
                            "application/json");
  REQUIRE(bad);
  CHECK(bad->status == 400);
  CHECK_FALSE(mentions_system(bad->body));

  auto progress = cli.Get("/api/progress");
  REQUIRE(progress);
  CHECK_FALSE(mentions_system(progress->body));
  CHECK(json::parse(progress->body).at("scores") == 6);
  CHECK(line_count(log) == 6);
  std::ifstream in(log);
  const auto report = harness::aggregate_human_eval(harness::read_scores(in));
  REQUIRE(report.items.size() == 6);
  double acc = 0, coh = 0;
  for (const auto& item : report.items) {
    acc += item.accuracy;
    coh += item.coherence;
    CHECK(item.accuracy + item.coherence == 5);
  }
  CHECK(acc == 15);
  CHECK(coh == 15);
  REQUIRE(report.systems.size() == 3);
  for (const auto& sys : report.systems) CHECK(sys.summaries == 2);
  server.stop();
  std::filesystem::remove_all(dir);
}

TEST_CASE("concurrent submissions append exactly one line each") {
  const auto dir = oracle::scratch_dir("annotation_concurrent");
  const auto log = dir / "scores.jsonl";
  auto svc = std::make_shared<AnnotationService>(sample(), 11, log);
  AnnotationServer server(svc);
  const int port = server.start("127.0.0.1", 0);

  std::vector<std::thread> workers;
  std::atomic<int> ok{0}, conflict{0};
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&, w] {
      httplib::Client cli("127.0.0.1", port);
      const std::string who = "annotator" + std::to_string(w % 4);  // pairs race on each name
      for (int i = 0; i < 3; ++i) {
        for (const auto& sys : kSystems) {
          const std::string id = "s" + std::to_string(i);
          auto res = cli.Post("/api/scores", body(who, id, svc->token_for(id, sys)), "application/json");
          if (res && res->status == 200) ++ok;
          if (res && res->status == 409) ++conflict;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  CHECK(ok == 36);
  CHECK(conflict == 36);
  CHECK(line_count(log) == 36);
  std::ifstream in(log);
  CHECK(harness::read_scores(in).size() == 36);
  server.stop();
  std::filesystem::remove_all(dir);
}
