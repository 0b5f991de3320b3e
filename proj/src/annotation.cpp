#include "lrsum/annotation.h"

#include <chrono>
#include <ctime>
#include <fstream>
#include <random>

#include "httplib.h"
#include "lrsum/error.h"
#include "lrsum/text.h"

namespace lrsum::annotation {

using nlohmann::json;

std::vector<SampleItem> read_sample(std::istream& in) {
  std::vector<SampleItem> items;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      json j = json::parse(line);
      SampleItem item;
      item.summary_id = j.at("summary_id").get<std::string>();
      item.reference = j.at("reference").get<std::string>();
      for (const json& c : j.at("candidates")) {
        item.candidates.push_back({c.at("system").get<std::string>(),
                                   c.at("text").get<std::string>()});
      }
      items.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw ValidationError("sample line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return items;
}

namespace {

std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

Response bad_request(json errors) { return {400, {{"errors", std::move(errors)}}}; }

}  // namespace

std::vector<std::size_t> blinded_order(const std::string& annotator,
                                       const std::string& summary_id,
                                       std::uint64_t session_seed, std::size_t n) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a(h, std::string_view(reinterpret_cast<const char*>(&session_seed), sizeof session_seed));
  h = fnv1a(h, annotator);
  h = fnv1a(h, std::string_view("\x1f", 1));
  h = fnv1a(h, summary_id);
  std::mt19937_64 rng(h);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  return order;
}

AnnotationService::AnnotationService(std::vector<SampleItem> sample, std::uint64_t session_seed,
                                     std::filesystem::path score_log)
    : sample_(std::move(sample)), seed_(session_seed), log_path_(std::move(score_log)) {
  if (sample_.empty()) throw ValidationError("annotation sample is empty");
  std::mt19937_64 rng(session_seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < sample_.size(); ++i) {
    const SampleItem& item = sample_[i];
    if (item.candidates.empty()) {
      throw ValidationError("sample '" + item.summary_id + "' has no candidates");
    }
    if (!item_index_.emplace(item.summary_id, i).second) {
      throw ValidationError("duplicate summary_id '" + item.summary_id + "' in sample");
    }
    for (std::size_t c = 0; c < item.candidates.size(); ++c) {
      const std::string& system = item.candidates[c].system;
      if (system.empty()) throw ValidationError("candidate without a system name");
      std::string token;
      do {
        char buf[20];
        std::snprintf(buf, sizeof buf, "c%012llx",
                      static_cast<unsigned long long>(rng() & 0xffffffffffffULL));
        token = buf;
      } while (slots_.count(token) != 0);
      if (!tokens_.emplace(std::make_pair(item.summary_id, system), token).second) {
        throw ValidationError("system '" + system + "' appears twice for '" +
                              item.summary_id + "'");
      }
      slots_.emplace(token, Slot{i, c});
      ++task_count_;
    }
  }

  if (std::filesystem::exists(log_path_)) {
    std::ifstream in(log_path_);
    for (const harness::HumanScore& s : harness::read_scores(in)) {
      submitted_.emplace(s.annotator, s.summary_id, s.system);
      ++per_annotator_[s.annotator];
    }
  }
}

const std::string& AnnotationService::token_for(const std::string& summary_id,
                                                const std::string& system) const {
  return tokens_.at({summary_id, system});
}

Response AnnotationService::tasks(const std::string& annotator) const {
  if (annotator.empty()) return bad_request({{"annotator", "required"}});
  json tasks = json::array();
  std::size_t position = 0;
  std::lock_guard lock(mu_);
  for (const SampleItem& item : sample_) {
    for (std::size_t c : blinded_order(annotator, item.summary_id, seed_, item.candidates.size())) {
      const Candidate& cand = item.candidates[c];
      tasks.push_back({{"summary_id", item.summary_id},
                       {"reference", item.reference},
                       {"candidate", cand.text},
                       {"token", tokens_.at({item.summary_id, cand.system})},
                       {"position", ++position},
                       {"total", task_count_},
                       {"done", submitted_.count({annotator, item.summary_id, cand.system}) != 0}});
    }
  }
  return {200, {{"annotator", annotator}, {"total", task_count_}, {"tasks", std::move(tasks)}}};
}

Response AnnotationService::submit(const std::string& body) {
  json j = json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) {
    return bad_request({{"body", "expected a JSON object"}});
  }
  json errors = json::object();
  auto string_field = [&](const char* name) -> std::string {
    auto it = j.find(name);
    if (it == j.end() || !it->is_string() || it->get<std::string>().empty()) {
      errors[name] = "expected a non-empty string";
      return {};
    }
    return it->get<std::string>();
  };
  auto rating_field = [&](const char* name) -> int {
    auto it = j.find(name);
    if (it == j.end() || !it->is_number_integer()) {
      errors[name] = "expected an integer 0-5";
      return -1;
    }
    const auto v = it->get<long long>();
    if (v < 0 || v > 5) {
      errors[name] = "must be between 0 and 5";
      return -1;
    }
    return static_cast<int>(v);
  };

  harness::HumanScore score;
  score.annotator = string_field("annotator");
  score.summary_id = string_field("summary_id");
  const std::string token = string_field("token");
  score.accuracy = rating_field("accuracy");
  score.coherence = rating_field("coherence");

  if (!score.summary_id.empty() && item_index_.count(score.summary_id) == 0) {
    errors["summary_id"] = "unknown summary";
  }
  if (!token.empty() && !errors.contains("summary_id")) {
    auto it = slots_.find(token);
    if (it == slots_.end() || sample_[it->second.item].summary_id != score.summary_id) {
      errors["token"] = "unknown candidate for this summary";
    } else {
      score.system = sample_[it->second.item].candidates[it->second.candidate].system;
    }
  }
  if (!errors.empty()) return bad_request(std::move(errors));
  score.timestamp = utc_timestamp();

  std::lock_guard lock(mu_);
  if (!submitted_.emplace(score.annotator, score.summary_id, score.system).second) {
    return {409, {{"error", "already scored"}}};
  }
  std::ofstream out(log_path_, std::ios::app | std::ios::binary);
  out << harness::to_json(score).dump() << '\n';
  out.flush();
  if (!out) {
    submitted_.erase({score.annotator, score.summary_id, score.system});
    return {500, {{"error", "could not persist score"}}};
  }
  ++per_annotator_[score.annotator];
  return {200, {{"status", "ok"}}};
}

Response AnnotationService::progress() const {
  std::lock_guard lock(mu_);
  json annotators = json::object();
  for (const auto& [name, count] : per_annotator_) annotators[name] = count;
  return {200,
          {{"tasks_per_annotator", task_count_},
           {"scores", submitted_.size()},
           {"annotators", std::move(annotators)}}};
}

AnnotationServer::AnnotationServer(std::shared_ptr<AnnotationService> service,
                                   std::filesystem::path ui_dir)
    : service_(std::move(service)), server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json; charset=utf-8");
  };
  server_->Get("/api/tasks", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_->tasks(req.get_param_value("annotator")));
  });
  server_->Post("/api/scores", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_->submit(req.body));
  });
  server_->Get("/api/progress", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service_->progress());
  });
  if (!ui_dir.empty() && std::filesystem::is_directory(ui_dir)) {
    server_->set_mount_point("/", ui_dir.string());
  }
}

AnnotationServer::~AnnotationServer() { stop(); }

int AnnotationServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host)
                              : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw IoError("cannot bind " + host + ":" + std::to_string(port));
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void AnnotationServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) {
    throw IoError("cannot serve on " + host + ":" + std::to_string(port));
  }
}

void AnnotationServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace lrsum::annotation
