#pragma once

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "lrsum/harness.h"

namespace httplib {
class Server;
}

namespace lrsum::annotation {

struct Candidate {
  std::string system;
  std::string text;
};

struct SampleItem {
  std::string summary_id;
  std::string reference;
  std::vector<Candidate> candidates;
};

/// Reads {"summary_id", "reference", "candidates": [{"system", "text"}]} lines.
std::vector<SampleItem> read_sample(std::istream& in);

/// Candidate order for one annotator and summary; a seeded Fisher-Yates
/// permutation of [0, n).
std::vector<std::size_t> blinded_order(const std::string& annotator,
                                       const std::string& summary_id,
                                       std::uint64_t session_seed, std::size_t n);

struct Response {
  int status = 200;
  nlohmann::json body;
};

/// Annotation state behind the HTTP API. Handlers are thread-safe; score
/// appends go through one mutex-guarded writer.
class AnnotationService {
 public:
  AnnotationService(std::vector<SampleItem> sample, std::uint64_t session_seed,
                    std::filesystem::path score_log);

  Response tasks(const std::string& annotator) const;
  /// Body: {"annotator", "summary_id", "token", "accuracy", "coherence"}.
  Response submit(const std::string& body);
  Response progress() const;

  std::size_t task_count() const { return task_count_; }
  /// Opaque token standing in for a system on one summary.
  const std::string& token_for(const std::string& summary_id, const std::string& system) const;

 private:
  struct Slot {
    std::size_t item;
    std::size_t candidate;
  };

  std::vector<SampleItem> sample_;
  std::uint64_t seed_;
  std::filesystem::path log_path_;
  std::size_t task_count_ = 0;
  std::map<std::string, std::size_t> item_index_;
  std::map<std::pair<std::string, std::string>, std::string> tokens_;
  std::map<std::string, Slot> slots_;

  mutable std::mutex mu_;
  std::set<std::tuple<std::string, std::string, std::string>> submitted_;
  std::map<std::string, std::size_t> per_annotator_;
};

/// Binds the API (and, if ui_dir exists, its static files) to an httplib
/// server. Runs on a background thread until stop() or destruction.
class AnnotationServer {
 public:
  AnnotationServer(std::shared_ptr<AnnotationService> service,
                   std::filesystem::path ui_dir = {});
  ~AnnotationServer();

  AnnotationServer(const AnnotationServer&) = delete;
  AnnotationServer& operator=(const AnnotationServer&) = delete;

  /// port 0 picks a free port; returns the bound port.
  int start(const std::string& host, int port);
  /// Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  std::shared_ptr<AnnotationService> service_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace lrsum::annotation
