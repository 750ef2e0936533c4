#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <ctime>
#include <filesystem>
#include <functional>
#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <httplib.h>

#include "mrcsplit/annotate.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/io.hpp"

namespace mrcsplit {

/// Submitted records, replayed from the log. The first record per task wins.
struct SessionState {
  std::vector<AnnotationRecord> records;
  std::set<std::string> submitted;
  std::set<std::string> annotators;

  bool apply(const AnnotationRecord& r) {
    if (!submitted.insert(r.task_id).second) return false;
    records.push_back(r);
    annotators.insert(r.annotator_id);
    return true;
  }
  bool operator==(const SessionState& o) const {
    if (submitted != o.submitted || annotators != o.annotators) return false;
    if (records.size() != o.records.size()) return false;
    for (std::size_t i = 0; i < records.size(); ++i)
      if (to_json(records[i]) != to_json(o.records[i])) return false;
    return true;
  }
};

inline SessionState replay(std::span<const AnnotationRecord> log, SessionState state = {}) {
  for (const auto& r : log) state.apply(r);
  return state;
}

/// Append-only line log. Each append is flushed to disk before returning.
class RecordLog {
 public:
  RecordLog(std::filesystem::path path, const json& provenance) : path_(std::move(path)) {
    const bool fresh = !std::filesystem::exists(path_) || std::filesystem::file_size(path_) == 0;
    if (!fresh) drop_torn_tail();
    fd_ = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error(ErrorKind::StoreUnwritable, path_.string() + ": " + std::strerror(errno));
    if (fresh && !provenance.is_null()) append_line(dump_line(json{{"provenance", provenance}}));
  }
  RecordLog(const RecordLog&) = delete;
  RecordLog& operator=(const RecordLog&) = delete;
  ~RecordLog() {
    if (fd_ >= 0) ::close(fd_);
  }

  std::vector<AnnotationRecord> load() const {
    std::vector<AnnotationRecord> out;
    for (const auto& rec : read_jsonl(path_).records) {
      auto parsed = parse_record(rec.value);
      if (!parsed.record)
        throw Error(ErrorKind::MalformedFile, path_.string() + ":" + std::to_string(rec.line) +
                                                  ": invalid record in log");
      out.push_back(std::move(*parsed.record));
    }
    return out;
  }

  void append(const AnnotationRecord& r) { append_line(dump_line(to_json(r))); }

  std::string contents() const { return read_file(path_); }
  const std::filesystem::path& path() const { return path_; }

 private:
  void append_line(const std::string& line) {
    std::size_t done = 0;
    while (done < line.size()) {
      const ssize_t n = ::write(fd_, line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw Error(ErrorKind::StoreUnwritable, path_.string() + ": " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0)
      throw Error(ErrorKind::StoreUnwritable, path_.string() + ": fsync: " + std::strerror(errno));
  }

  // A crash mid-append can leave a partial last line; cut it off.
  void drop_torn_tail() {
    const std::string text = read_file(path_);
    if (text.empty() || text.back() == '\n') return;
    const auto keep = text.rfind('\n');
    std::filesystem::resize_file(path_, keep == std::string::npos ? 0 : keep + 1);
  }

  std::filesystem::path path_;
  int fd_ = -1;
};

struct HttpReply {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

class AnnotationServer {
 public:
  using Clock = std::function<std::chrono::system_clock::time_point()>;

  struct Options {
    std::chrono::seconds lease = std::chrono::minutes(30);
    bool allow_export = false;
    Clock clock = [] { return std::chrono::system_clock::now(); };
  };

  AnnotationServer(std::vector<AnnotationTask> tasks, const std::filesystem::path& store,
                   Options options, const json& provenance = json::object())
      : tasks_(std::move(tasks)), options_(std::move(options)), log_(store, provenance) {
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      if (!index_.emplace(tasks_[i].task_id, i).second)
        throw Error(ErrorKind::SchemaViolation, "duplicate task id " + tasks_[i].task_id);
    }
    state_ = replay(log_.load());
    publish();
  }

  HttpReply next_task(const std::string& annotator) {
    if (annotator.empty()) return error_reply(400, "annotator query parameter is required");
    std::lock_guard lock(mutex_);
    const auto now = options_.clock();
    expire_leases(now);
    const AnnotationTask* pick = nullptr;
    for (const auto& [task, lease] : leases_) {
      if (lease.annotator == annotator) {
        pick = &tasks_[index_.at(task)];
        break;
      }
    }
    if (!pick) {
      for (const auto& t : tasks_) {
        if (!state_.submitted.contains(t.task_id) && !leases_.contains(t.task_id)) {
          pick = &t;
          break;
        }
      }
    }
    if (!pick) return {204, "", "application/json"};
    leases_[pick->task_id] = {annotator, now + options_.lease};
    publish();
    return {200, to_json(*pick).dump(), "application/json"};
  }

  HttpReply submit(const std::string& body) {
    json j;
    try {
      j = json::parse(body);
    } catch (const json::parse_error&) {
      return violations_reply({"request body is not valid JSON"});
    }
    ParsedRecord parsed = parse_record(j);
    if (!parsed.record) return violations_reply(parsed.violations);
    AnnotationRecord& r = *parsed.record;
    if (!index_.contains(r.task_id)) return violations_reply({"unknown task_id " + r.task_id});

    std::lock_guard lock(mutex_);
    if (state_.submitted.contains(r.task_id))
      return error_reply(409, "task " + r.task_id + " already submitted");
    if (r.timestamp.empty()) r.timestamp = format_utc(options_.clock());
    log_.append(r);
    state_.apply(r);
    leases_.erase(r.task_id);
    publish();
    ordered_json reply;
    reply["task_id"] = r.task_id;
    reply["status"] = "accepted";
    return {200, reply.dump(), "application/json"};
  }

  HttpReply progress() const {
    const auto snap = std::atomic_load(&snapshot_);
    const auto now = options_.clock();
    std::size_t leased = 0;
    for (const auto& expiry : snap->lease_expiries) leased += expiry > now;
    ordered_json j;
    j["total"] = tasks_.size();
    j["remaining"] = tasks_.size() - snap->submitted - leased;
    j["submitted"] = snap->submitted;
    j["leased"] = leased;
    return {200, j.dump(), "application/json"};
  }

  HttpReply schema() const { return {200, label_schema().dump(), "application/json"}; }

  HttpReply export_log() const {
    if (!options_.allow_export) return error_reply(403, "export is disabled");
    // The log only grows; a partially written last line is not yet committed.
    std::string text = log_.contents();
    text.resize(text.rfind('\n') == std::string::npos ? 0 : text.rfind('\n') + 1);
    return {200, std::move(text), "application/x-ndjson"};
  }

  SessionState state() const {
    std::lock_guard lock(mutex_);
    return state_;
  }

  void mount(httplib::Server& server) {
    auto send = [](httplib::Response& res, const HttpReply& r) {
      res.status = r.status;
      if (r.status != 204) res.set_content(r.body, r.content_type);
    };
    server.Get("/api/tasks/next", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, next_task(req.has_param("annotator") ? req.get_param_value("annotator") : ""));
    });
    server.Post("/api/labels", [this, send](const httplib::Request& req, httplib::Response& res) {
      send(res, submit(req.body));
    });
    server.Get("/api/progress",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, progress()); });
    server.Get("/api/schema",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, schema()); });
    server.Get("/api/export",
               [this, send](const httplib::Request&, httplib::Response& res) { send(res, export_log()); });
  }

  /// Binds and blocks until the server is stopped. Returns the bound port.
  void listen(httplib::Server& server, const std::string& host, int port,
              const std::function<void(int)>& on_bound = {}) {
    mount(server);
    const int bound = port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
    if (bound < 0) throw Error(ErrorKind::BindFailure, "cannot bind " + host + ":" + std::to_string(port));
    if (on_bound) on_bound(bound);
    server.listen_after_bind();
  }

  static std::string format_utc(std::chrono::system_clock::time_point t) {
    const std::time_t secs = std::chrono::system_clock::to_time_t(t);
    std::tm tm{};
    gmtime_r(&secs, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

 private:
  struct Snapshot {
    std::size_t submitted = 0;
    std::vector<std::chrono::system_clock::time_point> lease_expiries;
  };

  // Called with mutex_ held (or from the constructor).
  void publish() {
    auto snap = std::make_shared<Snapshot>();
    snap->submitted = state_.submitted.size();
    for (const auto& [_, lease] : leases_) snap->lease_expiries.push_back(lease.expires);
    std::atomic_store(&snapshot_, std::shared_ptr<const Snapshot>(std::move(snap)));
  }

  struct Lease {
    std::string annotator;
    std::chrono::system_clock::time_point expires;
  };

  void expire_leases(std::chrono::system_clock::time_point now) {
    std::erase_if(leases_, [&](const auto& kv) { return kv.second.expires <= now; });
  }

  static HttpReply error_reply(int status, const std::string& message) {
    return {status, json{{"error", message}}.dump(), "application/json"};
  }
  static HttpReply violations_reply(const std::vector<std::string>& violations) {
    return {422, json{{"violations", violations}}.dump(), "application/json"};
  }

  std::vector<AnnotationTask> tasks_;
  std::map<std::string, std::size_t> index_;
  Options options_;
  mutable std::mutex mutex_;
  RecordLog log_;
  SessionState state_;
  std::map<std::string, Lease> leases_;
  std::shared_ptr<const Snapshot> snapshot_;
};

}  // namespace mrcsplit
