#include "helpers.hpp"

#include <csignal>
#include <sys/wait.h>
#include <thread>

#include <httplib.h>

#include "mrcsplit/server.hpp"

using namespace mrcsplit;
using namespace std::chrono_literals;
using testing::TempDir;

namespace {

std::vector<AnnotationTask> make_tasks(std::size_t n) {
  std::vector<AnnotationTask> tasks;
  for (std::size_t i = 0; i < n; ++i)
    tasks.push_back({"task" + std::to_string(i), QuestionStyle::Extraction,
                     "Context " + std::to_string(i) + ".", "Question " + std::to_string(i) + "?",
                     {"Context"}, {}, -1});
  return tasks;
}

std::string label(const std::string& task, const std::string& annotator = "ann") {
  return json{{"task_id", task}, {"validity", "valid"}, {"skill", "word_matching"},
              {"multi_sentence", false}, {"annotator_id", annotator},
              {"timestamp", "2019-01-01T00:00:00Z"}}
      .dump();
}

// Manually advanced clock, safe to read from several threads.
struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> seconds = std::make_shared<std::atomic<std::int64_t>>(1'500'000'000);
  AnnotationServer::Clock fn() const {
    auto s = seconds;
    return [s] { return std::chrono::system_clock::time_point(std::chrono::seconds(s->load())); };
  }
  void advance(std::chrono::seconds d) { *seconds += d.count(); }
};

AnnotationServer::Options options(const FakeClock& clock, bool allow_export = false) {
  AnnotationServer::Options o;
  o.clock = clock.fn();
  o.allow_export = allow_export;
  return o;
}

json body(const HttpReply& r) { return json::parse(r.body); }

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("label submission statuses") {
  TempDir dir;
  FakeClock clock;
  AnnotationServer server(make_tasks(3), dir / "log.jsonl", options(clock), json{{"tool", "t"}});
  const auto before = count_lines(testing::slurp(dir / "log.jsonl"));

  const auto ok = server.submit(label("task1"));
  CHECK(ok.status == 200);
  CHECK(body(ok) == json{{"task_id", "task1"}, {"status", "accepted"}});
  CHECK(count_lines(testing::slurp(dir / "log.jsonl")) == before + 1);

  CHECK(server.submit(label("task1")).status == 409);
  CHECK(count_lines(testing::slurp(dir / "log.jsonl")) == before + 1);

  const auto bad = server.submit(
      R"({"task_id":"task0","validity":"ambiguous","skill":"knowledge","annotator_id":"a"})");
  CHECK(bad.status == 422);
  CHECK_FALSE(body(bad).at("violations").empty());
  CHECK(server.submit("not json").status == 422);
  CHECK(server.submit(label("nope")).status == 422);

  const auto p = body(server.progress());
  CHECK(p.at("total") == 3);
  CHECK(p.at("submitted") == 1);
  CHECK(p.at("remaining") == 2);
  CHECK(p.at("leased") == 0);

  // a missing timestamp is filled from the clock
  CHECK(server.submit(json{{"task_id", "task2"}, {"validity", "unsolvable"}, {"annotator_id", "a"}}.dump())
            .status == 200);
  CHECK(server.state().records.back().timestamp == "2017-07-14T02:40:00Z");
}

TEST_CASE("task queue and leases") {
  TempDir dir;
  FakeClock clock;
  AnnotationServer server(make_tasks(2), dir / "log.jsonl", options(clock));

  CHECK(server.next_task("").status == 400);
  const auto a = server.next_task("alice");
  REQUIRE(a.status == 200);
  const std::string ta = body(a).at("task_id");
  // the same annotator gets the same lease back
  CHECK(body(server.next_task("alice")).at("task_id") == ta);
  const auto b = server.next_task("bob");
  REQUIRE(b.status == 200);
  CHECK(body(b).at("task_id") != ta);
  CHECK(server.next_task("carol").status == 204);
  CHECK(body(server.progress()).at("leased") == 2);
  CHECK(body(server.progress()).at("remaining") == 0);

  clock.advance(29min);
  CHECK(server.next_task("carol").status == 204);
  clock.advance(1min);
  CHECK(body(server.progress()).at("leased") == 0);
  const auto c = server.next_task("carol");
  REQUIRE(c.status == 200);

  // submitting releases the lease and the task never comes back
  CHECK(server.submit(label(body(c).at("task_id"), "carol")).status == 200);
  CHECK(body(server.progress()).at("leased") == 0);
  const auto d = server.next_task("dave");
  REQUIRE(d.status == 200);
  CHECK(body(d).at("task_id") != body(c).at("task_id"));
  CHECK(server.submit(label(body(d).at("task_id"), "dave")).status == 200);
  CHECK(server.next_task("erin").status == 204);
  CHECK(body(server.progress()).at("submitted") == 2);
}

TEST_CASE("concurrent submissions for one task") {
  TempDir dir;
  FakeClock clock;
  AnnotationServer server(make_tasks(4), dir / "log.jsonl", options(clock));
  for (int round = 0; round < 4; ++round) {
    const std::string task = "task" + std::to_string(round);
    std::atomic<int> ok{0}, conflict{0}, other{0};
    std::vector<std::jthread> threads;
    for (int t = 0; t < 16; ++t)
      threads.emplace_back([&, t] {
        const int status = server.submit(label(task, "a" + std::to_string(t))).status;
        (status == 200 ? ok : status == 409 ? conflict : other)++;
      });
    threads.clear();
    CHECK(ok == 1);
    CHECK(conflict == 15);
    CHECK(other == 0);
  }
  CHECK(server.state().records.size() == 4);
  CHECK(RecordLog(dir / "log.jsonl", json()).load().size() == 4);
}

TEST_CASE("restart replays the log") {
  TempDir dir;
  FakeClock clock;
  SessionState before;
  {
    AnnotationServer server(make_tasks(5), dir / "log.jsonl", options(clock));
    for (int i : {0, 2, 3}) REQUIRE(server.submit(label("task" + std::to_string(i))).status == 200);
    before = server.state();
  }
  AnnotationServer again(make_tasks(5), dir / "log.jsonl", options(clock));
  CHECK(again.state() == before);
  CHECK(body(again.progress()).at("submitted") == 3);
  CHECK(again.submit(label("task2")).status == 409);
  CHECK(body(again.next_task("z")).at("task_id") == "task1");

  SECTION("replay is idempotent") {
    const auto log = RecordLog(dir / "log.jsonl", json()).load();
    const auto once = replay(log);
    CHECK(replay(log, once) == once);
    CHECK(once == before);
  }
  SECTION("a torn last line is discarded") {
    {
      std::ofstream out(dir / "log.jsonl", std::ios::app | std::ios::binary);
      out << R"({"task_id":"task4","validity":"val)";
    }
    AnnotationServer third(make_tasks(5), dir / "log.jsonl", options(clock));
    CHECK(third.state() == before);
    CHECK(third.submit(label("task4")).status == 200);
    CHECK(RecordLog(dir / "log.jsonl", json()).load().size() == 4);
  }
}

TEST_CASE("killed mid-collection, progress survives") {
  TempDir dir;
  const auto store = dir / "log.jsonl";
  int ready[2];
  REQUIRE(::pipe(ready) == 0);
  const pid_t child = ::fork();
  REQUIRE(child >= 0);
  if (child == 0) {
    ::close(ready[0]);
    {
      FakeClock clock;
      AnnotationServer server(make_tasks(10), store, options(clock));
      for (int i = 0; i < 6; ++i) server.submit(label("task" + std::to_string(i)));
      char c = 'x';
      if (::write(ready[1], &c, 1) != 1) ::_exit(2);
      // keep submitting until killed
      for (int i = 6;; i = 6 + (i + 1) % 4) server.submit(label("task" + std::to_string(i)));
    }
    ::_exit(0);
  }
  ::close(ready[1]);
  char c;
  REQUIRE(::read(ready[0], &c, 1) == 1);
  ::close(ready[0]);
  ::kill(child, SIGKILL);
  int status = 0;
  ::waitpid(child, &status, 0);
  CHECK(WIFSIGNALED(status));

  FakeClock clock;
  AnnotationServer server(make_tasks(10), store, options(clock));
  const auto state = server.state();
  CHECK(state.records.size() >= 6);
  for (int i = 0; i < 6; ++i) CHECK(state.submitted.contains("task" + std::to_string(i)));
  const auto p = body(server.progress());
  CHECK(p.at("submitted") == state.records.size());
  CHECK(p.at("remaining") == 10 - state.records.size());
  // exactly what is on disk, and nothing is double-counted
  CHECK(state == replay(RecordLog(store, json()).load()));
}

TEST_CASE("export and schema") {
  TempDir dir;
  FakeClock clock;
  {
    AnnotationServer closed(make_tasks(1), dir / "a.jsonl", options(clock));
    CHECK(closed.export_log().status == 403);
  }
  AnnotationServer open(make_tasks(2), dir / "b.jsonl", options(clock, true), json{{"tool", "t"}});
  REQUIRE(open.submit(label("task0")).status == 200);
  const auto ex = open.export_log();
  CHECK(ex.status == 200);
  const auto parsed = parse_jsonl(ex.body, "export");
  CHECK(parsed.provenance);
  REQUIRE(parsed.records.size() == 1);
  CHECK(parsed.records[0].value.at("task_id") == "task0");

  const auto schema = body(open.schema());
  CHECK(schema.dump().find("word_matching") != std::string::npos);
  CHECK(schema.dump().find("spatial_temporal") != std::string::npos);
}

TEST_CASE("log directory must be writable") {
  CHECK(testing::error_kind([] {
          FakeClock clock;
          AnnotationServer s(make_tasks(1), "/proc/definitely/not/here.jsonl", options(clock));
        }) == ErrorKind::StoreUnwritable);
}

TEST_CASE("http round trip and blinding") {
  TempDir dir;
  FakeClock clock;
  // hidden info that must never appear on the wire
  AnnotationServer server(make_tasks(3), dir / "log.jsonl", options(clock, true), json{{"tool", "t"}});
  httplib::Server http;
  std::atomic<int> port{0};
  std::jthread runner([&] { server.listen(http, "127.0.0.1", 0, [&](int p) { port = p; }); });
  for (int i = 0; i < 500 && (port == 0 || !http.is_running()); ++i) std::this_thread::sleep_for(10ms);
  REQUIRE(port > 0);

  httplib::Client client("127.0.0.1", port);
  std::vector<std::string> bodies;
  auto get = [&](const std::string& path) {
    auto res = client.Get(path);
    REQUIRE(res);
    bodies.push_back(res->body);
    return res;
  };

  auto first = get("/api/tasks/next?annotator=web");
  CHECK(first->status == 200);
  const json task = json::parse(first->body);
  CHECK(get("/api/tasks/next")->status == 400);

  auto post = client.Post("/api/labels", label(task.at("task_id"), "web"), "application/json");
  REQUIRE(post);
  CHECK(post->status == 200);
  bodies.push_back(post->body);
  auto again = client.Post("/api/labels", label(task.at("task_id"), "web"), "application/json");
  REQUIRE(again);
  CHECK(again->status == 409);
  auto invalid = client.Post("/api/labels", R"({"task_id":"task1"})", "application/json");
  REQUIRE(invalid);
  CHECK(invalid->status == 422);
  bodies.push_back(invalid->body);

  const json progress = json::parse(get("/api/progress")->body);
  CHECK(progress.at("submitted") == 1);
  CHECK(get("/api/schema")->status == 200);
  CHECK(get("/api/export")->status == 200);
  get("/api/tasks/next?annotator=b");
  get("/api/tasks/next?annotator=c");
  CHECK(get("/api/tasks/next?annotator=d")->status == 204);

  for (const auto& b : bodies) {
    INFO(b);
    for (const char* needle : {"\"subset\"", "hard", "easy", "baseline", "score", "item_id"})
      CHECK(b.find(needle) == std::string::npos);
  }
  http.stop();
}
