#include "helpers.hpp"

#include "mrcsplit/annotate.hpp"

using namespace mrcsplit;
using testing::error_kind;

namespace {

struct Fixture {
  Dataset ds;
  std::vector<SubsetAssignment> assignments;
  Evaluation baseline;
};

// n items; every third one is hard.
Fixture make_fixture(std::size_t n) {
  Fixture f;
  f.ds.dataset_id = "d";
  f.baseline = {"d", "full", "bidaf", Metric::F1, {}, {}, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::string id = "item-" + std::to_string(i);
    f.ds.items.push_back({id, QuestionStyle::Extraction, "Context number " + std::to_string(i) + ".",
                          "Question " + std::to_string(i) + "?", {"number"}});
    f.assignments.push_back({id, i % 3 == 0 ? Subset::Hard : Subset::Easy, {0.0, false, false}});
    const double score = 0.123456789 + static_cast<double>(i) / 1000.0;
    f.baseline.items.push_back({id, {{Metric::F1, score}, 0.0}, false});
  }
  return f;
}

AnnotationRecord record(std::string task, Validity v, std::optional<Skill> skill = std::nullopt,
                        std::optional<bool> multi = std::nullopt,
                        std::optional<Relation> rel = std::nullopt) {
  return {std::move(task), v, skill, multi, rel, "ann1", "2019-01-01T00:00:00Z", ""};
}

}  // namespace

TEST_CASE("annotation sampling") {
  auto f = make_fixture(150);  // 50 hard, 100 easy
  const std::vector<Evaluation> baselines{f.baseline};
  const auto a = sample_for_annotation(f.assignments, f.ds, 30, 2019, baselines);
  REQUIRE(a.tasks.size() == 60);
  REQUIRE(a.hidden.size() == 60);

  std::size_t hard = 0;
  std::set<std::string> task_ids, item_ids;
  for (std::size_t i = 0; i < a.tasks.size(); ++i) {
    CHECK(a.tasks[i].task_id == a.hidden[i].task_id);
    hard += a.hidden[i].subset == Subset::Hard;
    task_ids.insert(a.tasks[i].task_id);
    item_ids.insert(a.hidden[i].item_id);
    CHECK(a.hidden[i].baseline_scores.at("bidaf") > 0.0);
  }
  CHECK(hard == 30);
  CHECK(task_ids.size() == 60);
  CHECK(item_ids.size() == 60);

  SECTION("same seed, same tasks") {
    const auto b = sample_for_annotation(f.assignments, f.ds, 30, 2019, baselines);
    for (std::size_t i = 0; i < 60; ++i) {
      CHECK(dump_line(to_json(a.tasks[i])) == dump_line(to_json(b.tasks[i])));
      CHECK(dump_line(to_json(a.hidden[i])) == dump_line(to_json(b.hidden[i])));
    }
    const auto c = sample_for_annotation(f.assignments, f.ds, 30, 2020, baselines);
    CHECK(dump_line(to_json(c.tasks[0])) != dump_line(to_json(a.tasks[0])));
  }
  SECTION("hard and easy are not grouped") {
    // a shuffled 30/30 mix essentially never leads with 30 of one kind
    bool mixed = false;
    for (std::size_t i = 1; i < 30; ++i) mixed |= a.hidden[i].subset != a.hidden[0].subset;
    CHECK(mixed);
  }
  SECTION("too few hard items") {
    try {
      sample_for_annotation(f.assignments, f.ds, 51, 1);
      FAIL("expected SubsetTooSmall");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::SubsetTooSmall);
      CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("hard"));
    }
  }
  SECTION("tasks leak neither subset nor scores") {
    for (const auto& t : a.tasks) {
      const std::string bytes = dump_line(to_json(t));
      for (const char* needle : {"subset", "hard", "easy", "score", "bidaf", "item-", "0.1"}) {
        INFO(bytes);
        CHECK(bytes.find(needle) == std::string::npos);
      }
    }
  }
  SECTION("tasks and hidden rows round trip") {
    const auto t = task_from_json(json::parse(dump_line(to_json(a.tasks[0]))));
    CHECK(t.task_id == a.tasks[0].task_id);
    CHECK(t.context == a.tasks[0].context);
    CHECK(t.answers == a.tasks[0].answers);
    const auto h = hidden_from_json(json::parse(dump_line(to_json(a.hidden[0]))));
    CHECK(h.item_id == a.hidden[0].item_id);
    CHECK(h.subset == a.hidden[0].subset);
    CHECK(h.baseline_scores == a.hidden[0].baseline_scores);
  }
}

TEST_CASE("record schema") {
  CHECK(validate_record(record("t", Validity::Valid, Skill::WordMatching, false)).empty());
  CHECK_FALSE(validate_record(record("t", Validity::Ambiguous, Skill::Knowledge)).empty());
  CHECK_FALSE(validate_record(record("t", Validity::Valid, Skill::Knowledge, true)).empty());
  CHECK(validate_record(record("t", Validity::Valid, Skill::Knowledge, true, Relation::None)).empty());
  CHECK(validate_record(record("t", Validity::Unsolvable)).empty());
  CHECK_FALSE(validate_record(record("t", Validity::Valid)).empty());
  CHECK_FALSE(validate_record(record("t", Validity::Valid, Skill::Knowledge, false, Relation::Causal)).empty());
  CHECK_FALSE(validate_record(record("", Validity::Unsolvable)).empty());
}

TEST_CASE("wire records: 20 valid, 20 invalid") {
  const std::vector<std::string> valid{
      R"({"task_id":"t","validity":"valid","skill":"word_matching","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"paraphrasing","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"meta_whole","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"math_logic","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"relation":"coreference","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"relation":"causal","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"relation":"spatial_temporal","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"relation":"none","annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable","annotator_id":"a"})",
      R"({"task_id":"t","validity":"single_candidate","annotator_id":"a"})",
      R"({"task_id":"t","validity":"ambiguous","annotator_id":"a"})",
      R"({"task_id":"t","validity":"ambiguous","annotator_id":"a","note":"two readings"})",
      R"({"task_id":"t","validity":"unsolvable","annotator_id":"a","timestamp":"2019-05-01T10:00:00Z"})",
      R"({"task_id":"t","validity":"valid","skill":"word_matching","multi_sentence":false,"annotator_id":"a","note":""})",
      R"({"task_id":"t","validity":"valid","skill":"paraphrasing","multi_sentence":true,"relation":"causal","annotator_id":"b"})",
      R"({"task_id":"x1","validity":"single_candidate","annotator_id":"z","skill":null})",
      R"({"task_id":"t","validity":"valid","skill":"math_logic","multi_sentence":true,"relation":"none","annotator_id":"a","timestamp":"t"})",
      R"({"task_id":"t","validity":"unsolvable","annotator_id":"a","relation":null,"multi_sentence":null})",
      R"({"task_id":"ü","validity":"valid","skill":"meta_whole","multi_sentence":false,"annotator_id":"ä"})",
  };
  const std::vector<std::string> invalid{
      R"({"task_id":"t","validity":"valid","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":false,"relation":"causal","annotator_id":"a"})",
      R"({"task_id":"t","validity":"ambiguous","skill":"knowledge","annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable","relation":"none","annotator_id":"a"})",
      R"({"task_id":"t","validity":"maybe","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"guessing","multi_sentence":false,"annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":true,"relation":"temporal","annotator_id":"a"})",
      R"({"task_id":"t","validity":"valid","skill":"knowledge","multi_sentence":"yes","annotator_id":"a"})",
      R"({"validity":"unsolvable","annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable"})",
      R"({"task_id":"t","annotator_id":"a"})",
      R"({"task_id":"","validity":"unsolvable","annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable","annotator_id":""})",
      R"({"task_id":7,"validity":"unsolvable","annotator_id":"a"})",
      R"({"task_id":"t","validity":"unsolvable","annotator_id":"a","subset":"hard"})",
      R"(["task_id","t"])",
      R"({"task_id":"t","validity":"Valid","skill":"knowledge","multi_sentence":false,"annotator_id":"a"})",
  };
  REQUIRE(valid.size() == 20);
  REQUIRE(invalid.size() == 20);
  for (const auto& text : valid) {
    INFO(text);
    const auto p = parse_record(json::parse(text));
    CHECK(p.violations.empty());
    REQUIRE(p.record);
    const auto again = parse_record(json::parse(dump_line(to_json(*p.record))));
    CHECK(again.violations.empty());
  }
  for (const auto& text : invalid) {
    INFO(text);
    const auto p = parse_record(json::parse(text));
    CHECK_FALSE(p.violations.empty());
    CHECK_FALSE(p.record);
  }
}

TEST_CASE("label distribution") {
  std::map<std::string, Subset> subset_of;
  std::vector<AnnotationRecord> records;
  for (int i = 0; i < 10; ++i) {
    const std::string id = "h" + std::to_string(i);
    subset_of[id] = Subset::Hard;
    records.push_back(record(id, Validity::Valid, i < 4 ? Skill::WordMatching : Skill::Knowledge,
                             i < 5, i < 5 ? std::optional<Relation>(i < 2 ? Relation::Causal : Relation::None)
                                          : std::nullopt));
  }
  for (int i = 0; i < 5; ++i) {
    const std::string id = "u" + std::to_string(i);
    subset_of[id] = Subset::Hard;
    records.push_back(record(id, Validity::Unsolvable));
  }
  for (int i = 0; i < 30; ++i) {
    const std::string id = "e" + std::to_string(i);
    subset_of[id] = Subset::Easy;
    records.push_back(record(id, Validity::Valid, Skill::Paraphrasing, false));
  }
  const auto d = label_distribution(records, subset_of);
  CHECK(d.items[1] == 15);
  CHECK(d.valid[1] == 10);
  CHECK(d.items[0] == 30);

  auto find = [&](const std::string& block, const std::string& label) -> const DistributionRow& {
    for (const auto& r : d.rows)
      if (r.block == block && r.label == label) return r;
    FAIL("row not found: " << block << "/" << label);
    return d.rows.front();
  };
  const auto& wm = find("skill", "word_matching");
  CHECK(wm.count[1] == 4);
  CHECK(wm.denominator[1] == 10);
  CHECK(100.0 * double(wm.count[1]) / double(wm.denominator[1]) == 40.0);
  const auto& valid = find("validity", "valid");
  CHECK(valid.count[0] == 30);
  CHECK(valid.denominator[0] == 30);
  CHECK(find("relation", "multi_sentence").count[1] == 5);
  CHECK(find("relation_of_multi", "causal").denominator[1] == 5);
  CHECK(find("relation", "causal").denominator[1] == 10);

  for (int s = 0; s < 2; ++s) {
    std::size_t sum = 0;
    for (const auto& r : d.rows)
      if (r.block == "validity") sum += r.count[s];
    CHECK(sum == d.items[s]);
  }

  CHECK(error_kind([&] { label_distribution(std::vector<AnnotationRecord>{}, subset_of); }) ==
        ErrorKind::EmptyRecords);
  auto ghost = records;
  ghost.push_back(record("nope", Validity::Unsolvable));
  CHECK(error_kind([&] { label_distribution(ghost, subset_of); }) == ErrorKind::UnknownTaskId);
  auto twice = records;
  twice.push_back(records.front());
  CHECK(error_kind([&] { label_distribution(twice, subset_of); }) == ErrorKind::SchemaViolation);
}

TEST_CASE("label correlations") {
  std::vector<AnnotationRecord> records;
  std::vector<HiddenTaskInfo> hidden;
  for (int i = 0; i < 8; ++i) {
    const std::string id = "t" + std::to_string(i);
    const bool knowledge = i % 2 == 0;
    records.push_back(record(id, Validity::Valid, knowledge ? Skill::Knowledge : Skill::WordMatching, false));
    // knowledge items score low, so the indicator correlates negatively
    hidden.push_back({id, "i" + std::to_string(i), Subset::Easy, {{"sys", knowledge ? 0.1 : 0.9}}});
  }
  const auto rows = correlate_labels(records, hidden, 200, 5);
  bool seen_knowledge = false;
  for (const auto& r : rows) {
    CHECK(r.system == "sys");
    if (r.label == "knowledge") {
      seen_knowledge = true;
      REQUIRE(r.result);
      CHECK(r.result->r == Catch::Approx(-1.0));
      CHECK(r.n == 8);
      REQUIRE(r.permutation_p);
    }
    if (r.label == "math_logic") CHECK_FALSE(r.result);  // constant indicator
  }
  CHECK(seen_knowledge);
  auto bad = records;
  bad.push_back(record("zz", Validity::Unsolvable));
  CHECK(error_kind([&] { correlate_labels(bad, hidden); }) == ErrorKind::UnknownTaskId);
}
