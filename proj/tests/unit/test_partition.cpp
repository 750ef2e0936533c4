#include "helpers.hpp"

#include "mrcsplit/partition.hpp"

using namespace mrcsplit;
using Catch::Matchers::WithinAbs;
using testing::error_kind;

namespace {

Dataset extraction_dataset(std::size_t n) {
  Dataset ds;
  ds.dataset_id = "d";
  for (std::size_t i = 0; i < n; ++i)
    ds.items.push_back({"i" + std::to_string(i), QuestionStyle::Extraction,
                        "alpha beta gamma " + std::to_string(i), "q?",
                        {"alpha " + std::to_string(i)}});
  return ds;
}

PredictionSet preds(const std::string& variant, std::map<std::string, Prediction> answers) {
  return {"d", variant, "sys", std::move(answers)};
}

// Evaluation with a fixed primary score per item.
Evaluation fixed_scores(const Dataset& ds, const std::string& variant, const std::vector<double>& v) {
  Evaluation ev{ds.dataset_id, variant, "sys", Metric::F1, {}, {}, 0};
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    ev.items.push_back({ds.items[i].id, {{Metric::F1, v[i]}, v[i] == 1.0 ? 1.0 : 0.0}, false});
  ev.overall = aggregate(ev.items);
  return ev;
}

std::map<std::string, SimilarityProfile> profiles(const Dataset& ds, const std::vector<bool>& in_sim) {
  std::map<std::string, SimilarityProfile> m;
  for (std::size_t i = 0; i < ds.items.size(); ++i)
    m[ds.items[i].id] = {ds.items[i].id, {1}, 0, in_sim[i], false, std::nullopt};
  return m;
}

}  // namespace

TEST_CASE("prediction alignment") {
  const auto ds = extraction_dataset(10);
  std::map<std::string, Prediction> all;
  for (const auto& item : ds.items) all[item.id] = item.answers[0];

  CHECK(align_predictions(preds("full", all), ds, "full").missing_ids.empty());

  auto extra = all;
  extra["ghost"] = std::string("boo");
  try {
    align_predictions(preds("full", extra), ds, "full");
    FAIL("expected UnknownItemIds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnknownItemIds);
    CHECK_THAT(e.what(), Catch::Matchers::ContainsSubstring("ghost"));
  }

  auto partial = all;
  partial.erase("i3");
  partial.erase("i7");
  const auto loaded = align_predictions(preds("full", partial), ds, "full");
  CHECK(loaded.missing_ids == std::vector<std::string>{"i3", "i7"});
  const auto ev = evaluate(ds, loaded);
  CHECK(ev.missing == 2);
  CHECK(ev.items[3].missing);
  CHECK(ev.items[3].score.primary.value == 0.0);
  CHECK_THAT(*ev.overall.mean_primary, WithinAbs(0.8, 1e-12));
  CHECK(error_kind([&] { align_predictions(preds("full", partial), ds, "full", MissingPolicy::Strict); }) ==
        ErrorKind::MissingPredictions);

  CHECK(error_kind([&] { align_predictions(preds("k2", all), ds, "full"); }) ==
        ErrorKind::VariantMismatch);
  auto other = preds("full", all);
  other.dataset_id = "other";
  CHECK(error_kind([&] { align_predictions(other, ds, "full"); }) == ErrorKind::VariantMismatch);

  auto wrong_kind = all;
  wrong_kind["i0"] = 1;
  CHECK(error_kind([&] { align_predictions(preds("full", wrong_kind), ds, "full"); }) ==
        ErrorKind::KindMismatch);
}

TEST_CASE("prediction file parsing") {
  const json good = {{"header", {{"dataset_id", "d"}, {"variant", "k2"}, {"system", "bidaf"}}},
                     {"predictions", {{"a", "x"}, {"b", 2}}}};
  const auto set = parse_predictions(good, "p.json");
  CHECK(set.system_name == "bidaf");
  CHECK(std::get<std::string>(set.answers.at("a")) == "x");
  CHECK(std::get<int>(set.answers.at("b")) == 2);

  json no_header = good;
  no_header.erase("header");
  CHECK(error_kind([&] { parse_predictions(no_header, "p"); }) == ErrorKind::MalformedFile);
  json bad_variant = good;
  bad_variant["header"]["variant"] = "k3";
  CHECK(error_kind([&] { parse_predictions(bad_variant, "p"); }) == ErrorKind::MalformedFile);
  json bad_value = good;
  bad_value["predictions"]["c"] = json::array();
  CHECK(error_kind([&] { parse_predictions(bad_value, "p"); }) == ErrorKind::KindMismatch);
}

TEST_CASE("evaluation aggregates") {
  SECTION("hand-computed F1 mean") {
    Dataset ds;
    ds.dataset_id = "d";
    ds.items = {{"a", QuestionStyle::Extraction, "November 2014 x", "q", {"November 2014"}},
                {"b", QuestionStyle::Extraction, "November 2014 x", "q", {"November 2014"}},
                {"c", QuestionStyle::Extraction, "November 2014 x", "q", {"November 2014"}}};
    const auto ev = evaluate(ds, align_predictions(preds("full", {{"a", std::string("November 2014")},
                                                                   {"b", std::string("late November 2014")},
                                                                   {"c", std::string("Sony")}}),
                                                   ds, "full"));
    CHECK_THAT(100.0 * *ev.overall.mean_primary, WithinAbs(60.0, 1e-9));
    CHECK_THAT(100.0 * *ev.overall.mean_em, WithinAbs(100.0 / 3.0, 1e-9));
  }
  SECTION("all exact answers") {
    const auto ds = extraction_dataset(6);
    std::map<std::string, Prediction> all;
    for (const auto& item : ds.items) all[item.id] = item.answers[0];
    CHECK(*evaluate(ds, align_predictions(preds("full", all), ds, "full")).overall.mean_primary == 1.0);
  }
  SECTION("multiple choice accuracy") {
    Dataset ds;
    ds.dataset_id = "d";
    ds.style = QuestionStyle::MultipleChoice;
    std::map<std::string, Prediction> answers;
    for (int i = 0; i < 4; ++i) {
      ds.items.push_back({"m" + std::to_string(i), QuestionStyle::MultipleChoice, "c", "q", {},
                          {"yes", "no"}, 0});
      answers["m" + std::to_string(i)] = i % 2;
    }
    const auto ev = evaluate(ds, align_predictions(preds("full", answers), ds, "full"));
    CHECK(ev.metric == Metric::Accuracy);
    CHECK(100.0 * *ev.overall.mean_primary == 50.0);
    CHECK_FALSE(ev.overall.mean_em);
  }
  SECTION("record order does not matter") {
    const auto ds = extraction_dataset(5);
    const json a = json::parse(R"({"header":{"dataset_id":"d","variant":"full","system":"s"},
      "predictions":{"i0":"alpha 0","i1":"beta","i2":"gamma 2","i3":"x","i4":"alpha"}})");
    const json b = json::parse(R"({"header":{"dataset_id":"d","variant":"full","system":"s"},
      "predictions":{"i4":"alpha","i3":"x","i2":"gamma 2","i1":"beta","i0":"alpha 0"}})");
    const auto ea = evaluate(ds, align_predictions(parse_predictions(a, "a"), ds, "full"));
    const auto eb = evaluate(ds, align_predictions(parse_predictions(b, "b"), ds, "full"));
    for (std::size_t i = 0; i < 5; ++i) CHECK(ea.items[i].score.primary.value == eb.items[i].score.primary.value);
    double sum = 0;
    for (const auto& r : ea.items) sum += r.score.primary.value;
    CHECK_THAT(*ea.overall.mean_primary, WithinAbs(sum / 5.0, 1e-9));
  }
}

TEST_CASE("hard subset definition") {
  CHECK(classify(0.0, false) == Subset::Hard);
  CHECK(classify(0.0, true) == Subset::Easy);
  CHECK(classify(0.1, false) == Subset::Easy);
  CHECK(classify(0.1, true) == Subset::Easy);

  const auto ds = extraction_dataset(8);
  const std::vector<double> k2{0, 0, 0, 0, 0.2, 1, 0, 0.5};
  const std::vector<bool> in_sim{false, false, true, false, false, false, true, true};
  const auto res = partition(ds, fixed_scores(ds, "k2", k2), profiles(ds, in_sim), Metric::F1);
  CHECK(res.hard_count == 3);
  CHECK(res.total == 8);
  CHECK(100.0 * static_cast<double>(res.hard_count) / static_cast<double>(res.total) == 37.5);
  REQUIRE(res.assignments.size() == 8);
  CHECK(res.assignments[0].subset == Subset::Hard);
  CHECK(res.assignments[3].subset == Subset::Hard);
  CHECK(res.assignments[4].subset == Subset::Easy);

  CHECK(error_kind([&] { partition(ds, fixed_scores(ds, "full", k2), profiles(ds, in_sim), Metric::F1); }) ==
        ErrorKind::VariantMismatch);
  auto short_profiles = profiles(ds, in_sim);
  short_profiles.erase("i5");
  CHECK(error_kind([&] { partition(ds, fixed_scores(ds, "k2", k2), short_profiles, Metric::F1); }) ==
        ErrorKind::CoverageGap);
}

TEST_CASE("partition properties") {
  std::mt19937 rng(77);
  std::bernoulli_distribution coin(0.5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const auto ds = extraction_dataset(200);
  std::vector<double> k2(200);
  std::vector<bool> in_sim(200);
  for (std::size_t i = 0; i < 200; ++i) {
    k2[i] = coin(rng) ? 0.0 : unit(rng);
    in_sim[i] = coin(rng);
  }
  const auto prof = profiles(ds, in_sim);
  const auto a = partition(ds, fixed_scores(ds, "k2", k2), prof, Metric::F1);
  const auto b = partition(ds, fixed_scores(ds, "k2", k2), prof, Metric::F1);
  std::size_t hard = 0;
  for (std::size_t i = 0; i < 200; ++i) {
    CHECK(a.assignments[i].item_id == ds.items[i].id);
    CHECK(a.assignments[i].subset == b.assignments[i].subset);
    hard += a.assignments[i].subset == Subset::Hard;
  }
  CHECK(hard == a.hard_count);

  // raising one zero score can only move an item out of the hard subset
  for (std::size_t i = 0; i < 200; ++i) {
    if (k2[i] != 0.0) continue;
    auto raised = k2;
    raised[i] = 0.3;
    const auto c = partition(ds, fixed_scores(ds, "k2", raised), prof, Metric::F1);
    for (std::size_t j = 0; j < 200; ++j) {
      if (j == i) CHECK(c.assignments[j].subset == Subset::Easy);
      else CHECK(c.assignments[j].subset == a.assignments[j].subset);
    }
  }
}

TEST_CASE("hard metric selection") {
  const auto ds = extraction_dataset(2);
  Evaluation ev{ds.dataset_id, "k2", "sys", Metric::F1, {}, {}, 0};
  ev.items = {{"i0", {{Metric::F1, 0.4}, 0.0}, false}, {"i1", {{Metric::F1, 0.0}, 0.0}, false}};
  const auto prof = profiles(ds, {false, false});
  CHECK(partition(ds, ev, prof, Metric::F1).hard_count == 1);
  CHECK(partition(ds, ev, prof, Metric::EM).hard_count == 2);
}

TEST_CASE("solved ratio") {
  auto ds = extraction_dataset(2);
  CHECK(solved_ratio_k2(ds, fixed_scores(ds, "k2", {0.5, 0.49})).percent() == 50.0);
  CHECK(solved_ratio_k2(ds, fixed_scores(ds, "k2", {1.0, 1.0})).percent() == 100.0);
  CHECK(solved_ratio_k2(ds, fixed_scores(ds, "k2", {0.0, 0.0})).percent() == 0.0);
  CHECK(solved_ratio_k2(ds, fixed_scores(ds, "k2", {0.2, 0.2}), 0.2).numerator == 2);
  CHECK(error_kind([&] { solved_ratio_k2(ds, fixed_scores(ds, "k4", {1, 1})); }) ==
        ErrorKind::VariantMismatch);
  ds.style = QuestionStyle::MultipleChoice;
  CHECK(error_kind([&] { solved_ratio_k2(ds, fixed_scores(ds, "k2", {1, 1})); }) ==
        ErrorKind::WrongStyle);
}

TEST_CASE("subset evaluation") {
  const auto ds = extraction_dataset(4);
  const auto full = fixed_scores(ds, "full", {1.0, 0.5, 0.0, 0.25});
  std::vector<SubsetAssignment> all_easy;
  for (const auto& item : ds.items) all_easy.push_back({item.id, Subset::Easy, {}});
  const auto s = subset_evaluate(all_easy, ds, full);
  CHECK(s.hard.count == 0);
  CHECK_FALSE(s.hard.mean_primary);
  CHECK_THAT(*s.easy.mean_primary, WithinAbs(0.4375, 1e-12));

  auto mixed = all_easy;
  mixed[2].subset = Subset::Hard;
  mixed[3].subset = Subset::Hard;
  const auto m = subset_evaluate(mixed, ds, full);
  CHECK(m.hard.count == 2);
  CHECK_THAT(*m.hard.mean_primary, WithinAbs(0.125, 1e-12));
  CHECK_THAT(*m.easy.mean_primary, WithinAbs(0.75, 1e-12));

  const auto zeros = fixed_scores(ds, "full", {1.0, 0.5, 0.0, 0.0});
  CHECK(*subset_evaluate(mixed, ds, zeros).hard.mean_primary == 0.0);

  CHECK(error_kind([&] { subset_evaluate(mixed, ds, fixed_scores(ds, "k2", {0, 0, 0, 0})); }) ==
        ErrorKind::VariantMismatch);
  mixed.pop_back();
  CHECK(error_kind([&] { subset_evaluate(mixed, ds, full); }) == ErrorKind::CoverageGap);
}

TEST_CASE("assignment files round trip") {
  testing::TempDir dir;
  const auto ds = extraction_dataset(3);
  const auto res = partition(ds, fixed_scores(ds, "k2", {0, 0.5, 0}),
                             profiles(ds, {false, false, true}), Metric::F1);
  {
    JsonlWriter w(dir / "a.jsonl", json{{"tool", "t"}});
    for (const auto& a : res.assignments) w.write(to_json(a));
    w.close();
  }
  std::optional<json> prov;
  const auto back = read_assignments(dir / "a.jsonl", &prov);
  REQUIRE(back.size() == 3);
  REQUIRE(prov);
  CHECK(back[0].subset == Subset::Hard);
  CHECK(back[1].evidence.k2_score == 0.5);
  CHECK(back[2].evidence.answer_in_most_similar);
}
