#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/partition.hpp"
#include "mrcsplit/random.hpp"
#include "mrcsplit/stats.hpp"

namespace mrcsplit {

// ---------------------------------------------------------------------------
// Label schema

enum class Validity { Unsolvable, SingleCandidate, Ambiguous, Valid };
enum class Skill { WordMatching, Paraphrasing, Knowledge, MetaWhole, MathLogic };
enum class Relation { Coreference, Causal, SpatialTemporal, None };

inline constexpr std::array<std::pair<Validity, std::string_view>, 4> kValidityNames{{
    {Validity::Unsolvable, "unsolvable"},
    {Validity::SingleCandidate, "single_candidate"},
    {Validity::Ambiguous, "ambiguous"},
    {Validity::Valid, "valid"},
}};
inline constexpr std::array<std::pair<Skill, std::string_view>, 5> kSkillNames{{
    {Skill::WordMatching, "word_matching"},
    {Skill::Paraphrasing, "paraphrasing"},
    {Skill::Knowledge, "knowledge"},
    {Skill::MetaWhole, "meta_whole"},
    {Skill::MathLogic, "math_logic"},
}};
inline constexpr std::array<std::pair<Relation, std::string_view>, 4> kRelationNames{{
    {Relation::Coreference, "coreference"},
    {Relation::Causal, "causal"},
    {Relation::SpatialTemporal, "spatial_temporal"},
    {Relation::None, "none"},
}};

template <typename E, std::size_t N>
std::string_view enum_name(const std::array<std::pair<E, std::string_view>, N>& names, E v) {
  for (const auto& [e, n] : names)
    if (e == v) return n;
  return {};
}

template <typename E, std::size_t N>
std::optional<E> enum_parse(const std::array<std::pair<E, std::string_view>, N>& names,
                            std::string_view s) {
  for (const auto& [e, n] : names)
    if (n == s) return e;
  return std::nullopt;
}

inline std::string_view to_string(Validity v) { return enum_name(kValidityNames, v); }
inline std::string_view to_string(Skill v) { return enum_name(kSkillNames, v); }
inline std::string_view to_string(Relation v) { return enum_name(kRelationNames, v); }

/// Label schema served to annotation front ends.
inline json label_schema() {
  auto names = [](const auto& table) {
    json arr = json::array();
    for (const auto& [e, n] : table) arr.push_back(n);
    return arr;
  };
  return {
      {"validity", names(kValidityNames)},
      {"skill", names(kSkillNames)},
      {"relation", names(kRelationNames)},
      {"constraints",
       json::array({"skill is required iff validity is valid (exactly one skill)",
                    "multi_sentence is required iff validity is valid",
                    "relation is required iff multi_sentence is true ('none' allowed)"})},
      {"definitions",
       {{"unsolvable", "the context coupled with the question does not reasonably give the answer"},
        {"single_candidate", "the question does not have multiple candidate answers"},
        {"ambiguous",
         "the question does not have a unique, decidable answer, or multiple possible answers "
         "are not covered by the gold answers"},
        {"word_matching", "matching the context and question words"},
        {"paraphrasing", "using lexical and grammatical knowledge"},
        {"knowledge", "inference using commonsense and/or world knowledge"},
        {"meta_whole",
         "understanding of meta terms such as 'author' and 'writer', and comprehending the "
         "general context"},
        {"math_logic",
         "using mathematical and logical knowledge, including multiple-choice questions that ask "
         "which option is not true"},
        {"multi_sentence",
         "gathering cues from multiple sentences; treat a subordinate clause as a sentence"}}},
  };
}

// ---------------------------------------------------------------------------
// Tasks

struct AnnotationTask {
  std::string task_id;
  QuestionStyle style = QuestionStyle::Extraction;
  std::string context;
  std::string question;
  std::vector<std::string> answers;
  std::vector<std::string> options;
  int correct = -1;
};

/// Kept apart from the task payload; never served to annotators.
struct HiddenTaskInfo {
  std::string task_id;
  std::string item_id;
  Subset subset = Subset::Easy;
  std::map<std::string, double> baseline_scores;  // system -> full-question score
};

struct AnnotationSample {
  std::vector<AnnotationTask> tasks;
  std::vector<HiddenTaskInfo> hidden;  // same order as tasks
};

inline ordered_json to_json(const AnnotationTask& t) {
  ordered_json j;
  j["task_id"] = t.task_id;
  j["style"] = std::string(to_string(t.style));
  j["context"] = t.context;
  j["question"] = t.question;
  if (t.style == QuestionStyle::MultipleChoice) {
    j["options"] = t.options;
    j["correct"] = t.correct;
  } else {
    j["answers"] = t.answers;
  }
  return j;
}

inline AnnotationTask task_from_json(const json& j) {
  AnnotationTask t;
  t.task_id = j.at("task_id");
  auto style = parse_style(j.at("style").get<std::string>());
  if (!style) throw Error(ErrorKind::SchemaViolation, "unknown style in task " + t.task_id);
  t.style = *style;
  t.context = j.at("context");
  t.question = j.at("question");
  if (t.style == QuestionStyle::MultipleChoice) {
    t.options = j.at("options").get<std::vector<std::string>>();
    t.correct = j.at("correct");
  } else {
    t.answers = j.at("answers").get<std::vector<std::string>>();
  }
  return t;
}

inline ordered_json to_json(const HiddenTaskInfo& h) {
  ordered_json j;
  j["task_id"] = h.task_id;
  j["item_id"] = h.item_id;
  j["subset"] = std::string(to_string(h.subset));
  ordered_json scores = ordered_json::object();
  for (const auto& [sys, v] : h.baseline_scores) scores[sys] = v;
  j["baseline_scores"] = scores;
  return j;
}

inline HiddenTaskInfo hidden_from_json(const json& j) {
  HiddenTaskInfo h;
  h.task_id = j.at("task_id");
  h.item_id = j.at("item_id");
  h.subset = j.at("subset").get<std::string>() == "hard" ? Subset::Hard : Subset::Easy;
  if (j.contains("baseline_scores"))
    h.baseline_scores = j["baseline_scores"].get<std::map<std::string, double>>();
  return h;
}

inline constexpr std::size_t kDefaultSamplePerSubset = 30;

/// Uniform sample of `n_per_subset` items from each subset without
/// replacement, shuffled together. Deterministic in (inputs, seed).
inline AnnotationSample sample_for_annotation(std::span<const SubsetAssignment> assignments,
                                              const Dataset& dataset, std::size_t n_per_subset,
                                              std::uint64_t seed,
                                              std::span<const Evaluation> baselines = {}) {
  std::map<std::string, Subset> subset_of;
  for (const auto& a : assignments) subset_of.emplace(a.item_id, a.subset);
  std::vector<std::size_t> pools[2];
  for (std::size_t i = 0; i < dataset.items.size(); ++i) {
    auto it = subset_of.find(dataset.items[i].id);
    if (it == subset_of.end())
      throw Error(ErrorKind::CoverageGap, dataset.items[i].id + ": no subset assignment");
    pools[it->second == Subset::Hard].push_back(i);
  }
  SeededRng rng(seed);
  std::vector<std::pair<std::size_t, Subset>> picked;
  for (Subset s : {Subset::Easy, Subset::Hard}) {
    const auto& pool = pools[s == Subset::Hard];
    if (pool.size() < n_per_subset)
      throw Error(ErrorKind::SubsetTooSmall, std::string(to_string(s)) + " subset has " +
                                                 std::to_string(pool.size()) + " items, need " +
                                                 std::to_string(n_per_subset));
    for (std::size_t k : rng.sample(pool.size(), n_per_subset)) picked.emplace_back(pool[k], s);
  }
  rng.shuffle(picked);

  std::vector<std::map<std::string, const ItemResult*>> score_maps;
  for (const auto& ev : baselines) score_maps.push_back(ev.by_id());

  AnnotationSample out;
  std::set<std::string> used;
  for (const auto& [idx, subset] : picked) {
    const auto& item = dataset.items[idx];
    std::string id;
    do {
      id = rng.hex_id();
    } while (!used.insert(id).second);
    out.tasks.push_back({id, item.style, item.context, item.question, item.answers, item.options,
                         item.correct});
    HiddenTaskInfo h{id, item.id, subset, {}};
    for (std::size_t b = 0; b < baselines.size(); ++b) {
      auto s = score_maps[b].find(item.id);
      if (s != score_maps[b].end())
        h.baseline_scores[baselines[b].system_name] = s->second->score.primary.value;
    }
    out.hidden.push_back(std::move(h));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Records

struct AnnotationRecord {
  std::string task_id;
  Validity validity = Validity::Valid;
  std::optional<Skill> skill;
  std::optional<bool> multi_sentence;
  std::optional<Relation> relation;
  std::string annotator_id;
  std::string timestamp;
  std::string note;
};

/// Empty iff the record satisfies the label schema.
inline std::vector<std::string> validate_record(const AnnotationRecord& r) {
  std::vector<std::string> v;
  const bool valid = r.validity == Validity::Valid;
  if (r.task_id.empty()) v.push_back("task_id is empty");
  if (r.annotator_id.empty()) v.push_back("annotator_id is empty");
  if (valid && !r.skill) v.push_back("skill is required when validity is valid");
  if (!valid && r.skill) v.push_back("skill is only allowed when validity is valid");
  if (valid && !r.multi_sentence) v.push_back("multi_sentence is required when validity is valid");
  if (!valid && r.multi_sentence) v.push_back("multi_sentence is only allowed when validity is valid");
  const bool multi = r.multi_sentence.value_or(false);
  if (multi && !r.relation) v.push_back("relation is required when multi_sentence is true");
  if (!multi && r.relation) v.push_back("relation is only allowed when multi_sentence is true");
  return v;
}

struct ParsedRecord {
  std::optional<AnnotationRecord> record;
  std::vector<std::string> violations;
};

/// Parses a wire record; unknown labels or wrongly typed fields become
/// violations, followed by the schema checks of validate_record.
inline ParsedRecord parse_record(const json& j) {
  ParsedRecord out;
  auto& v = out.violations;
  if (!j.is_object()) {
    v.push_back("record must be an object");
    return out;
  }
  static const std::set<std::string> kFields{"task_id",  "validity",     "skill",     "multi_sentence",
                                             "relation", "annotator_id", "timestamp", "note"};
  for (const auto& [k, _] : j.items())
    if (!kFields.contains(k)) v.push_back("unknown field '" + k + "'");

  AnnotationRecord r;
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) {
      if (required) v.push_back(std::string("missing field '") + key + "'");
      return std::nullopt;
    }
    if (!j[key].is_string()) {
      v.push_back(std::string("field '") + key + "' must be a string");
      return std::nullopt;
    }
    return j[key].get<std::string>();
  };
  r.task_id = str("task_id", true).value_or("");
  r.annotator_id = str("annotator_id", true).value_or("");
  r.timestamp = str("timestamp", false).value_or("");
  r.note = str("note", false).value_or("");
  if (auto s = str("validity", true)) {
    if (auto e = enum_parse(kValidityNames, *s)) r.validity = *e;
    else v.push_back("unknown validity '" + *s + "'");
  }
  if (auto s = str("skill", false)) {
    if (auto e = enum_parse(kSkillNames, *s)) r.skill = *e;
    else v.push_back("unknown skill '" + *s + "'");
  }
  if (auto s = str("relation", false)) {
    if (auto e = enum_parse(kRelationNames, *s)) r.relation = *e;
    else v.push_back("unknown relation '" + *s + "'");
  }
  if (j.contains("multi_sentence") && !j["multi_sentence"].is_null()) {
    if (j["multi_sentence"].is_boolean()) r.multi_sentence = j["multi_sentence"].get<bool>();
    else v.push_back("field 'multi_sentence' must be a boolean");
  }
  if (!v.empty()) return out;
  auto schema = validate_record(r);
  if (!schema.empty()) {
    out.violations = std::move(schema);
    return out;
  }
  out.record = std::move(r);
  return out;
}

inline ordered_json to_json(const AnnotationRecord& r) {
  ordered_json j;
  j["task_id"] = r.task_id;
  j["validity"] = std::string(to_string(r.validity));
  if (r.skill) j["skill"] = std::string(to_string(*r.skill));
  if (r.multi_sentence) j["multi_sentence"] = *r.multi_sentence;
  if (r.relation) j["relation"] = std::string(to_string(*r.relation));
  j["annotator_id"] = r.annotator_id;
  j["timestamp"] = r.timestamp;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

// ---------------------------------------------------------------------------
// Distributions

struct DistributionRow {
  std::string block;  // validity | skill | relation | relation_of_multi
  std::string label;
  std::size_t count[2] = {0, 0};        // easy, hard
  std::size_t denominator[2] = {0, 0};  // easy, hard
};

struct LabelDistribution {
  std::size_t items[2] = {0, 0};
  std::size_t valid[2] = {0, 0};
  std::vector<DistributionRow> rows;  // table row order
};

inline std::map<std::string, Subset> subset_join(std::span<const HiddenTaskInfo> hidden) {
  std::map<std::string, Subset> out;
  for (const auto& h : hidden) out.emplace(h.task_id, h.subset);
  return out;
}

/// Validity shares are over all records of a subset; skill, multi-sentence
/// and relation shares over its valid records. Relation shares are also given
/// over multi-sentence records ("relation_of_multi").
inline LabelDistribution label_distribution(std::span<const AnnotationRecord> records,
                                            const std::map<std::string, Subset>& subset_of) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecords, "no annotation records");
  LabelDistribution d;
  std::size_t validity[4][2] = {}, skill[5][2] = {}, relation[4][2] = {}, multi[2] = {};
  std::set<std::string> seen;
  for (const auto& r : records) {
    auto it = subset_of.find(r.task_id);
    if (it == subset_of.end()) throw Error(ErrorKind::UnknownTaskId, "unknown task " + r.task_id);
    if (!seen.insert(r.task_id).second)
      throw Error(ErrorKind::SchemaViolation, "task " + r.task_id + " annotated twice");
    const int s = it->second == Subset::Hard;
    ++d.items[s];
    ++validity[static_cast<int>(r.validity)][s];
    if (r.validity != Validity::Valid) continue;
    ++d.valid[s];
    if (r.skill) ++skill[static_cast<int>(*r.skill)][s];
    if (r.multi_sentence.value_or(false)) {
      ++multi[s];
      if (r.relation) ++relation[static_cast<int>(*r.relation)][s];
    }
  }
  auto row = [&](std::string block, std::string label, const std::size_t* counts,
                 const std::size_t* denom) {
    DistributionRow r{std::move(block), std::move(label), {counts[0], counts[1]}, {denom[0], denom[1]}};
    d.rows.push_back(std::move(r));
  };
  for (const auto& [e, n] : kValidityNames) row("validity", std::string(n), validity[static_cast<int>(e)], d.items);
  for (const auto& [e, n] : kSkillNames) row("skill", std::string(n), skill[static_cast<int>(e)], d.valid);
  row("relation", "multi_sentence", multi, d.valid);
  for (const auto& [e, n] : kRelationNames) row("relation", std::string(n), relation[static_cast<int>(e)], d.valid);
  for (const auto& [e, n] : kRelationNames)
    row("relation_of_multi", std::string(n), relation[static_cast<int>(e)], multi);
  return d;
}

// ---------------------------------------------------------------------------
// Label / score correlation

struct CorrelationRow {
  std::string label;
  std::string system;
  std::size_t n = 0;
  std::optional<Correlation> result;  // empty when a vector is degenerate
  std::optional<double> permutation_p;
};

/// One row per (label, system). Validity labels use all annotated items;
/// skill, multi-sentence and relation labels use valid items only. Each
/// label is a 0/1 indicator paired with the item's full-question score.
inline std::vector<CorrelationRow> correlate_labels(std::span<const AnnotationRecord> records,
                                                    std::span<const HiddenTaskInfo> hidden,
                                                    std::size_t permutations = 0,
                                                    std::uint64_t seed = 0) {
  if (records.empty()) throw Error(ErrorKind::EmptyRecords, "no annotation records");
  std::map<std::string, const HiddenTaskInfo*> by_task;
  std::set<std::string> systems;
  for (const auto& h : hidden) {
    by_task.emplace(h.task_id, &h);
    for (const auto& [sys, _] : h.baseline_scores) systems.insert(sys);
  }
  for (const auto& r : records)
    if (!by_task.contains(r.task_id)) throw Error(ErrorKind::UnknownTaskId, "unknown task " + r.task_id);

  struct Label {
    std::string name;
    bool valid_only;
    std::function<bool(const AnnotationRecord&)> test;
  };
  std::vector<Label> labels;
  for (const auto& [e, n] : kValidityNames) {
    if (e == Validity::Valid) continue;
    labels.push_back({std::string(n), false, [e](const auto& r) { return r.validity == e; }});
  }
  for (const auto& [e, n] : kSkillNames)
    labels.push_back({std::string(n), true, [e](const auto& r) { return r.skill == e; }});
  labels.push_back({"multi_sentence", true, [](const auto& r) { return r.multi_sentence.value_or(false); }});
  for (const auto& [e, n] : kRelationNames)
    labels.push_back({std::string(n), true, [e](const auto& r) { return r.relation == e; }});

  std::vector<CorrelationRow> out;
  for (const auto& sys : systems) {
    for (const auto& label : labels) {
      std::vector<double> x, y;
      for (const auto& r : records) {
        if (label.valid_only && r.validity != Validity::Valid) continue;
        const auto& scores = by_task.at(r.task_id)->baseline_scores;
        auto s = scores.find(sys);
        if (s == scores.end()) continue;
        x.push_back(label.test(r) ? 1.0 : 0.0);
        y.push_back(s->second);
      }
      CorrelationRow row{label.name, sys, x.size(), std::nullopt, std::nullopt};
      try {
        row.result = pearson_r(x, y);
        if (permutations > 0) row.permutation_p = permutation_p(x, y, permutations, seed);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::DegenerateVector && e.kind() != ErrorKind::LengthMismatch) throw;
      }
      out.push_back(std::move(row));
    }
  }
  return out;
}

}  // namespace mrcsplit
