#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/heuristics.hpp"
#include "mrcsplit/predictions.hpp"

namespace mrcsplit {

enum class Subset { Easy, Hard };

inline std::string_view to_string(Subset s) { return s == Subset::Hard ? "hard" : "easy"; }

struct PartitionEvidence {
  double k2_score = 0.0;
  bool answer_in_most_similar = false;
  bool zero_overlap = false;
};

struct SubsetAssignment {
  std::string item_id;
  Subset subset = Subset::Easy;
  PartitionEvidence evidence;
};

struct PartitionResult {
  std::vector<SubsetAssignment> assignments;  // dataset order
  std::size_t hard_count = 0;
  std::size_t total = 0;
};

/// Hard iff the k=2 score is not positive and the answer is outside the most
/// similar sentence.
inline Subset classify(double k2_score, bool answer_in_most_similar) {
  return (k2_score <= 0.0 && !answer_in_most_similar) ? Subset::Hard : Subset::Easy;
}

inline PartitionResult partition(const Dataset& dataset, const Evaluation& k2_scores,
                                 const std::map<std::string, SimilarityProfile>& profiles,
                                 Metric hard_metric) {
  if (k2_scores.variant != "k2")
    throw Error(ErrorKind::VariantMismatch,
                "partition needs k2 scores, got variant '" + k2_scores.variant + "'");
  const auto scores = k2_scores.by_id();
  PartitionResult out;
  out.total = dataset.items.size();
  for (const auto& item : dataset.items) {
    auto s = scores.find(item.id);
    if (s == scores.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no k2 score");
    auto p = profiles.find(item.id);
    if (p == profiles.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no similarity profile");
    const double k2 = s->second->score.value(hard_metric);
    SubsetAssignment a{item.id, classify(k2, p->second.answer_in_most_similar),
                       {k2, p->second.answer_in_most_similar, p->second.zero_overlap}};
    out.hard_count += a.subset == Subset::Hard;
    out.assignments.push_back(std::move(a));
  }
  return out;
}

/// Share of items whose k=2 score reaches 0.5 (inclusive), as a count pair.
struct Ratio {
  std::size_t numerator = 0;
  std::size_t denominator = 0;

  double percent() const {
    return denominator == 0 ? 0.0
                            : 100.0 * static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

inline constexpr double kSolvedThreshold = 0.5;

inline Ratio solved_ratio_k2(const Dataset& dataset, const Evaluation& k2_scores,
                             double threshold = kSolvedThreshold) {
  if (dataset.style == QuestionStyle::MultipleChoice)
    throw Error(ErrorKind::WrongStyle, "solved ratio is defined for extraction/description only");
  if (k2_scores.variant != "k2")
    throw Error(ErrorKind::VariantMismatch,
                "solved ratio needs k2 scores, got variant '" + k2_scores.variant + "'");
  const auto scores = k2_scores.by_id();
  Ratio r{0, dataset.items.size()};
  for (const auto& item : dataset.items) {
    auto s = scores.find(item.id);
    if (s == scores.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no k2 score");
    r.numerator += s->second->score.primary.value >= threshold;
  }
  return r;
}

struct SubsetScores {
  Aggregate easy;
  Aggregate hard;
};

inline SubsetScores subset_evaluate(std::span<const SubsetAssignment> assignments,
                                    const Dataset& dataset, const Evaluation& full) {
  if (full.variant != "full")
    throw Error(ErrorKind::VariantMismatch,
                "subset evaluation needs full-question scores, got '" + full.variant + "'");
  std::map<std::string, Subset> subset_of;
  for (const auto& a : assignments) subset_of.emplace(a.item_id, a.subset);
  const auto scores = full.by_id();
  std::vector<ItemResult> easy, hard;
  for (const auto& item : dataset.items) {
    auto a = subset_of.find(item.id);
    if (a == subset_of.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no subset assignment");
    auto s = scores.find(item.id);
    if (s == scores.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no full-question score");
    (a->second == Subset::Hard ? hard : easy).push_back(*s->second);
  }
  return {aggregate(easy), aggregate(hard)};
}

inline ordered_json to_json(const SubsetAssignment& a) {
  ordered_json j;
  j["id"] = a.item_id;
  j["subset"] = std::string(to_string(a.subset));
  j["evidence"] = {{"k2_score", a.evidence.k2_score},
                   {"answer_in_most_similar", a.evidence.answer_in_most_similar},
                   {"zero_overlap", a.evidence.zero_overlap}};
  return j;
}

inline std::vector<SubsetAssignment> read_assignments(const std::filesystem::path& path,
                                                      std::optional<json>* provenance = nullptr) {
  JsonlFile f = read_jsonl(path);
  if (provenance) *provenance = f.provenance;
  std::vector<SubsetAssignment> out;
  for (const auto& rec : f.records) {
    try {
      const auto& v = rec.value;
      SubsetAssignment a;
      a.item_id = v.at("id");
      const std::string subset = v.at("subset");
      if (subset != "easy" && subset != "hard")
        throw Error(ErrorKind::SchemaViolation, path.string() + ":" + std::to_string(rec.line) +
                                                    ": subset must be easy or hard");
      a.subset = subset == "hard" ? Subset::Hard : Subset::Easy;
      const auto& e = v.at("evidence");
      a.evidence = {e.at("k2_score").get<double>(), e.at("answer_in_most_similar").get<bool>(),
                    e.at("zero_overlap").get<bool>()};
      out.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedFile,
                  path.string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace mrcsplit
