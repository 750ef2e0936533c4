#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/metrics.hpp"

namespace mrcsplit {

inline bool is_known_variant(std::string_view v) {
  return v == "full" || v == "k1" || v == "k2" || v == "k4" || v == "sim_only";
}

struct PredictionSet {
  std::string dataset_id;
  std::string variant;
  std::string system_name;
  std::map<std::string, Prediction> answers;
};

struct LoadedPredictions {
  PredictionSet set;
  std::vector<std::string> missing_ids;  // dataset order
};

enum class MissingPolicy { ScoreZero, Strict };

inline PredictionSet parse_predictions(const json& root, const std::string& name) {
  if (!root.is_object() || !root.contains("header") || !root["header"].is_object())
    throw Error(ErrorKind::MalformedFile, name + ": missing object 'header'");
  if (!root.contains("predictions") || !root["predictions"].is_object())
    throw Error(ErrorKind::MalformedFile, name + ": missing object 'predictions'");
  const auto& h = root["header"];
  for (const char* key : {"dataset_id", "variant", "system"})
    if (!h.contains(key) || !h[key].is_string())
      throw Error(ErrorKind::MalformedFile, name + ": header." + key + " must be a string");
  PredictionSet set{h["dataset_id"], h["variant"], h["system"], {}};
  if (!is_known_variant(set.variant))
    throw Error(ErrorKind::MalformedFile, name + ": unknown variant '" + set.variant + "'");
  for (const auto& [id, v] : root["predictions"].items()) {
    if (v.is_string()) set.answers.emplace(id, v.get<std::string>());
    else if (v.is_number_integer()) set.answers.emplace(id, v.get<int>());
    else
      throw Error(ErrorKind::KindMismatch,
                  name + ": prediction for '" + id + "' must be a string or an integer");
  }
  return set;
}

/// Aligns a prediction file with `dataset`. `variant` is the variant the
/// caller expects; the file header must carry it.
inline LoadedPredictions align_predictions(PredictionSet set, const Dataset& dataset,
                                           std::string_view variant,
                                           MissingPolicy policy = MissingPolicy::ScoreZero) {
  if (set.variant != variant)
    throw Error(ErrorKind::VariantMismatch, "predictions are for variant '" + set.variant +
                                                "' but '" + std::string(variant) + "' is required");
  if (set.dataset_id != dataset.dataset_id)
    throw Error(ErrorKind::VariantMismatch, "predictions are for dataset '" + set.dataset_id +
                                                "' but dataset is '" + dataset.dataset_id + "'");
  const auto idx = dataset.index();
  std::vector<std::string> unknown;
  for (const auto& [id, pred] : set.answers) {
    auto it = idx.find(id);
    if (it == idx.end()) {
      unknown.push_back(id);
      continue;
    }
    const bool wants_index = dataset.items[it->second].style == QuestionStyle::MultipleChoice;
    if (wants_index != std::holds_alternative<int>(pred))
      throw Error(ErrorKind::KindMismatch,
                  "prediction for '" + id + "' has the wrong kind for style " +
                      std::string(to_string(dataset.items[it->second].style)));
  }
  if (!unknown.empty()) {
    std::string msg = std::to_string(unknown.size()) + " unknown id(s):";
    for (const auto& id : unknown) msg += " " + id;
    throw Error(ErrorKind::UnknownItemIds, msg);
  }
  LoadedPredictions out{std::move(set), {}};
  for (const auto& item : dataset.items)
    if (!out.set.answers.contains(item.id)) out.missing_ids.push_back(item.id);
  if (policy == MissingPolicy::Strict && !out.missing_ids.empty())
    throw Error(ErrorKind::MissingPredictions,
                std::to_string(out.missing_ids.size()) + " item(s) have no prediction, first: " +
                    out.missing_ids.front());
  return out;
}

inline LoadedPredictions load_predictions(const std::filesystem::path& file, const Dataset& dataset,
                                          std::string_view variant,
                                          MissingPolicy policy = MissingPolicy::ScoreZero) {
  json root;
  try {
    root = json::parse(read_file(file));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedFile, file.string() + ": " + e.what());
  }
  return align_predictions(parse_predictions(root, file.string()), dataset, variant, policy);
}

struct ItemResult {
  std::string item_id;
  ItemScore score;
  bool missing = false;
};

struct Aggregate {
  std::size_t count = 0;
  std::optional<double> mean_primary;  // fraction in [0,1]; empty for an empty set
  std::optional<double> mean_em;       // extraction only
};

inline Aggregate aggregate(std::span<const ItemResult> results) {
  Aggregate a;
  a.count = results.size();
  if (results.empty()) return a;
  double sum = 0.0, em = 0.0;
  bool has_em = true;
  for (const auto& r : results) {
    sum += r.score.primary.value;
    if (r.score.em) em += *r.score.em;
    else has_em = false;
  }
  a.mean_primary = sum / static_cast<double>(results.size());
  if (has_em) a.mean_em = em / static_cast<double>(results.size());
  return a;
}

struct Evaluation {
  std::string dataset_id;
  std::string variant;
  std::string system_name;
  Metric metric = Metric::F1;
  std::vector<ItemResult> items;  // dataset order
  Aggregate overall;
  std::size_t missing = 0;

  std::map<std::string, const ItemResult*> by_id() const {
    std::map<std::string, const ItemResult*> m;
    for (const auto& r : items) m.emplace(r.item_id, &r);
    return m;
  }
};

inline Evaluation evaluate(const Dataset& dataset, const LoadedPredictions& preds,
                           double beta = kDefaultRougeBeta) {
  Evaluation ev{dataset.dataset_id, preds.set.variant, preds.set.system_name,
                primary_metric(dataset.style), {}, {}, preds.missing_ids.size()};
  ev.items.reserve(dataset.items.size());
  for (const auto& item : dataset.items) {
    auto it = preds.set.answers.find(item.id);
    if (it == preds.set.answers.end()) ev.items.push_back({item.id, absent_score(item), true});
    else ev.items.push_back({item.id, score_item(item, it->second, beta), false});
  }
  ev.overall = aggregate(ev.items);
  return ev;
}

inline ordered_json to_json(const ItemResult& r) {
  ordered_json j;
  j["id"] = r.item_id;
  j["metric"] = std::string(to_string(r.score.primary.metric));
  j["score"] = r.score.primary.value;
  if (r.score.em) j["em"] = *r.score.em;
  j["missing"] = r.missing;
  return j;
}

/// Per-item score file: provenance header plus one record per item.
inline void write_scores(const std::filesystem::path& path, const Evaluation& ev, json provenance) {
  provenance["dataset_id"] = ev.dataset_id;
  provenance["variant"] = ev.variant;
  provenance["system"] = ev.system_name;
  JsonlWriter w(path, provenance);
  for (const auto& r : ev.items) w.write(to_json(r));
  w.close();
}

inline Evaluation read_scores(const std::filesystem::path& path) {
  JsonlFile f = read_jsonl(path);
  if (!f.provenance) throw Error(ErrorKind::MalformedFile, path.string() + ": missing provenance header");
  const json& h = *f.provenance;
  Evaluation ev;
  try {
    ev.dataset_id = h.at("dataset_id");
    ev.variant = h.at("variant");
    ev.system_name = h.at("system");
    for (const auto& rec : f.records) {
      const auto& v = rec.value;
      ItemResult r;
      r.item_id = v.at("id");
      const std::string metric = v.at("metric");
      Metric m = metric == "em"        ? Metric::EM
                 : metric == "rouge_l" ? Metric::RougeL
                 : metric == "accuracy" ? Metric::Accuracy
                                        : Metric::F1;
      ev.metric = m;
      r.score.primary = {m, v.at("score").get<double>()};
      if (v.contains("em")) r.score.em = v["em"].get<double>();
      r.missing = v.value("missing", false);
      ev.missing += r.missing;
      ev.items.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::MalformedFile, path.string() + ": " + e.what());
  }
  ev.overall = aggregate(ev.items);
  return ev;
}

}  // namespace mrcsplit
