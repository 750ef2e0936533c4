#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/textproc.hpp"

namespace mrcsplit {

enum class Metric { EM, F1, RougeL, Accuracy };

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::EM: return "em";
    case Metric::F1: return "f1";
    case Metric::RougeL: return "rouge_l";
    case Metric::Accuracy: return "accuracy";
  }
  return "f1";
}

struct Score {
  Metric metric;
  double value;
};

inline constexpr double kDefaultRougeBeta = 1.2;

inline Score exact_match(std::string_view pred, std::span<const std::string> golds) {
  if (golds.empty()) throw Error(ErrorKind::EmptyGolds, "exact_match needs at least one gold");
  const std::string p = normalize_answer(pred);
  for (const auto& g : golds)
    if (normalize_answer(g) == p) return {Metric::EM, 1.0};
  return {Metric::EM, 0.0};
}

inline double token_f1_single(const std::vector<std::string>& pred,
                              const std::vector<std::string>& gold) {
  if (pred.empty() && gold.empty()) return 1.0;
  if (pred.empty() || gold.empty()) return 0.0;
  std::map<std::string_view, std::size_t> gold_counts;
  for (const auto& t : gold) ++gold_counts[t];
  std::size_t common = 0;
  for (const auto& t : pred) {
    auto it = gold_counts.find(t);
    if (it != gold_counts.end() && it->second > 0) {
      --it->second;
      ++common;
    }
  }
  if (common == 0) return 0.0;
  const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
  const double recall = static_cast<double>(common) / static_cast<double>(gold.size());
  return 2.0 * precision * recall / (precision + recall);
}

/// Bag-of-normalized-tokens F1, maximized over golds.
inline Score token_f1(std::string_view pred, std::span<const std::string> golds) {
  if (golds.empty()) throw Error(ErrorKind::EmptyGolds, "token_f1 needs at least one gold");
  const auto p = normalized_tokens(pred);
  double best = 0.0;
  for (const auto& g : golds) best = std::max(best, token_f1_single(p, normalized_tokens(g)));
  return {Metric::F1, best};
}

inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// LCS F-measure from the LCS length and the two sequence lengths.
inline double rouge_l_from_lcs(std::size_t lcs, std::size_t pred_len, std::size_t gold_len,
                               double beta) {
  if (pred_len == 0 && gold_len == 0) return 1.0;
  if (lcs == 0) return 0.0;
  const double p = static_cast<double>(lcs) / static_cast<double>(pred_len);
  const double r = static_cast<double>(lcs) / static_cast<double>(gold_len);
  const double b2 = beta * beta;
  return (1.0 + b2) * p * r / (r + b2 * p);
}

inline std::vector<std::string> rouge_tokens(std::string_view text) {
  std::vector<std::string> out;
  for (auto& t : tokenize(text)) out.push_back(utf8::lowercase(t.surface));
  return out;
}

inline Score rouge_l_tokens(std::span<const std::string> pred, std::span<const std::string> gold,
                            double beta = kDefaultRougeBeta) {
  return {Metric::RougeL,
          rouge_l_from_lcs(lcs_length(pred, gold), pred.size(), gold.size(), beta)};
}

/// Rouge-L over lowercased tokens; no answer normalization is applied.
inline Score rouge_l(std::string_view pred, std::string_view gold, double beta = kDefaultRougeBeta) {
  if (!(beta > 0)) throw Error(ErrorKind::SchemaViolation, "rouge_l beta must be positive");
  return rouge_l_tokens(rouge_tokens(pred), rouge_tokens(gold), beta);
}

inline Score accuracy(int predicted_index, const CanonicalItem& item) {
  if (item.style != QuestionStyle::MultipleChoice)
    throw Error(ErrorKind::WrongStyle, "accuracy needs a multiple_choice item (" + item.id + ")");
  if (predicted_index < 0 || static_cast<std::size_t>(predicted_index) >= item.options.size())
    throw Error(ErrorKind::IndexOutOfRange,
                item.id + ": predicted index " + std::to_string(predicted_index) + " with " +
                    std::to_string(item.options.size()) + " options");
  return {Metric::Accuracy, predicted_index == item.correct ? 1.0 : 0.0};
}

using Prediction = std::variant<std::string, int>;

struct ItemScore {
  Score primary;             // F1 / Rouge-L / accuracy by style
  std::optional<double> em;  // extraction only

  /// Score used for the hard-subset test.
  double value(Metric m) const {
    if (m == Metric::EM && em) return *em;
    return primary.value;
  }
};

inline Metric primary_metric(QuestionStyle s) {
  switch (s) {
    case QuestionStyle::Extraction: return Metric::F1;
    case QuestionStyle::Description: return Metric::RougeL;
    case QuestionStyle::MultipleChoice: return Metric::Accuracy;
  }
  return Metric::F1;
}

inline ItemScore score_item(const CanonicalItem& item, const Prediction& prediction,
                            double beta = kDefaultRougeBeta) {
  if (item.style == QuestionStyle::MultipleChoice) {
    if (!std::holds_alternative<int>(prediction))
      throw Error(ErrorKind::KindMismatch, item.id + ": expected an option index");
    return {accuracy(std::get<int>(prediction), item), std::nullopt};
  }
  if (!std::holds_alternative<std::string>(prediction))
    throw Error(ErrorKind::KindMismatch, item.id + ": expected an answer string");
  const auto& text = std::get<std::string>(prediction);
  if (item.style == QuestionStyle::Extraction)
    return {token_f1(text, item.answers), exact_match(text, item.answers).value};

  if (item.answers.empty()) throw Error(ErrorKind::EmptyGolds, item.id + ": no gold answers");
  const auto pred_tokens = rouge_tokens(text);
  double best = 0.0;
  for (const auto& g : item.answers)
    best = std::max(best, rouge_l_tokens(pred_tokens, rouge_tokens(g), beta).value);
  return {{Metric::RougeL, best}, std::nullopt};
}

/// Score for an item that received no prediction.
inline ItemScore absent_score(const CanonicalItem& item) {
  return {{primary_metric(item.style), 0.0},
          item.style == QuestionStyle::Extraction ? std::optional<double>(0.0) : std::nullopt};
}

}  // namespace mrcsplit
