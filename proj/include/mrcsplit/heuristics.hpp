#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "mrcsplit/corpus.hpp"
#include "mrcsplit/error.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/metrics.hpp"
#include "mrcsplit/textproc.hpp"

namespace mrcsplit {

struct TruncationSpec {
  std::size_t k = 1;
};

/// Keeps the first k question tokens by slicing the original bytes.
inline CanonicalItem truncate_question(const CanonicalItem& item, TruncationSpec spec) {
  if (spec.k < 1) throw Error(ErrorKind::SchemaViolation, "truncation k must be >= 1");
  const auto tokens = tokenize(item.question);
  if (tokens.empty()) throw Error(ErrorKind::EmptyQuestion, item.id + ": question has no tokens");
  CanonicalItem out = item;
  if (tokens.size() > spec.k) out.question = item.question.substr(0, tokens[spec.k - 1].end);
  return out;
}

inline Dataset truncated_variant(const Dataset& ds, TruncationSpec spec) {
  Dataset out = ds;
  for (auto& item : out.items) {
    item = truncate_question(item, spec);
    item.meta["variant"] = "k" + std::to_string(spec.k);
    item.meta["parent_id"] = item.id;
  }
  return out;
}

enum class OverlapMode {
  SentenceCount,  // every sentence occurrence of a question term counts
  MinCount,       // multiset intersection: min(question count, sentence count)
};

inline std::string_view to_string(OverlapMode m) {
  return m == OverlapMode::MinCount ? "min-count" : "sentence-count";
}

inline std::optional<OverlapMode> parse_overlap_mode(std::string_view s) {
  if (s == "min-count") return OverlapMode::MinCount;
  if (s == "sentence-count") return OverlapMode::SentenceCount;
  return std::nullopt;
}

struct HeuristicConfig {
  OverlapMode overlap_mode = OverlapMode::SentenceCount;
  const StopwordList* stopwords = &StopwordList::builtin();
  double beta = kDefaultRougeBeta;
};

inline std::size_t overlap(const ContentTermBag& question, const ContentTermBag& sentence,
                           OverlapMode mode) {
  std::size_t total = 0;
  for (const auto& [term, qn] : question.counts()) {
    const std::size_t sn = sentence.count(term);
    total += mode == OverlapMode::MinCount ? std::min(qn, sn) : sn;
  }
  return total;
}

inline std::vector<std::size_t> sentence_overlaps(const CanonicalItem& item,
                                                  std::span<const SentenceSpan> sentences,
                                                  const HeuristicConfig& cfg = {}) {
  const auto q_tokens = tokenize(item.question);
  const ContentTermBag q = content_terms(q_tokens, *cfg.stopwords);
  std::vector<std::size_t> out;
  out.reserve(sentences.size());
  for (const auto& s : sentences)
    out.push_back(overlap(q, content_terms(s.tokens, *cfg.stopwords), cfg.overlap_mode));
  return out;
}

/// Earliest index attaining the maximum.
inline std::size_t most_similar_index(std::span<const std::size_t> overlaps) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < overlaps.size(); ++i)
    if (overlaps[i] > overlaps[best]) best = i;
  return best;
}

struct SpanProjection {
  std::string item_id;
  std::size_t token_start = 0;
  std::size_t token_end = 0;  // exclusive
  double rouge_value = 0.0;
  bool no_lexical_anchor = false;

  bool operator==(const SpanProjection&) const = default;
};

struct SimilarityProfile {
  std::string item_id;
  std::vector<std::size_t> per_sentence_overlap;
  std::size_t most_similar_index = 0;
  bool answer_in_most_similar = false;
  bool zero_overlap = false;
  std::optional<SpanProjection> projection;
};

inline bool contains_sequence(const std::vector<std::string>& hay,
                              const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > hay.size()) return false;
  return std::search(hay.begin(), hay.end(), needle.begin(), needle.end()) != hay.end();
}

inline bool answer_in_sentence(const CanonicalItem& item, const SentenceSpan& sentence,
                               const std::optional<SpanProjection>& projection) {
  if (item.style == QuestionStyle::Extraction) {
    const auto sent =
        normalized_tokens(std::string_view(item.context).substr(sentence.start, sentence.end - sentence.start));
    for (const auto& g : item.answers)
      if (contains_sequence(sent, normalized_tokens(g))) return true;
    return false;
  }
  if (!projection)
    throw Error(ErrorKind::MissingProjection,
                item.id + ": " + std::string(to_string(item.style)) +
                    " items need a projected gold span");
  return projection->token_start < sentence.token_end && sentence.token_begin < projection->token_end;
}

inline constexpr std::size_t kUnboundedSpan = std::numeric_limits<std::size_t>::max();
inline constexpr std::size_t kSpanSlack = 8;

/// Context span (over tokens) with the highest Rouge-L against `target`.
/// Spans are limited to `max_len` tokens (default: target length + slack);
/// ties go to the earliest start, then the shortest span.
inline SpanProjection project_gold_span(const CanonicalItem& item, std::string_view target,
                                        double beta = kDefaultRougeBeta,
                                        std::optional<std::size_t> max_len = std::nullopt,
                                        std::size_t slack = kSpanSlack) {
  const auto ctx = rouge_tokens(item.context);
  const auto tgt = rouge_tokens(target);
  if (tgt.empty()) throw Error(ErrorKind::EmptyTarget, item.id + ": projection target is empty");
  if (ctx.empty()) throw Error(ErrorKind::EmptyContext, item.id + ": context is empty");
  const std::size_t limit = max_len.value_or(tgt.size() + slack);
  if (limit < 1) throw Error(ErrorKind::SchemaViolation, "max_len must be >= 1");

  const std::size_t n = ctx.size();
  const std::size_t m = tgt.size();
  SpanProjection best{item.id, 0, std::min(limit, n), 0.0, true};
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t start = 0; start < n; ++start) {
    std::fill(prev.begin(), prev.end(), 0);
    const std::size_t stop = limit >= n - start ? n : start + limit;
    for (std::size_t end = start + 1; end <= stop; ++end) {
      // Row for span [start, end) against the whole target.
      cur[0] = 0;
      for (std::size_t j = 1; j <= m; ++j)
        cur[j] = ctx[end - 1] == tgt[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
      std::swap(prev, cur);
      const double v = rouge_l_from_lcs(prev[m], end - start, m, beta);
      if (v > best.rouge_value) best = {item.id, start, end, v, false};
    }
  }
  return best;
}

/// Gold projection for Description (best over golds) and MultipleChoice
/// (the correct option); Extraction items project their first gold.
inline SpanProjection project_item(const CanonicalItem& item, double beta = kDefaultRougeBeta,
                                   std::optional<std::size_t> max_len = std::nullopt,
                                   std::size_t slack = kSpanSlack) {
  if (item.style == QuestionStyle::MultipleChoice) {
    if (item.correct < 0 || static_cast<std::size_t>(item.correct) >= item.options.size())
      throw Error(ErrorKind::IndexOutOfRange, item.id + ": correct index out of range");
    return project_gold_span(item, item.options[static_cast<std::size_t>(item.correct)], beta,
                             max_len, slack);
  }
  if (item.answers.empty()) throw Error(ErrorKind::EmptyTarget, item.id + ": no gold answers");
  if (item.style == QuestionStyle::Extraction)
    return project_gold_span(item, item.answers.front(), beta, max_len, slack);
  std::optional<SpanProjection> best;
  for (const auto& g : item.answers) {
    if (rouge_tokens(g).empty()) continue;
    auto p = project_gold_span(item, g, beta, max_len, slack);
    if (!best || p.rouge_value > best->rouge_value) best = p;
  }
  if (!best) throw Error(ErrorKind::EmptyTarget, item.id + ": all gold answers are empty");
  return *best;
}

inline bool needs_projection(QuestionStyle s) { return s != QuestionStyle::Extraction; }

inline SimilarityProfile build_profile(const CanonicalItem& item,
                                       std::span<const SentenceSpan> sentences,
                                       const std::optional<SpanProjection>& projection,
                                       const HeuristicConfig& cfg = {}) {
  if (sentences.empty()) throw Error(ErrorKind::EmptyContext, item.id + ": context has no sentences");
  SimilarityProfile p;
  p.item_id = item.id;
  p.per_sentence_overlap = sentence_overlaps(item, sentences, cfg);
  p.most_similar_index = most_similar_index(p.per_sentence_overlap);
  p.zero_overlap = p.per_sentence_overlap[p.most_similar_index] == 0;
  p.answer_in_most_similar = answer_in_sentence(item, sentences[p.most_similar_index], projection);
  if (needs_projection(item.style)) p.projection = projection;
  return p;
}

inline SimilarityProfile build_profile(const CanonicalItem& item, const HeuristicConfig& cfg = {}) {
  const auto sentences = segment_sentences(item.context);
  std::optional<SpanProjection> projection;
  if (needs_projection(item.style)) projection = project_item(item, cfg.beta);
  return build_profile(item, sentences, projection, cfg);
}

/// Replaces the context by its most similar sentence. Answers that do not
/// survive the cut are flagged gold_not_in_context.
inline CanonicalItem sim_only_context(const CanonicalItem& item, const SimilarityProfile& profile,
                                      std::span<const SentenceSpan> sentences) {
  if (profile.item_id != item.id)
    throw Error(ErrorKind::CoverageGap, "profile " + profile.item_id + " used for item " + item.id);
  if (profile.most_similar_index >= sentences.size())
    throw Error(ErrorKind::IndexOutOfRange, item.id + ": most similar sentence out of range");
  CanonicalItem out = item;
  if (sentences.size() > 1) {
    const auto& s = sentences[profile.most_similar_index];
    out.context = item.context.substr(s.start, s.end - s.start);
  }
  out.meta["variant"] = "sim_only";
  out.meta["parent_id"] = item.id;
  out.meta["sim_sentence"] = std::to_string(profile.most_similar_index);
  const bool missing = item.style == QuestionStyle::Extraction ? gold_missing_from_context(out)
                                                               : !profile.answer_in_most_similar;
  out.gold_not_in_context = missing;
  if (missing) out.meta["gold_not_in_context"] = "true";
  else out.meta.erase("gold_not_in_context");
  return out;
}

inline ordered_json to_json(const SpanProjection& p) {
  ordered_json j;
  j["id"] = p.item_id;
  j["token_start"] = p.token_start;
  j["token_end"] = p.token_end;
  j["rouge_l"] = p.rouge_value;
  j["no_lexical_anchor"] = p.no_lexical_anchor;
  return j;
}

inline SpanProjection projection_from_json(const json& j) {
  return {j.at("id"), j.at("token_start"), j.at("token_end"), j.at("rouge_l"),
          j.value("no_lexical_anchor", false)};
}

inline ordered_json to_json(const SimilarityProfile& p) {
  ordered_json j;
  j["id"] = p.item_id;
  j["overlaps"] = p.per_sentence_overlap;
  j["most_similar"] = p.most_similar_index;
  j["answer_in_most_similar"] = p.answer_in_most_similar;
  j["zero_overlap"] = p.zero_overlap;
  if (p.projection) j["projection"] = to_json(*p.projection);
  return j;
}

inline SimilarityProfile profile_from_json(const json& j) {
  SimilarityProfile p;
  p.item_id = j.at("id");
  p.per_sentence_overlap = j.at("overlaps").get<std::vector<std::size_t>>();
  p.most_similar_index = j.at("most_similar");
  p.answer_in_most_similar = j.at("answer_in_most_similar");
  p.zero_overlap = j.at("zero_overlap");
  if (j.contains("projection")) p.projection = projection_from_json(j["projection"]);
  return p;
}

template <typename T, typename Parse>
std::map<std::string, T> read_keyed(const std::filesystem::path& path, Parse parse,
                                    std::optional<json>* provenance) {
  JsonlFile f = read_jsonl(path);
  if (provenance) *provenance = f.provenance;
  std::map<std::string, T> out;
  for (const auto& rec : f.records) {
    try {
      T value = parse(rec.value);
      std::string id = rec.value.at("id");
      if (!out.emplace(id, std::move(value)).second)
        throw Error(ErrorKind::SchemaViolation, path.string() + ": duplicate id " + id);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedFile,
                  path.string() + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

inline std::map<std::string, SimilarityProfile> read_profiles(
    const std::filesystem::path& path, std::optional<json>* provenance = nullptr) {
  return read_keyed<SimilarityProfile>(path, profile_from_json, provenance);
}

inline std::map<std::string, SpanProjection> read_projections(
    const std::filesystem::path& path, std::optional<json>* provenance = nullptr) {
  return read_keyed<SpanProjection>(path, projection_from_json, provenance);
}

}  // namespace mrcsplit
