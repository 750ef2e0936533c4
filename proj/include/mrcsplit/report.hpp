#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mrcsplit/annotate.hpp"
#include "mrcsplit/corpus.hpp"
#include "mrcsplit/heuristics.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/partition.hpp"
#include "mrcsplit/predictions.hpp"
#include "mrcsplit/textproc.hpp"

namespace mrcsplit {

// ---------------------------------------------------------------------------
// Two-decimal, round-half-even formatting

namespace report_detail {

inline std::string cents_to_string(std::int64_t cents) {
  const bool neg = cents < 0;
  const std::uint64_t a = neg ? static_cast<std::uint64_t>(-cents) : static_cast<std::uint64_t>(cents);
  std::string frac = std::to_string(a % 100);
  if (frac.size() < 2) frac.insert(0, "0");
  return (neg ? "-" : "") + std::to_string(a / 100) + "." + frac;
}

}  // namespace report_detail

/// numerator/denominator rounded half-even to two decimals, exactly.
inline std::string format_rational(std::uint64_t numerator, std::uint64_t denominator) {
  const unsigned __int128 scaled = static_cast<unsigned __int128>(numerator) * 100;
  auto q = static_cast<std::uint64_t>(scaled / denominator);
  const auto r = static_cast<std::uint64_t>(scaled % denominator);
  const unsigned __int128 twice = static_cast<unsigned __int128>(r) * 2;
  if (twice > denominator || (twice == denominator && (q & 1U))) ++q;
  return report_detail::cents_to_string(static_cast<std::int64_t>(q));
}

inline std::string format_real(double value) {
  // nearbyint under the default rounding mode is round-half-even.
  return report_detail::cents_to_string(static_cast<std::int64_t>(std::nearbyint(value * 100.0)));
}

// A report value: exact rational, real, integer count, or absent.
struct ReportValue {
  enum class Kind { Rational, Real, Integer, Missing };
  Kind kind = Kind::Missing;
  std::uint64_t numerator = 0;
  std::uint64_t denominator = 1;
  double real = 0.0;
  std::size_t count = 0;  // items behind the value

  static ReportValue rational(std::uint64_t num, std::uint64_t den, std::size_t count) {
    if (den == 0) return missing(count);
    return {Kind::Rational, num, den, 0.0, count};
  }
  static ReportValue percent(const Ratio& r) {
    return rational(r.numerator * 100, r.denominator, r.denominator);
  }
  static ReportValue real_value(double v, std::size_t count) { return {Kind::Real, 0, 1, v, count}; }
  static ReportValue integer(std::size_t v) { return {Kind::Integer, v, 1, 0.0, v}; }
  static ReportValue missing(std::size_t count = 0) { return {Kind::Missing, 0, 1, 0.0, count}; }

  std::string text() const {
    switch (kind) {
      case Kind::Rational: return format_rational(numerator, denominator);
      case Kind::Real: return format_real(real);
      case Kind::Integer: return std::to_string(numerator);
      case Kind::Missing: return count == 0 ? "n/a (0 items)" : "n/a";
    }
    return "n/a";
  }
  bool present() const { return kind != Kind::Missing; }
};

// ---------------------------------------------------------------------------
// Dataset statistics

struct DatasetStats {
  std::size_t n_questions = 0;
  std::uint64_t context_tokens = 0;  // sums over items
  std::uint64_t question_tokens = 0;
  std::uint64_t context_sentences = 0;
  Ratio ans_in_sim;
  std::optional<Ratio> solved_k2;
  std::optional<Ratio> hard;

  double avg_context_tokens() const { return n_questions ? double(context_tokens) / n_questions : 0; }
  double avg_question_tokens() const { return n_questions ? double(question_tokens) / n_questions : 0; }
  double avg_context_sentences() const {
    return n_questions ? double(context_sentences) / n_questions : 0;
  }
};

inline DatasetStats dataset_stats(const Dataset& dataset,
                                  const std::map<std::string, SimilarityProfile>& profiles,
                                  const Evaluation* k2_scores = nullptr,
                                  std::span<const SubsetAssignment> assignments = {}) {
  DatasetStats s;
  s.n_questions = dataset.items.size();
  s.ans_in_sim.denominator = dataset.items.size();
  // Contexts repeat across questions; segment each distinct one once.
  std::unordered_map<std::string_view, std::pair<std::size_t, std::size_t>> cache;
  for (const auto& item : dataset.items) {
    auto p = profiles.find(item.id);
    if (p == profiles.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no similarity profile");
    s.ans_in_sim.numerator += p->second.answer_in_most_similar;
    auto [it, inserted] = cache.try_emplace(item.context);
    if (inserted) {
      const auto sentences = segment_sentences(item.context);
      std::size_t tokens = 0;
      for (const auto& sent : sentences) tokens += sent.tokens.size();
      it->second = {tokens, sentences.size()};
    }
    s.context_tokens += it->second.first;
    s.context_sentences += it->second.second;
    s.question_tokens += tokenize(item.question).size();
  }
  if (k2_scores && dataset.style != QuestionStyle::MultipleChoice)
    s.solved_k2 = solved_ratio_k2(dataset, *k2_scores);
  if (!assignments.empty()) {
    Ratio hard{0, assignments.size()};
    for (const auto& a : assignments) hard.numerator += a.subset == Subset::Hard;
    s.hard = hard;
  }
  return s;
}

inline ordered_json to_json(const DatasetStats& s) {
  ordered_json j;
  j["n_questions"] = s.n_questions;
  j["avg_context_tokens"] = s.avg_context_tokens();
  j["avg_question_tokens"] = s.avg_question_tokens();
  j["avg_context_sentences"] = s.avg_context_sentences();
  j["pct_ans_in_sim"] = s.ans_in_sim.percent();
  j["pct_solved_k2"] = s.solved_k2 ? ordered_json(s.solved_k2->percent()) : ordered_json(nullptr);
  j["hard_pct"] = s.hard ? ordered_json(s.hard->percent()) : ordered_json(nullptr);
  return j;
}

// ---------------------------------------------------------------------------
// Report assembly

struct ReportRow {
  std::string section;
  std::string label;
  std::string system;  // "" when not system-specific
  std::string subset;  // "", "easy" or "hard"
  std::string metric;
  ReportValue value;
};

struct ReportInputs {
  std::string dataset_id;
  QuestionStyle style = QuestionStyle::Extraction;
  DatasetStats stats;
  std::vector<Evaluation> evaluations;               // any variants / systems
  std::map<std::string, SimilarityProfile> profiles;  // for the sim-sentence rows
  std::vector<SubsetAssignment> assignments;
  std::optional<LabelDistribution> distribution;
  json provenance = json::object();
};

namespace report_detail {

inline ReportValue mean_percent(std::span<const ItemResult> items, bool em) {
  if (items.empty()) return ReportValue::missing(0);
  Aggregate a = aggregate(items);
  if (em) {
    if (!a.mean_em) return ReportValue::missing(items.size());
    // EM is 0/1 per item: keep the exact rational.
    std::uint64_t hits = 0;
    for (const auto& r : items) hits += *r.score.em > 0.5;
    return ReportValue::rational(hits * 100, items.size(), items.size());
  }
  if (items.front().score.primary.metric == Metric::Accuracy) {
    std::uint64_t hits = 0;
    for (const auto& r : items) hits += r.score.primary.value > 0.5;
    return ReportValue::rational(hits * 100, items.size(), items.size());
  }
  return ReportValue::real_value(*a.mean_primary * 100.0, items.size());
}

template <typename Pred>
std::vector<ItemResult> select(const Evaluation& ev, Pred keep) {
  std::vector<ItemResult> out;
  for (const auto& r : ev.items)
    if (keep(r.item_id)) out.push_back(r);
  return out;
}

}  // namespace report_detail

/// Rows in the order of the easy/hard analysis tables: statistics, scores per
/// system and variant, similarity-sentence breakdown, subsets, annotations.
inline std::vector<ReportRow> build_report(const ReportInputs& in) {
  using report_detail::mean_percent;
  using report_detail::select;
  std::vector<ReportRow> rows;
  const auto& st = in.stats;
  const std::uint64_t n = st.n_questions;
  rows.push_back({"statistics", "# questions", "", "", "count", ReportValue::integer(n)});
  rows.push_back({"statistics", "Avg. # context tokens", "", "", "mean",
                  ReportValue::rational(st.context_tokens, n, n)});
  rows.push_back({"statistics", "Avg. # question tokens", "", "", "mean",
                  ReportValue::rational(st.question_tokens, n, n)});
  rows.push_back({"statistics", "Avg. # sents in context", "", "", "mean",
                  ReportValue::rational(st.context_sentences, n, n)});

  const bool extraction = in.style == QuestionStyle::Extraction;
  std::vector<std::pair<std::string, bool>> metrics;  // name, is_em
  if (extraction) metrics = {{"em", true}, {"f1", false}};
  else metrics = {{std::string(to_string(primary_metric(in.style))), false}};

  std::map<std::string, std::map<std::string, const Evaluation*>> by_system;  // system -> variant
  for (const auto& ev : in.evaluations) by_system[ev.system_name][ev.variant] = &ev;
  if (by_system.empty()) by_system[""] = {};

  std::map<std::string, Subset> subset_of;
  for (const auto& a : in.assignments) subset_of.emplace(a.item_id, a.subset);
  auto in_sim = [&](const std::string& id) {
    auto p = in.profiles.find(id);
    return p != in.profiles.end() && p->second.answer_in_most_similar;
  };
  auto has_profile = [&](const std::string& id) { return in.profiles.contains(id); };

  const std::pair<const char*, const char*> variant_rows[] = {
      {"full", "Full question"}, {"k4", "Q first tokens (k=4)"},
      {"k2", "Q first tokens (k=2)"}, {"k1", "Q first tokens (k=1)"}};
  for (const auto& [system, variants] : by_system) {
    auto find = [&](const char* v) -> const Evaluation* {
      auto it = variants.find(v);
      return it == variants.end() ? nullptr : it->second;
    };
    for (const auto& [variant, label] : variant_rows) {
      const Evaluation* ev = find(variant);
      for (const auto& [metric, em] : metrics)
        rows.push_back({"scores", label, system, "", metric,
                        ev ? mean_percent(ev->items, em) : ReportValue::missing(n)});
    }
    if (in.style != QuestionStyle::MultipleChoice) {
      const Evaluation* k2 = find("k2");
      ReportValue v = ReportValue::missing(n);
      if (k2) {
        Ratio r{0, k2->items.size()};
        for (const auto& item : k2->items) r.numerator += item.score.primary.value >= kSolvedThreshold;
        v = ReportValue::percent(r);
      }
      rows.push_back({"scores", "% of # Q (>=0.5 for k=2)", system, "", "percent", v});
    }
    const Evaluation* full = find("full");
    const Evaluation* sim = find("sim_only");
    for (const auto& [metric, em] : metrics) {
      auto part = [&](const Evaluation* ev, bool want_in_sim) {
        if (!ev || in.profiles.empty()) return ReportValue::missing(n);
        return mean_percent(select(*ev, [&](const std::string& id) {
                              return has_profile(id) && in_sim(id) == want_in_sim;
                            }),
                            em);
      };
      rows.push_back({"attention", "Ans in sim sent", system, "", metric, part(full, true)});
      rows.push_back({"attention", "only with sim sent", system, "", metric, part(sim, true)});
      rows.push_back({"attention", "Ans not in sim sent", system, "", metric, part(full, false)});
    }
  }
  rows.push_back({"attention", "% of # Q (ans in sim)", "", "", "percent",
                  ReportValue::percent(st.ans_in_sim)});

  for (const auto& [system, variants] : by_system) {
    auto it = variants.find("full");
    const Evaluation* full = it == variants.end() ? nullptr : it->second;
    for (Subset s : {Subset::Hard, Subset::Easy}) {
      const std::string label = s == Subset::Hard ? "Hard subset" : "Easy subset";
      for (const auto& [metric, em] : metrics) {
        ReportValue v = ReportValue::missing(n);
        if (full && !subset_of.empty()) {
          v = mean_percent(select(*full, [&](const std::string& id) {
                             auto a = subset_of.find(id);
                             return a != subset_of.end() && a->second == s;
                           }),
                           em);
        }
        rows.push_back({"subsets", label, system, std::string(to_string(s)), metric, v});
      }
    }
  }
  rows.push_back({"subsets", "% of hard", "", "", "percent",
                  st.hard ? ReportValue::percent(*st.hard) : ReportValue::missing(n)});

  if (in.distribution) {
    const auto& d = *in.distribution;
    for (const auto& r : d.rows) {
      for (int s = 0; s < 2; ++s) {
        rows.push_back({"annotation:" + r.block, r.label, "", s ? "hard" : "easy", "percent",
                        ReportValue::rational(std::uint64_t(r.count[s]) * 100, r.denominator[s],
                                              r.denominator[s])});
      }
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rendering

inline std::vector<std::string> provenance_lines(const json& provenance) {
  std::vector<std::string> out;
  for (const auto& [k, v] : provenance.items())
    out.push_back(k + ": " + (v.is_string() ? v.get<std::string>() : v.dump()));
  return out;
}

inline std::string render_text(const std::vector<ReportRow>& rows, const json& provenance,
                               const std::string& title) {
  std::ostringstream out;
  out << "# " << title << "\n";
  for (const auto& l : provenance_lines(provenance)) out << "# " << l << "\n";
  const char* headers[] = {"section", "row", "system", "subset", "metric", "value", "n"};
  std::vector<std::array<std::string, 7>> cells;
  for (const auto& r : rows)
    cells.push_back({r.section, r.label, r.system.empty() ? "-" : r.system,
                     r.subset.empty() ? "-" : r.subset, r.metric, r.value.text(),
                     std::to_string(r.value.count)});
  std::size_t width[7];
  for (int c = 0; c < 7; ++c) {
    width[c] = std::string_view(headers[c]).size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](auto get) {
    for (int c = 0; c < 7; ++c) {
      std::string v = get(c);
      const bool right = c >= 5;
      const std::string pad(width[c] - v.size(), ' ');
      out << (right ? pad + v : v + pad) << (c == 6 ? "\n" : "  ");
    }
  };
  line([&](int c) { return std::string(headers[c]); });
  line([&](int c) { return std::string(width[c], '-'); });
  for (const auto& row : cells) line([&](int c) { return row[c]; });
  return out.str();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string render_csv(const std::vector<ReportRow>& rows, const json& provenance) {
  std::ostringstream out;
  for (const auto& l : provenance_lines(provenance)) out << "# " << l << "\n";
  out << "section,row,system,subset,metric,value,n\n";
  for (const auto& r : rows)
    out << csv_escape(r.section) << ',' << csv_escape(r.label) << ',' << csv_escape(r.system) << ','
        << csv_escape(r.subset) << ',' << csv_escape(r.metric) << ',' << csv_escape(r.value.text())
        << ',' << r.value.count << "\n";
  return out.str();
}

inline std::string render_jsonl(const std::vector<ReportRow>& rows, const json& provenance) {
  std::string out = dump_line(json{{"provenance", provenance}});
  for (const auto& r : rows) {
    ordered_json j;
    j["section"] = r.section;
    j["row"] = r.label;
    j["system"] = r.system;
    j["subset"] = r.subset;
    j["metric"] = r.metric;
    if (r.value.present()) {
      const std::string text = r.value.text();
      if (r.value.kind == ReportValue::Kind::Integer) j["value"] = r.value.numerator;
      else j["value"] = std::stod(text);
      j["text"] = text;
    } else {
      j["value"] = nullptr;
      j["text"] = r.value.text();
    }
    j["n"] = r.value.count;
    out += dump_line(j);
  }
  return out;
}

/// Inputs must agree on every reproducibility-relevant provenance key.
inline void check_provenance_compatible(const std::vector<std::pair<std::string, json>>& inputs) {
  for (const char* key : {"stopword_hash", "overlap_mode"}) {
    std::optional<std::pair<std::string, json>> first;
    for (const auto& [name, prov] : inputs) {
      if (!prov.is_object() || !prov.contains(key)) continue;
      if (!first) {
        first = {name, prov[key]};
      } else if (first->second != prov[key]) {
        throw Error(ErrorKind::ProvenanceMismatch,
                    std::string(key) + " differs: " + first->first + " has " +
                        first->second.dump() + ", " + name + " has " + prov[key].dump());
      }
    }
  }
}

}  // namespace mrcsplit
