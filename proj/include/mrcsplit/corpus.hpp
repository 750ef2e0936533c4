#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrcsplit/error.hpp"
#include "mrcsplit/io.hpp"
#include "mrcsplit/textproc.hpp"

namespace mrcsplit {

enum class QuestionStyle { Extraction, Description, MultipleChoice };

inline std::string_view to_string(QuestionStyle s) {
  switch (s) {
    case QuestionStyle::Extraction: return "extraction";
    case QuestionStyle::Description: return "description";
    case QuestionStyle::MultipleChoice: return "multiple_choice";
  }
  return "extraction";
}

inline std::optional<QuestionStyle> parse_style(std::string_view s) {
  if (s == "extraction") return QuestionStyle::Extraction;
  if (s == "description") return QuestionStyle::Description;
  if (s == "multiple_choice") return QuestionStyle::MultipleChoice;
  return std::nullopt;
}

struct CanonicalItem {
  std::string id;
  QuestionStyle style = QuestionStyle::Extraction;
  std::string context;
  std::string question;
  std::vector<std::string> answers;  // Extraction / Description
  std::vector<std::string> options;  // MultipleChoice
  int correct = -1;                  // MultipleChoice
  std::map<std::string, std::string> meta;
  json extra = json::object();  // unknown fields, kept in non-strict mode
  bool gold_not_in_context = false;

  bool operator==(const CanonicalItem&) const = default;
};

struct DatasetProvenance {
  std::string source_path;
  std::string adapter;
  std::string ingested_at;

  bool operator==(const DatasetProvenance&) const = default;
};

struct Dataset {
  std::string dataset_id;
  QuestionStyle style = QuestionStyle::Extraction;
  std::vector<CanonicalItem> items;
  DatasetProvenance provenance;
  json header;  // provenance line of the source file, if any

  std::unordered_map<std::string, std::size_t> index() const {
    std::unordered_map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < items.size(); ++i) idx.emplace(items[i].id, i);
    return idx;
  }
};

enum class SourceFormat { SquadJson, JsonlCanonical };

struct IngestOptions {
  bool strict = false;
  bool drop_empty_answers = false;
  std::string dataset_id;  // empty: header value, else file stem
  QuestionStyle squad_style = QuestionStyle::Extraction;
  std::string ingested_at;  // caller-supplied timestamp
};

/// True when some gold answer is not a verbatim substring of the context.
inline bool gold_missing_from_context(const CanonicalItem& item) {
  if (item.style != QuestionStyle::Extraction) return false;
  for (const auto& a : item.answers)
    if (item.context.find(a) == std::string::npos) return true;
  return false;
}

/// Returns a description of the first violated multiple-choice invariant.
inline std::optional<std::string> multiple_choice_violation(const CanonicalItem& item) {
  if (item.options.size() < 2) return "fewer than 2 options";
  if (item.correct < 0 || static_cast<std::size_t>(item.correct) >= item.options.size())
    return "correct index " + std::to_string(item.correct) + " out of range for " +
           std::to_string(item.options.size()) + " options";
  std::map<std::string, std::size_t> seen;
  for (std::size_t i = 0; i < item.options.size(); ++i) {
    auto [it, inserted] = seen.emplace(normalize_answer(item.options[i]), i);
    if (!inserted)
      return "options " + std::to_string(it->second) + " and " + std::to_string(i) +
             " are identical after normalization";
  }
  return std::nullopt;
}

namespace corpus_detail {

inline const std::set<std::string>& known_fields() {
  static const std::set<std::string> fields{"id",      "style",   "context", "question",
                                            "answers", "options", "correct", "meta"};
  return fields;
}

[[noreturn]] inline void violation(const std::string& where, const std::string& what) {
  throw Error(ErrorKind::SchemaViolation, where + ": " + what);
}

inline std::string require_string(const json& rec, const char* key, const std::string& where) {
  if (!rec.contains(key)) violation(where, std::string("missing field '") + key + "'");
  if (!rec[key].is_string()) violation(where, std::string("field '") + key + "' must be a string");
  return rec[key].get<std::string>();
}

inline std::vector<std::string> string_array(const json& rec, const char* key,
                                             const std::string& where) {
  const json& arr = rec[key];
  if (!arr.is_array()) violation(where, std::string("field '") + key + "' must be an array");
  std::vector<std::string> out;
  for (const auto& v : arr) {
    if (!v.is_string()) violation(where, std::string("field '") + key + "' must hold strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

inline CanonicalItem parse_canonical(const json& rec, const std::string& where, bool strict) {
  if (!rec.is_object()) violation(where, "record must be an object");
  CanonicalItem item;
  item.id = require_string(rec, "id", where);
  const std::string style = require_string(rec, "style", where);
  auto parsed = parse_style(style);
  if (!parsed) violation(where, "unknown style '" + style + "'");
  item.style = *parsed;
  item.context = require_string(rec, "context", where);
  item.question = require_string(rec, "question", where);

  if (item.style == QuestionStyle::MultipleChoice) {
    if (rec.contains("answers")) violation(where, "'answers' not allowed for multiple_choice");
    if (!rec.contains("options")) violation(where, "missing field 'options'");
    if (!rec.contains("correct")) violation(where, "missing field 'correct'");
    item.options = string_array(rec, "options", where);
    if (!rec["correct"].is_number_integer()) violation(where, "'correct' must be an integer");
    item.correct = rec["correct"].get<int>();
  } else {
    if (rec.contains("options") || rec.contains("correct"))
      violation(where, "'options'/'correct' only allowed for multiple_choice");
    if (!rec.contains("answers")) violation(where, "missing field 'answers'");
    item.answers = string_array(rec, "answers", where);
  }
  if (rec.contains("meta")) {
    if (!rec["meta"].is_object()) violation(where, "'meta' must be an object");
    for (const auto& [k, v] : rec["meta"].items()) {
      if (!v.is_string()) violation(where, "meta." + k + " must be a string");
      item.meta.emplace(k, v.get<std::string>());
    }
  }
  for (const auto& [k, v] : rec.items()) {
    if (known_fields().contains(k)) continue;
    if (strict) violation(where, "unknown field '" + k + "'");
    item.extra[k] = v;
  }
  return item;
}

inline std::vector<std::pair<std::string, CanonicalItem>> parse_squad(const std::string& text,
                                                                      const std::string& name,
                                                                      QuestionStyle style) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::MalformedFile, name + ": " + e.what());
  }
  std::vector<std::pair<std::string, CanonicalItem>> out;
  if (!root.is_object() || !root.contains("data") || !root["data"].is_array())
    violation(name, "missing array 'data'");
  const auto& data = root["data"];
  for (std::size_t a = 0; a < data.size(); ++a) {
    const std::string apath = "data[" + std::to_string(a) + "]";
    const auto& article = data[a];
    if (!article.contains("paragraphs") || !article["paragraphs"].is_array())
      violation(apath, "missing array 'paragraphs'");
    std::string title;
    if (article.contains("title") && article["title"].is_string()) title = article["title"];
    const auto& paragraphs = article["paragraphs"];
    for (std::size_t p = 0; p < paragraphs.size(); ++p) {
      const std::string ppath = apath + ".paragraphs[" + std::to_string(p) + "]";
      const auto& para = paragraphs[p];
      const std::string context = require_string(para, "context", ppath);
      if (!para.contains("qas") || !para["qas"].is_array()) violation(ppath, "missing array 'qas'");
      const auto& qas = para["qas"];
      for (std::size_t q = 0; q < qas.size(); ++q) {
        const std::string qpath = ppath + ".qas[" + std::to_string(q) + "]";
        const auto& qa = qas[q];
        CanonicalItem item;
        item.style = style;
        item.id = require_string(qa, "id", qpath);
        item.question = require_string(qa, "question", qpath);
        item.context = context;
        if (!qa.contains("answers") || !qa["answers"].is_array())
          violation(qpath, "missing array 'answers'");
        for (std::size_t k = 0; k < qa["answers"].size(); ++k)
          item.answers.push_back(
              require_string(qa["answers"][k], "text", qpath + ".answers[" + std::to_string(k) + "]"));
        if (!title.empty()) item.meta["title"] = title;
        out.emplace_back(qpath, std::move(item));
      }
    }
  }
  return out;
}

inline Dataset finish(std::vector<std::pair<std::string, CanonicalItem>> parsed,
                      const std::filesystem::path& file, std::string adapter,
                      const IngestOptions& opt, std::optional<json> header) {
  Dataset ds;
  ds.provenance = {file.string(), std::move(adapter), opt.ingested_at};
  if (header) ds.header = *header;
  if (!opt.dataset_id.empty()) {
    ds.dataset_id = opt.dataset_id;
  } else if (header && header->contains("dataset_id") && (*header)["dataset_id"].is_string()) {
    ds.dataset_id = (*header)["dataset_id"];
  } else {
    ds.dataset_id = file.stem().string();
  }

  std::unordered_map<std::string, std::string> first_seen;
  std::optional<QuestionStyle> style;
  for (auto& [where, item] : parsed) {
    if (item.style != QuestionStyle::MultipleChoice && item.answers.empty()) {
      if (opt.drop_empty_answers) continue;
      violation(where, "no gold answers (use --drop-empty-answers to skip such items)");
    }
    if (style && *style != item.style)
      violation(where, "mixed styles in one dataset ('" + std::string(to_string(*style)) +
                           "' and '" + std::string(to_string(item.style)) + "')");
    style = item.style;
    if (auto [it, inserted] = first_seen.emplace(item.id, where); !inserted)
      violation(where, "duplicate id '" + item.id + "' (first at " + it->second + ")");
    if (item.style == QuestionStyle::MultipleChoice) {
      if (auto v = multiple_choice_violation(item)) violation(where, *v);
    }
    auto flag = item.meta.find("gold_not_in_context");
    item.gold_not_in_context = gold_missing_from_context(item) ||
                               (flag != item.meta.end() && flag->second == "true");
    ds.items.push_back(std::move(item));
  }
  if (ds.items.empty()) throw Error(ErrorKind::EmptyDataset, file.string() + ": no records");
  ds.style = *style;
  return ds;
}

inline std::vector<std::pair<std::string, CanonicalItem>> parse_canonical_file(
    const JsonlFile& file, const std::string& name, bool strict) {
  std::vector<std::pair<std::string, CanonicalItem>> out;
  for (const auto& rec : file.records) {
    const std::string where = name + ":" + std::to_string(rec.line);
    out.emplace_back(where, parse_canonical(rec.value, where, strict));
  }
  return out;
}

}  // namespace corpus_detail

/// Loads an extraction- or description-style dataset.
inline Dataset ingest_extraction(const std::filesystem::path& file, SourceFormat format,
                                 const IngestOptions& opt = {}) {
  using namespace corpus_detail;
  const std::string name = file.string();
  if (format == SourceFormat::SquadJson) {
    auto parsed = parse_squad(read_file(file), name, opt.squad_style);
    return finish(std::move(parsed), file, "squad_json", opt, std::nullopt);
  }
  JsonlFile jf = read_jsonl(file);
  auto parsed = parse_canonical_file(jf, name, opt.strict);
  for (const auto& [where, item] : parsed)
    if (item.style == QuestionStyle::MultipleChoice)
      violation(where, "multiple_choice record in an extraction/description dataset");
  return finish(std::move(parsed), file, "jsonl_canonical", opt, jf.provenance);
}

inline Dataset ingest_multiple_choice(const std::filesystem::path& file,
                                      const IngestOptions& opt = {}) {
  using namespace corpus_detail;
  JsonlFile jf = read_jsonl(file);
  auto parsed = parse_canonical_file(jf, file.string(), opt.strict);
  for (const auto& [where, item] : parsed)
    if (item.style != QuestionStyle::MultipleChoice)
      violation(where, "expected style multiple_choice");
  return finish(std::move(parsed), file, "jsonl_canonical", opt, jf.provenance);
}

/// Reads any canonical file, dispatching on the style of its records.
inline Dataset load_canonical(const std::filesystem::path& file, const IngestOptions& opt = {}) {
  using namespace corpus_detail;
  JsonlFile jf = read_jsonl(file);
  auto parsed = parse_canonical_file(jf, file.string(), opt.strict);
  return finish(std::move(parsed), file, "jsonl_canonical", opt, jf.provenance);
}

inline ordered_json to_canonical_json(const CanonicalItem& item) {
  ordered_json j;
  j["id"] = item.id;
  j["style"] = std::string(to_string(item.style));
  j["context"] = item.context;
  j["question"] = item.question;
  if (item.style == QuestionStyle::MultipleChoice) {
    j["options"] = item.options;
    j["correct"] = item.correct;
  } else {
    j["answers"] = item.answers;
  }
  if (!item.meta.empty()) {
    ordered_json meta = ordered_json::object();
    for (const auto& [k, v] : item.meta) meta[k] = v;
    j["meta"] = meta;
  }
  for (const auto& [k, v] : item.extra.items()) j[k] = ordered_json::parse(v.dump());
  return j;
}

inline void write_canonical(const std::filesystem::path& path, const Dataset& ds,
                            const json& provenance) {
  JsonlWriter w(path, provenance);
  for (const auto& item : ds.items) w.write(to_canonical_json(item));
  w.close();
}

/// The variant tag shared by all items ("full" when untagged).
inline std::string dataset_variant(const Dataset& ds) {
  std::optional<std::string> variant;
  for (const auto& item : ds.items) {
    auto it = item.meta.find("variant");
    std::string v = it == item.meta.end() ? "full" : it->second;
    if (variant && *variant != v)
      throw Error(ErrorKind::VariantMismatch,
                  ds.dataset_id + ": mixed variants '" + *variant + "' and '" + v + "'");
    variant = v;
  }
  return variant.value_or("full");
}

struct ValidationIssue {
  enum class Severity { Warning, Error };
  Severity severity;
  std::string code;
  std::vector<std::string> item_ids;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool empty() const { return issues.empty(); }
  std::size_t error_count() const {
    std::size_t n = 0;
    for (const auto& i : issues) n += i.severity == ValidationIssue::Severity::Error;
    return n;
  }
};

inline ValidationReport validate(const Dataset& ds) {
  using Sev = ValidationIssue::Severity;
  ValidationReport report;
  if (ds.items.empty()) {
    report.issues.push_back({Sev::Error, "empty_dataset", {}, "dataset has no items"});
    return report;
  }
  std::unordered_map<std::string, std::size_t> first;
  for (std::size_t i = 0; i < ds.items.size(); ++i) {
    const auto& item = ds.items[i];
    if (auto [it, inserted] = first.emplace(item.id, i); !inserted) {
      report.issues.push_back({Sev::Error,
                               "duplicate_id",
                               {item.id},
                               "id '" + item.id + "' appears at positions " +
                                   std::to_string(it->second) + " and " + std::to_string(i)});
    }
    if (item.style != ds.style) {
      report.issues.push_back({Sev::Error, "style_mismatch", {item.id},
                               "item style '" + std::string(to_string(item.style)) +
                                   "' differs from dataset style '" +
                                   std::string(to_string(ds.style)) + "'"});
    }
    if (item.style == QuestionStyle::MultipleChoice) {
      if (auto v = multiple_choice_violation(item))
        report.issues.push_back({Sev::Error, "bad_options", {item.id}, *v});
    } else if (item.answers.empty()) {
      report.issues.push_back({Sev::Error, "no_answers", {item.id}, "no gold answers"});
    }
    if (item.gold_not_in_context || gold_missing_from_context(item)) {
      report.issues.push_back({Sev::Warning, "gold_not_in_context", {item.id},
                               "a gold answer does not occur verbatim in the context"});
    }
  }
  return report;
}

}  // namespace mrcsplit
