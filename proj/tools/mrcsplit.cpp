#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "mrcsplit.hpp"
#include "mrcsplit/server.hpp"

namespace fs = std::filesystem;
using namespace mrcsplit;

namespace {

constexpr const char* kFormatsHelp = R"(File formats
  dataset       JSONL, one canonical item per line: id, style, context, question,
                answers (extraction/description) or options + correct (multiple_choice),
                optional meta (string -> string). A SQuAD v1.1 .json file is also accepted.
  predictions   JSON object {"header": {"dataset_id", "variant", "system"},
                "predictions": {item_id: answer string | option index}}.
  profiles      JSONL: id, overlaps, most_similar, answer_in_most_similar, zero_overlap[, projection].
  projections   JSONL: id, token_start, token_end, rouge_l, no_lexical_anchor.
  scores        JSONL: id, metric, score[, em], missing.
  assignments   JSONL: id, subset (easy|hard), evidence {k2_score, answer_in_most_similar, zero_overlap}.
  tasks         JSONL: blinded annotation tasks (task_id, style, context, question, answers|options).
  hidden        JSONL: task_id, item_id, subset, baseline_scores. Never served to annotators.
  label log     JSONL: one annotation record per line (task_id, validity, skill, multi_sentence,
                relation, annotator_id, timestamp, note).
Every JSONL file written starts with a {"provenance": {...}} line carrying the effective configuration.)";

struct Globals {
  std::string epoch;
  unsigned jobs = 1;
  bool strict = false;
  std::string stopwords;
  std::string overlap_mode = "sentence-count";
  double beta = kDefaultRougeBeta;
  std::string hard_metric = "f1";
};

class Run {
 public:
  explicit Run(const Globals& g) : g_(g) {
    if (!g.stopwords.empty()) stopwords_ = StopwordList::load(g.stopwords);
    cfg_.overlap_mode = *parse_overlap_mode(g.overlap_mode);
    cfg_.stopwords = stopwords_ ? &*stopwords_ : &StopwordList::builtin();
    cfg_.beta = g.beta;
    if (g.epoch.empty()) {
      const std::time_t now = std::time(nullptr);
      std::tm tm{};
      gmtime_r(&now, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      created_ = buf;
    } else {
      created_ = g.epoch;
    }
  }

  const HeuristicConfig& cfg() const { return cfg_; }
  const Globals& globals() const { return g_; }
  Metric hard_metric() const { return g_.hard_metric == "em" ? Metric::EM : Metric::F1; }

  json provenance(const std::string& command, const std::vector<std::string>& inputs,
                  json extra = json::object()) const {
    json p;
    p["tool"] = "mrcsplit";
    p["version"] = std::string(kVersion);
    p["command"] = command;
    p["created"] = created_;
    json names = json::array();
    for (const auto& in : inputs) names.push_back(fs::path(in).filename().string());
    p["inputs"] = names;
    p["stopword_source"] = g_.stopwords.empty() ? "builtin" : fs::path(g_.stopwords).filename().string();
    p["stopword_hash"] = cfg_.stopwords->hash();
    p["overlap_mode"] = std::string(to_string(cfg_.overlap_mode));
    p["beta"] = g_.beta;
    p["hard_metric"] = g_.hard_metric;
    p["solved_threshold"] = kSolvedThreshold;
    p["punctuation"] = "ascii string.punctuation, unicode P* beyond ascii";
    p["similarity_tie_break"] = "earliest sentence";
    for (const auto& [k, v] : extra.items()) p[k] = v;
    return p;
  }

  Dataset dataset(const std::string& path, const std::string& format = "auto") const {
    IngestOptions opt;
    opt.strict = g_.strict;
    opt.ingested_at = created_;
    const bool squad = format == "squad" || (format == "auto" && fs::path(path).extension() == ".json");
    if (squad) return ingest_extraction(path, SourceFormat::SquadJson, opt);
    return load_canonical(path, opt);
  }

  std::vector<SimilarityProfile> profiles(const Dataset& ds,
                                          const std::map<std::string, SpanProjection>* given) const {
    auto build = [&](std::size_t i) {
      const auto& item = ds.items[i];
      const auto sentences = segment_sentences(item.context);
      std::optional<SpanProjection> projection;
      if (needs_projection(item.style)) {
        if (given) {
          auto it = given->find(item.id);
          if (it == given->end())
            throw Error(ErrorKind::MissingProjection, item.id + ": not in projections file");
          projection = it->second;
        } else {
          projection = project_item(item, cfg_.beta);
        }
      }
      return build_profile(item, sentences, projection, cfg_);
    };
    return parallel_map(ds.items.size(), g_.jobs, build);
  }

 private:
  Globals g_;
  std::optional<StopwordList> stopwords_;
  HeuristicConfig cfg_;
  std::string created_;
};

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

std::map<std::string, SimilarityProfile> keyed(std::vector<SimilarityProfile> v) {
  std::map<std::string, SimilarityProfile> out;
  for (auto& p : v) out.emplace(p.item_id, std::move(p));
  return out;
}

ordered_json aggregate_json(const Aggregate& a) {
  ordered_json j;
  j["count"] = a.count;
  j["mean"] = a.mean_primary ? ordered_json(*a.mean_primary * 100.0) : ordered_json(nullptr);
  if (a.mean_em) j["mean_em"] = *a.mean_em * 100.0;
  return j;
}

std::vector<AnnotationRecord> read_label_log(const std::string& path) {
  std::vector<AnnotationRecord> out;
  for (const auto& rec : read_jsonl(path).records) {
    auto parsed = parse_record(rec.value);
    if (!parsed.record) {
      std::string msg = path + ":" + std::to_string(rec.line) + ":";
      for (const auto& v : parsed.violations) msg += " " + v + ";";
      throw Error(ErrorKind::SchemaViolation, msg);
    }
    out.push_back(std::move(*parsed.record));
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> read_all(const std::string& path, Parse parse, std::optional<json>* provenance = nullptr) {
  JsonlFile f = read_jsonl(path);
  if (provenance) *provenance = f.provenance;
  std::vector<T> out;
  for (const auto& rec : f.records) {
    try {
      out.push_back(parse(rec.value));
    } catch (const json::exception& e) {
      throw Error(ErrorKind::MalformedFile, path + ":" + std::to_string(rec.line) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Easy/hard splitting and analysis of reading comprehension datasets.", "mrcsplit"};
  app.footer(kFormatsHelp);
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kVersion));

  Globals g;
  app.add_option("--epoch", g.epoch, "Timestamp written into provenance headers (default: now)");
  app.add_option("--jobs", g.jobs, "Worker threads for per-item stages")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_flag("--strict", g.strict, "Reject unknown record fields");
  app.add_option("--stopwords", g.stopwords, "Stopword file (default: built-in list)")->check(CLI::ExistingFile);
  app.add_option("--overlap-mode", g.overlap_mode, "Sentence overlap counting")
      ->capture_default_str()
      ->check(CLI::IsMember({"sentence-count", "min-count"}));
  app.add_option("--beta", g.beta, "Rouge-L F-measure beta")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--hard-metric", g.hard_metric, "Score used by the hard-subset test for extraction")
      ->capture_default_str()
      ->check(CLI::IsMember({"f1", "em"}));

  std::optional<Run> run_storage;
  auto run = [&]() -> Run& {
    if (!run_storage) run_storage.emplace(g);
    return *run_storage;
  };
  int exit_code = 0;

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Convert a source file to the canonical dataset format");
  std::string in_path, in_format = "auto", in_style = "extraction", in_id, out_path;
  bool drop_empty = false;
  ingest->add_option("input", in_path, "Source file")->required()->check(CLI::ExistingFile);
  ingest->add_option("-o,--output", out_path, "Canonical dataset to write")->required();
  ingest->add_option("--format", in_format, "auto, squad or jsonl")->check(CLI::IsMember({"auto", "squad", "jsonl"}));
  ingest->add_option("--style", in_style, "Style assigned to SQuAD-format items")
      ->check(CLI::IsMember({"extraction", "description"}));
  ingest->add_option("--dataset-id", in_id, "Dataset identifier (default: file stem)");
  ingest->add_flag("--drop-empty-answers", drop_empty, "Skip items without gold answers");
  ingest->callback([&] {
    IngestOptions opt;
    opt.strict = g.strict;
    opt.drop_empty_answers = drop_empty;
    opt.dataset_id = in_id;
    opt.squad_style = *parse_style(in_style);
    const bool squad = in_format == "squad" || (in_format == "auto" && fs::path(in_path).extension() == ".json");
    Dataset ds = squad ? ingest_extraction(in_path, SourceFormat::SquadJson, opt) : load_canonical(in_path, opt);
    std::size_t flagged = 0;
    for (const auto& item : ds.items) flagged += item.gold_not_in_context;
    write_canonical(out_path, ds,
                    run().provenance("ingest", {in_path},
                                     {{"dataset_id", ds.dataset_id},
                                      {"style", std::string(to_string(ds.style))},
                                      {"adapter", squad ? "squad_json" : "jsonl_canonical"},
                                      {"drop_empty_answers", drop_empty}}));
    ordered_json j;
    j["dataset_id"] = ds.dataset_id;
    j["style"] = std::string(to_string(ds.style));
    j["items"] = ds.items.size();
    j["gold_not_in_context"] = flagged;
    emit(j);
  });

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "Check a dataset and list problems (exit 1 on errors)");
  std::string ds_path;
  validate_cmd->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  validate_cmd->callback([&] {
    IngestOptions opt;
    opt.strict = g.strict;
    // Loading already rejects hard violations; report them as issues instead.
    JsonlFile f = read_jsonl(ds_path);
    Dataset ds;
    ds.dataset_id = fs::path(ds_path).stem().string();
    std::vector<ValidationIssue> parse_issues;
    for (const auto& rec : f.records) {
      try {
        ds.items.push_back(corpus_detail::parse_canonical(rec.value, ds_path + ":" + std::to_string(rec.line), g.strict));
        ds.items.back().gold_not_in_context = gold_missing_from_context(ds.items.back());
      } catch (const Error& e) {
        parse_issues.push_back({ValidationIssue::Severity::Error, "schema", {}, e.what()});
      }
    }
    if (!ds.items.empty()) ds.style = ds.items.front().style;
    ValidationReport report = validate(ds);
    report.issues.insert(report.issues.begin(), parse_issues.begin(), parse_issues.end());
    if (f.records.empty())
      report.issues.push_back({ValidationIssue::Severity::Error, "empty_dataset", {}, "no records"});
    for (const auto& issue : report.issues) {
      ordered_json j;
      j["severity"] = issue.severity == ValidationIssue::Severity::Error ? "error" : "warning";
      j["code"] = issue.code;
      j["items"] = issue.item_ids;
      j["message"] = issue.message;
      std::cout << j.dump() << "\n";
    }
    if (report.error_count() > 0) exit_code = 1;
  });

  // stats
  auto* stats = app.add_subcommand("stats", "Dataset statistics (question count, lengths, answer-in-sim share)");
  std::string st_profiles, st_k2, st_assign, st_format = "auto", st_out;
  stats->add_option("dataset", ds_path, "Dataset file (canonical JSONL or SQuAD .json)")->required()->check(CLI::ExistingFile);
  stats->add_option("--format", st_format, "auto, squad or jsonl")->check(CLI::IsMember({"auto", "squad", "jsonl"}));
  stats->add_option("--profiles", st_profiles, "Similarity profiles (computed when absent)")->check(CLI::ExistingFile);
  stats->add_option("--k2-scores", st_k2, "Scores of k=2 predictions, for the solved share")->check(CLI::ExistingFile);
  stats->add_option("--assignments", st_assign, "Subset assignments, for the hard share")->check(CLI::ExistingFile);
  stats->add_option("-o,--output", st_out, "Also write the statistics as a JSONL record");
  stats->callback([&] {
    Dataset ds = run().dataset(ds_path, st_format);
    auto profiles = st_profiles.empty() ? keyed(run().profiles(ds, nullptr)) : read_profiles(st_profiles);
    std::optional<Evaluation> k2;
    if (!st_k2.empty()) k2 = read_scores(st_k2);
    std::vector<SubsetAssignment> assignments;
    if (!st_assign.empty()) assignments = read_assignments(st_assign);
    DatasetStats s = dataset_stats(ds, profiles, k2 ? &*k2 : nullptr, assignments);
    ordered_json j;
    j["dataset_id"] = ds.dataset_id;
    const auto stats_json = to_json(s);
    for (const auto& [k, v] : stats_json.items()) j[k] = v;
    emit(j);
    if (!st_out.empty()) {
      JsonlWriter w(st_out, run().provenance("stats", {ds_path}, {{"dataset_id", ds.dataset_id}}));
      w.write(j);
      w.close();
    }
  });

  // truncate
  auto* truncate = app.add_subcommand("truncate", "Write the k-token question variant of a dataset");
  std::size_t tr_k = 2;
  truncate->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  truncate->add_option("--k", tr_k, "Question tokens to keep")->required()->check(CLI::IsMember({1, 2, 4}));
  truncate->add_option("-o,--output", out_path, "Variant dataset to write")->required();
  truncate->callback([&] {
    Dataset ds = run().dataset(ds_path);
    Dataset variant = truncated_variant(ds, {tr_k});
    write_canonical(out_path, variant,
                    run().provenance("truncate", {ds_path},
                                     {{"dataset_id", ds.dataset_id}, {"variant", "k" + std::to_string(tr_k)}, {"k", tr_k}}));
  });

  // project
  auto* project = app.add_subcommand("project", "Project gold answers onto best-matching context spans (Rouge-L)");
  std::size_t pr_slack = kSpanSlack;
  bool pr_unbounded = false;
  project->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  project->add_option("-o,--output", out_path, "Projections file to write")->required();
  project->add_option("--slack", pr_slack, "Span length limit is target length + slack")->capture_default_str();
  project->add_flag("--unbounded", pr_unbounded, "Search spans of every length");
  project->callback([&] {
    Dataset ds = run().dataset(ds_path);
    auto projections = parallel_map(ds.items.size(), g.jobs, [&](std::size_t i) {
      return project_item(ds.items[i], g.beta,
                          pr_unbounded ? std::optional<std::size_t>(kUnboundedSpan) : std::nullopt, pr_slack);
    });
    JsonlWriter w(out_path, run().provenance("project", {ds_path},
                                             {{"dataset_id", ds.dataset_id},
                                              {"span_slack", pr_unbounded ? json(nullptr) : json(pr_slack)}}));
    for (const auto& p : projections) w.write(to_json(p));
    w.close();
  });

  // similar
  auto* similar = app.add_subcommand("similar", "Per-sentence question overlap and the most similar sentence");
  std::string sim_projections;
  similar->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  similar->add_option("--projections", sim_projections, "Span projections (computed when absent)")->check(CLI::ExistingFile);
  similar->add_option("-o,--output", out_path, "Profiles file to write (default: stdout)");
  similar->callback([&] {
    Dataset ds = run().dataset(ds_path);
    std::optional<std::map<std::string, SpanProjection>> given;
    if (!sim_projections.empty()) given = read_projections(sim_projections);
    auto profiles = run().profiles(ds, given ? &*given : nullptr);
    std::vector<std::string> inputs{ds_path};
    if (!sim_projections.empty()) inputs.push_back(sim_projections);
    const json prov = run().provenance("similar", inputs, {{"dataset_id", ds.dataset_id}});
    if (out_path.empty()) {
      std::cout << dump_line(json{{"provenance", prov}});
      for (const auto& p : profiles) std::cout << dump_line(to_json(p));
      return;
    }
    JsonlWriter w(out_path, prov);
    for (const auto& p : profiles) w.write(to_json(p));
    w.close();
  });

  // sim-only
  auto* sim_only = app.add_subcommand("sim-only", "Write the variant whose context is the most similar sentence");
  std::string so_profiles;
  sim_only->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  sim_only->add_option("--profiles", so_profiles, "Similarity profiles")->required()->check(CLI::ExistingFile);
  sim_only->add_option("-o,--output", out_path, "Variant dataset to write")->required();
  sim_only->callback([&] {
    Dataset ds = run().dataset(ds_path);
    auto profiles = read_profiles(so_profiles);
    Dataset out = ds;
    out.items = parallel_map(ds.items.size(), g.jobs, [&](std::size_t i) {
      const auto& item = ds.items[i];
      auto p = profiles.find(item.id);
      if (p == profiles.end()) throw Error(ErrorKind::CoverageGap, item.id + ": no similarity profile");
      return sim_only_context(item, p->second, segment_sentences(item.context));
    });
    write_canonical(out_path, out,
                    run().provenance("sim-only", {ds_path, so_profiles},
                                     {{"dataset_id", ds.dataset_id}, {"variant", "sim_only"}}));
  });

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a prediction file against a dataset");
  std::string ev_preds, ev_variant, ev_missing = "zero";
  evaluate_cmd->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--predictions", ev_preds, "Prediction file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--variant", ev_variant, "Expected variant (default: the dataset's)");
  evaluate_cmd->add_option("--missing", ev_missing, "Missing predictions: zero or strict")
      ->check(CLI::IsMember({"zero", "strict"}));
  evaluate_cmd->add_option("-o,--output", out_path, "Per-item scores file to write");
  evaluate_cmd->callback([&] {
    Dataset ds = run().dataset(ds_path);
    const std::string variant = ev_variant.empty() ? dataset_variant(ds) : ev_variant;
    auto loaded = load_predictions(ev_preds, ds, variant,
                                   ev_missing == "strict" ? MissingPolicy::Strict : MissingPolicy::ScoreZero);
    Evaluation ev = evaluate(ds, loaded, g.beta);
    if (!out_path.empty()) write_scores(out_path, ev, run().provenance("evaluate", {ds_path, ev_preds}));
    ordered_json j;
    j["dataset_id"] = ev.dataset_id;
    j["variant"] = ev.variant;
    j["system"] = ev.system_name;
    j["metric"] = std::string(to_string(ev.metric));
    j["missing"] = ev.missing;
    j["overall"] = aggregate_json(ev.overall);
    emit(j);
  });

  // solved-ratio
  auto* solved = app.add_subcommand("solved-ratio", "Share of questions with k=2 score >= 0.5");
  std::string sr_scores, sr_preds;
  double sr_threshold = kSolvedThreshold;
  solved->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  auto* sr_scores_opt = solved->add_option("--k2-scores", sr_scores, "Scores of k=2 predictions")->check(CLI::ExistingFile);
  solved->add_option("--k2-predictions", sr_preds, "k=2 prediction file")->check(CLI::ExistingFile)->excludes(sr_scores_opt);
  solved->add_option("--threshold", sr_threshold, "Solved threshold")->capture_default_str();
  solved->callback([&] {
    Dataset ds = run().dataset(ds_path);
    if (sr_scores.empty() && sr_preds.empty()) throw CLI::RequiredError("--k2-scores or --k2-predictions");
    Evaluation k2 = sr_scores.empty() ? evaluate(ds, load_predictions(sr_preds, ds, "k2"), g.beta) : read_scores(sr_scores);
    Ratio r = solved_ratio_k2(ds, k2, sr_threshold);
    ordered_json j;
    j["dataset_id"] = ds.dataset_id;
    j["solved"] = r.numerator;
    j["total"] = r.denominator;
    j["percent"] = r.percent();
    j["text"] = format_rational(r.numerator * 100, r.denominator);
    emit(j);
  });

  // partition
  auto* partition_cmd = app.add_subcommand("partition", "Split a dataset into easy and hard subsets");
  std::string pa_preds, pa_profiles;
  partition_cmd->add_option("dataset", ds_path, "Dataset file (full questions)")->required()->check(CLI::ExistingFile);
  partition_cmd->add_option("--k2-predictions", pa_preds, "Predictions on the k=2 variant")->required()->check(CLI::ExistingFile);
  partition_cmd->add_option("--profiles", pa_profiles, "Similarity profiles (computed when absent)")->check(CLI::ExistingFile);
  partition_cmd->add_option("-o,--output", out_path, "Assignments file to write")->required();
  partition_cmd->callback([&] {
    Dataset ds = run().dataset(ds_path);
    auto profiles = pa_profiles.empty() ? keyed(run().profiles(ds, nullptr)) : read_profiles(pa_profiles);
    Evaluation k2 = evaluate(ds, load_predictions(pa_preds, ds, "k2"), g.beta);
    PartitionResult result = partition(ds, k2, profiles, ds.style == QuestionStyle::Extraction ? run().hard_metric() : primary_metric(ds.style));
    std::vector<std::string> inputs{ds_path, pa_preds};
    if (!pa_profiles.empty()) inputs.push_back(pa_profiles);
    JsonlWriter w(out_path, run().provenance("partition", inputs,
                                             {{"dataset_id", ds.dataset_id}, {"system", k2.system_name}}));
    for (const auto& a : result.assignments) w.write(to_json(a));
    w.close();
    ordered_json j;
    j["dataset_id"] = ds.dataset_id;
    j["hard"] = result.hard_count;
    j["total"] = result.total;
    j["hard_percent"] = format_rational(result.hard_count * 100, result.total);
    emit(j);
  });

  // subset-eval
  auto* subset_eval = app.add_subcommand("subset-eval", "Aggregate full-question scores over the easy and hard subsets");
  std::string se_assign, se_preds;
  subset_eval->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  subset_eval->add_option("--assignments", se_assign, "Subset assignments")->required()->check(CLI::ExistingFile);
  subset_eval->add_option("--predictions", se_preds, "Full-question predictions")->required()->check(CLI::ExistingFile);
  subset_eval->callback([&] {
    Dataset ds = run().dataset(ds_path);
    auto assignments = read_assignments(se_assign);
    Evaluation full = evaluate(ds, load_predictions(se_preds, ds, "full"), g.beta);
    SubsetScores s = subset_evaluate(assignments, ds, full);
    ordered_json j;
    j["dataset_id"] = ds.dataset_id;
    j["system"] = full.system_name;
    j["metric"] = std::string(to_string(full.metric));
    j["easy"] = aggregate_json(s.easy);
    j["hard"] = aggregate_json(s.hard);
    emit(j);
  });

  // sample
  auto* sample = app.add_subcommand("sample", "Draw the blinded annotation sample");
  std::string sa_assign, sa_tasks, sa_hidden;
  std::vector<std::string> sa_scores;
  std::size_t sa_n = kDefaultSamplePerSubset;
  std::uint64_t sa_seed = 0;
  sample->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  sample->add_option("--assignments", sa_assign, "Subset assignments")->required()->check(CLI::ExistingFile);
  sample->add_option("--n", sa_n, "Items per subset")->capture_default_str();
  sample->add_option("--seed", sa_seed, "Random seed")->required();
  sample->add_option("--scores", sa_scores, "Full-question score files of baseline systems")->check(CLI::ExistingFile);
  sample->add_option("--tasks", sa_tasks, "Blinded tasks file to write")->required();
  sample->add_option("--hidden", sa_hidden, "Hidden task join file to write")->required();
  sample->callback([&] {
    Dataset ds = run().dataset(ds_path);
    auto assignments = read_assignments(sa_assign);
    std::vector<Evaluation> baselines;
    for (const auto& s : sa_scores) baselines.push_back(read_scores(s));
    AnnotationSample out = sample_for_annotation(assignments, ds, sa_n, sa_seed, baselines);
    std::vector<std::string> inputs{ds_path, sa_assign};
    inputs.insert(inputs.end(), sa_scores.begin(), sa_scores.end());
    const json extra{{"dataset_id", ds.dataset_id}, {"n_per_subset", sa_n}, {"seed", sa_seed}};
    JsonlWriter tasks(sa_tasks, run().provenance("sample", {ds_path}, extra));
    for (const auto& t : out.tasks) tasks.write(to_json(t));
    tasks.close();
    JsonlWriter hidden(sa_hidden, run().provenance("sample", inputs, extra));
    for (const auto& h : out.hidden) hidden.write(to_json(h));
    hidden.close();
  });

  // serve
  auto* serve = app.add_subcommand("serve", "Serve annotation tasks over HTTP and collect labels");
  std::string sv_tasks, sv_store, sv_host = "127.0.0.1";
  int sv_port = 8080;
  int sv_lease = 30;
  bool sv_export = false;
  serve->add_option("--tasks", sv_tasks, "Blinded tasks file")->required()->check(CLI::ExistingFile);
  serve->add_option("--store", sv_store, "Append-only label log")->required();
  serve->add_option("--host", sv_host, "Bind address")->capture_default_str();
  serve->add_option("--port", sv_port, "Port (0 picks a free one)")->capture_default_str();
  serve->add_option("--lease-minutes", sv_lease, "Task lease duration")->capture_default_str()->check(CLI::PositiveNumber);
  serve->add_flag("--allow-export", sv_export, "Enable GET /api/export");
  serve->callback([&] {
    auto tasks = read_all<AnnotationTask>(sv_tasks, task_from_json);
    AnnotationServer::Options opt;
    opt.lease = std::chrono::minutes(sv_lease);
    opt.allow_export = sv_export;
    AnnotationServer server(std::move(tasks), sv_store, opt, run().provenance("serve", {sv_tasks}));
    httplib::Server http;
    server.listen(http, sv_host, sv_port, [&](int port) {
      std::cerr << "listening on http://" << sv_host << ":" << port << "\n";
    });
  });

  // correlate
  auto* correlate = app.add_subcommand("correlate", "Pearson correlation between annotation labels and baseline scores");
  std::string co_records, co_hidden;
  std::size_t co_perm = 0;
  std::uint64_t co_seed = 0;
  correlate->add_option("--records", co_records, "Label log")->required()->check(CLI::ExistingFile);
  correlate->add_option("--hidden", co_hidden, "Hidden task join file")->required()->check(CLI::ExistingFile);
  correlate->add_option("--permutations", co_perm, "Permutation test samples (0 disables)")->capture_default_str();
  correlate->add_option("--seed", co_seed, "Permutation seed")->capture_default_str();
  correlate->add_option("-o,--output", out_path, "Write rows as JSONL (default: stdout)");
  correlate->callback([&] {
    auto records = read_label_log(co_records);
    auto hidden = read_all<HiddenTaskInfo>(co_hidden, hidden_from_json);
    auto rows = correlate_labels(records, hidden, co_perm, co_seed);
    std::vector<ordered_json> out;
    for (const auto& r : rows) {
      ordered_json j;
      j["label"] = r.label;
      j["system"] = r.system;
      j["n"] = r.n;
      j["r"] = r.result ? ordered_json(r.result->r) : ordered_json(nullptr);
      j["p"] = r.result ? ordered_json(r.result->p) : ordered_json(nullptr);
      if (co_perm > 0) j["permutation_p"] = r.permutation_p ? ordered_json(*r.permutation_p) : ordered_json(nullptr);
      out.push_back(std::move(j));
    }
    const json prov = run().provenance("correlate", {co_records, co_hidden},
                                       {{"permutations", co_perm}, {"seed", co_seed}});
    if (out_path.empty()) {
      for (const auto& j : out) std::cout << dump_line(j);
      return;
    }
    JsonlWriter w(out_path, prov);
    for (const auto& j : out) w.write(j);
    w.close();
  });

  // report
  auto* report = app.add_subcommand("report", "Render report.txt, report.csv and report.jsonl");
  std::string rp_profiles, rp_assign, rp_records, rp_hidden, rp_dir;
  std::vector<std::string> rp_scores;
  report->add_option("dataset", ds_path, "Dataset file")->required()->check(CLI::ExistingFile);
  report->add_option("--profiles", rp_profiles, "Similarity profiles")->required()->check(CLI::ExistingFile);
  report->add_option("--assignments", rp_assign, "Subset assignments")->check(CLI::ExistingFile);
  report->add_option("--scores", rp_scores, "Score files (any system and variant)")->check(CLI::ExistingFile);
  report->add_option("--records", rp_records, "Label log")->check(CLI::ExistingFile);
  report->add_option("--hidden", rp_hidden, "Hidden task join file")->check(CLI::ExistingFile);
  report->add_option("--out-dir", rp_dir, "Output directory")->required();
  report->callback([&] {
    Dataset ds = run().dataset(ds_path);
    std::vector<std::pair<std::string, json>> provenances;
    if (!ds.header.is_null()) provenances.emplace_back(ds_path, ds.header);
    std::optional<json> prov;
    ReportInputs in;
    in.dataset_id = ds.dataset_id;
    in.style = ds.style;
    in.profiles = read_profiles(rp_profiles, &prov);
    if (prov) provenances.emplace_back(rp_profiles, *prov);
    if (!rp_assign.empty()) {
      in.assignments = read_assignments(rp_assign, &prov);
      if (prov) provenances.emplace_back(rp_assign, *prov);
    }
    for (const auto& s : rp_scores) in.evaluations.push_back(read_scores(s));
    const Evaluation* k2 = nullptr;
    for (const auto& ev : in.evaluations) {
      if (ev.dataset_id != ds.dataset_id)
        throw Error(ErrorKind::ProvenanceMismatch, "scores for dataset '" + ev.dataset_id + "' given with dataset '" + ds.dataset_id + "'");
      if (ev.variant == "k2" && !k2) k2 = &ev;
    }
    if (rp_records.empty() != rp_hidden.empty()) throw CLI::ValidationError("--records and --hidden go together");
    if (!rp_records.empty()) {
      auto records = read_label_log(rp_records);
      auto hidden = read_all<HiddenTaskInfo>(rp_hidden, hidden_from_json);
      in.distribution = label_distribution(records, subset_join(hidden));
    }
    // The current run's settings must agree with the inputs as well.
    const json current = run().provenance("report", {});
    provenances.emplace_back("command line", current);
    check_provenance_compatible(provenances);

    in.stats = dataset_stats(ds, in.profiles, k2, in.assignments);
    std::vector<std::string> inputs{ds_path, rp_profiles};
    if (!rp_assign.empty()) inputs.push_back(rp_assign);
    inputs.insert(inputs.end(), rp_scores.begin(), rp_scores.end());
    if (!rp_records.empty()) {
      inputs.push_back(rp_records);
      inputs.push_back(rp_hidden);
    }
    in.provenance = run().provenance("report", inputs, {{"dataset_id", ds.dataset_id}});
    const auto rows = build_report(in);
    const fs::path dir(rp_dir);
    write_text(dir / "report.txt", render_text(rows, in.provenance, "report for " + ds.dataset_id));
    write_text(dir / "report.csv", render_csv(rows, in.provenance));
    write_text(dir / "report.jsonl", render_jsonl(rows, in.provenance));
  });

  // unblind
  auto* unblind = app.add_subcommand("unblind", "Join collected labels with subsets and scores once collection is closed");
  std::string ub_hidden, ub_records;
  bool ub_force = false;
  unblind->add_option("--hidden", ub_hidden, "Hidden task join file")->required()->check(CLI::ExistingFile);
  unblind->add_option("--records", ub_records, "Label log")->required()->check(CLI::ExistingFile);
  unblind->add_option("-o,--output", out_path, "Joined file to write")->required();
  unblind->add_flag("--force", ub_force, "Unblind even if some tasks have no label yet");
  unblind->callback([&] {
    auto hidden = read_all<HiddenTaskInfo>(ub_hidden, hidden_from_json);
    auto records = read_label_log(ub_records);
    std::map<std::string, const AnnotationRecord*> by_task;
    for (const auto& r : records) by_task.emplace(r.task_id, &r);
    std::size_t open = 0;
    for (const auto& h : hidden) open += !by_task.contains(h.task_id);
    if (open > 0 && !ub_force)
      throw Error(ErrorKind::CoverageGap, std::to_string(open) + " tasks have no label; collection is not closed (use --force)");
    JsonlWriter w(out_path, run().provenance("unblind", {ub_hidden, ub_records}, {{"open_tasks", open}}));
    for (const auto& h : hidden) {
      ordered_json j = to_json(h);
      auto r = by_task.find(h.task_id);
      j["record"] = r == by_task.end() ? ordered_json(nullptr) : to_json(*r->second);
      w.write(j);
    }
    w.close();
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const Error& e) {
    std::cerr << json{{"error", std::string(to_string(e.kind()))}, {"message", e.message()}}.dump() << "\n";
    return 1;
  } catch (const json::exception& e) {
    std::cerr << json{{"error", "MalformedFile"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << json{{"error", "Io"}, {"message", e.what()}}.dump() << "\n";
    return 1;
  }
  return exit_code;
}
