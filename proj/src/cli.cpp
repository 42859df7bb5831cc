#include "entailprof/cli.hpp"

#include <filesystem>
#include <iostream>
#include <memory>
#include <sstream>

#include "CLI11.hpp"
#include "entailprof/common.hpp"
#include "entailprof/corpus.hpp"
#include "entailprof/embed.hpp"
#include "entailprof/entail.hpp"
#include "entailprof/eval.hpp"
#include "entailprof/jsonl.hpp"
#include "entailprof/profile.hpp"
#include "entailprof/report.hpp"
#include "entailprof/select.hpp"
#include "entailprof/siamese.hpp"

namespace entailprof {

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

ordered_json run_config_to_json(const RunConfig& c) {
  ordered_json j;
  j["command"] = c.command;
  j["data"] = c.data;
  j["test_data"] = c.test_data;
  j["hypotheses"] = c.hypotheses;
  j["labels"] = c.labels;
  j["task"] = c.task;
  j["seed"] = c.seed;
  j["folds"] = c.folds;
  j["n"] = c.n;
  j["select"] = c.select;
  j["k"] = c.k;
  j["threshold"] = c.threshold;
  j["lr"] = c.lr;
  j["epochs"] = c.epochs;
  j["head_dim"] = c.head_dim;
  j["embeddings"] = c.embeddings;
  j["pair_scores"] = c.pair_scores;
  j["ngram_min"] = c.ngram_min;
  j["ngram_max"] = c.ngram_max;
  j["hash_dim"] = c.hash_dim;
  j["lowercase"] = c.lowercase;
  j["include_zero_shot"] = c.include_zero_shot;
  j["l2"] = c.l2;
  j["baseline_lr"] = c.baseline_lr;
  j["baseline_epochs"] = c.baseline_epochs;
  j["reports"] = c.reports;
  return j;
}

RunConfig run_config_from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config: expected a JSON object");
  RunConfig c;
  try {
    c.command = j.value("command", c.command);
    c.data = j.value("data", c.data);
    c.test_data = j.value("test_data", c.test_data);
    c.hypotheses = j.value("hypotheses", c.hypotheses);
    c.labels = j.value("labels", c.labels);
    c.task = j.value("task", c.task);
    c.seed = j.value("seed", c.seed);
    c.folds = j.value("folds", c.folds);
    c.n = j.value("n", c.n);
    c.select = j.value("select", c.select);
    c.k = j.value("k", c.k);
    c.threshold = j.value("threshold", c.threshold);
    c.lr = j.value("lr", c.lr);
    c.epochs = j.value("epochs", c.epochs);
    c.head_dim = j.value("head_dim", c.head_dim);
    c.embeddings = j.value("embeddings", c.embeddings);
    c.pair_scores = j.value("pair_scores", c.pair_scores);
    c.ngram_min = j.value("ngram_min", c.ngram_min);
    c.ngram_max = j.value("ngram_max", c.ngram_max);
    c.hash_dim = j.value("hash_dim", c.hash_dim);
    c.lowercase = j.value("lowercase", c.lowercase);
    c.include_zero_shot = j.value("include_zero_shot", c.include_zero_shot);
    c.l2 = j.value("l2", c.l2);
    c.baseline_lr = j.value("baseline_lr", c.baseline_lr);
    c.baseline_epochs = j.value("baseline_epochs", c.baseline_epochs);
    c.reports = j.value("reports", c.reports);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("config: ") + e.what());
  }
  return c;
}

namespace {

// Collects warnings and notes for run.log and mirrors them to stderr.
class RunLog {
 public:
  explicit RunLog(std::ostream& err) : err_(err) {}

  void info(const std::string& msg) { add("info", msg); }
  void warn(const std::string& msg) {
    add("warning", msg);
    err_ << "warning: " << msg << '\n';
  }
  std::string text() const { return buf_.str(); }

 private:
  void add(const char* level, const std::string& msg) { buf_ << level << ": " << msg << '\n'; }

  std::ostream& err_;
  std::ostringstream buf_;
};

struct RunContext {
  RunConfig cfg;
  fs::path out_dir;
  RunLog log;
  std::ostream& out;
};

void write_output(const RunContext& ctx, const std::string& name, const std::string& contents) {
  write_file_atomic(ctx.out_dir / name, contents);
}

void finish_run(RunContext& ctx) {
  write_output(ctx, "config.json", run_config_to_json(ctx.cfg).dump(2) + "\n");
  write_output(ctx, "run.log", ctx.log.text());
}

LabeledDataset load_data(const std::string& path, RunContext& ctx) {
  if (path.empty()) throw ValidationError("--data is required");
  LabeledDataset ds = load_dataset(path, ctx.cfg.labels);
  ctx.log.info("loaded " + std::to_string(ds.authors.size()) + " authors from " + path);
  if (ds.dropped_texts > 0) {
    ctx.log.warn("dropped " + std::to_string(ds.dropped_texts) + " empty texts from " + path);
  }
  return ds;
}

std::vector<HypothesisSet> load_sets(const LabeledDataset& ds, RunContext& ctx) {
  if (ctx.cfg.hypotheses.empty()) {
    ctx.log.warn("no hypothesis file given; using identity hypotheses");
    return {identity_hypotheses(ds.label_set)};
  }
  return load_hypothesis_sets(ctx.cfg.hypotheses, ds.label_set);
}

HypothesisSet single_set(const LabeledDataset& ds, RunContext& ctx) {
  auto sets = load_sets(ds, ctx);
  if (sets.size() != 1) throw ValidationError("hypothesis file holds several sets; use the sweep command");
  return std::move(sets.front());
}

EncoderConfig encoder_config(const RunConfig& c) {
  EncoderConfig e;
  e.n_min = c.ngram_min;
  e.n_max = c.ngram_max;
  e.hash_dim = c.hash_dim;
  e.lowercase = c.lowercase;
  return e;
}

std::vector<SelectionConfig> selection_configs(const RunConfig& c) {
  std::vector<SelectionConfig> out;
  for (const auto& method : c.select) {
    if (method == "random") {
      if (c.k.empty()) throw ValidationError("--k needs at least one value for random selection");
      for (std::size_t k : c.k) {
        if (k < 1) throw ValidationError("--k must be at least 1");
        out.push_back({SelectionMethod::kRandom, k, c.threshold});
      }
    } else if (method == "cluster") {
      out.push_back({SelectionMethod::kCluster, 1, c.threshold});
    } else {
      throw ValidationError("unknown selection method '" + method + "' (expected random or cluster)");
    }
  }
  if (out.empty()) throw ValidationError("--select needs at least one method");
  return out;
}

SelectionConfig single_selection(const RunConfig& c) {
  const auto all = selection_configs(c);
  if (all.size() != 1) throw ValidationError("this command takes exactly one --select method and one --k value");
  return all.front();
}

PipelineConfig pipeline_config(const RunConfig& c) {
  PipelineConfig p;
  p.task = c.task;
  p.epochs = c.epochs;
  p.learning_rate = c.lr;
  p.head_dim = c.head_dim;
  p.encoder = encoder_config(c);
  if (c.folds < 2) throw ValidationError("--folds must be at least 2");
  if (!c.embeddings.empty() && !c.pair_scores.empty()) {
    throw ValidationError("--embeddings and --pair-scores are mutually exclusive");
  }
  if (!c.embeddings.empty()) p.embeddings = std::make_shared<EmbeddingTable>(load_embeddings(c.embeddings));
  if (!c.pair_scores.empty()) p.pair_scores = std::make_shared<PairScoreTable>(load_pair_scores(c.pair_scores));
  return p;
}

void print_reports(RunContext& ctx, const std::vector<EvalReport>& reports, const std::vector<std::string>& labels) {
  write_output(ctx, "report.json", serialize_reports(reports, labels));
  write_output(ctx, "report.csv", reports_to_csv(reports));
  write_output(ctx, "report.md", reports_to_markdown(reports));
  ctx.out << reports_to_markdown(reports);
}

void cmd_zeroshot(RunContext& ctx) {
  const LabeledDataset ds = load_data(ctx.cfg.data, ctx);
  PipelineConfig p = pipeline_config(ctx.cfg);
  const HypothesisSet hset = single_set(ds, ctx);
  const auto embedder = make_embedder(ds, p);
  const auto predictions = predict_all(ds, p, embedder.get(), nullptr, hset);
  write_output(ctx, "predictions.jsonl", serialize_predictions(predictions, ds.label_set));

  std::size_t uniform_rows = 0;
  for (const auto& pr : predictions) uniform_rows += pr.uniform_rows;
  if (uniform_rows > 0) ctx.log.warn(std::to_string(uniform_rows) + " texts had all-zero entailment scores");

  std::size_t labeled = 0;
  for (const auto& a : ds.authors) labeled += a.label ? 1 : 0;
  ordered_json metrics;
  metrics["model"] = p.pair_scores ? "CA" : "SN";
  metrics["hypotheses"] = hset.name;
  metrics["n_authors"] = ds.authors.size();
  metrics["n_evaluated"] = labeled;
  if (labeled > 0) {
    const Metrics m = score_predictions(ds, predictions);
    metrics["metrics"] = metrics_to_json(m, ds.label_set);
    ctx.out << "accuracy " << m.accuracy << "  macro_f1 " << m.macro_f1 << '\n';
  } else {
    metrics["metrics"] = nullptr;
    ctx.log.warn("no labeled authors; metrics not computed");
  }
  write_output(ctx, "metrics.json", metrics.dump(2) + "\n");
}

void cmd_fewshot(RunContext& ctx) {
  const LabeledDataset ds = load_data(ctx.cfg.data, ctx);
  PipelineConfig p = pipeline_config(ctx.cfg);
  p.few_shot = true;
  p.hypotheses = single_set(ds, ctx);
  p.selection = single_selection(ctx.cfg);
  if (ctx.cfg.n.size() > 1) throw ValidationError("fewshot takes a single --n; use sweep for several");
  p.n_per_label = ctx.cfg.n.empty() ? 0 : ctx.cfg.n.front();

  EvalReport report;
  LabeledDataset both = ds;
  if (!ctx.cfg.test_data.empty()) {
    const LabeledDataset test = load_data(ctx.cfg.test_data, ctx);
    report = evaluate_split(ds, test, p, ctx.cfg.seed);
    both.authors.insert(both.authors.end(), test.authors.begin(), test.authors.end());
  } else {
    report = cross_validate(ds, ctx.cfg.folds, p, ctx.cfg.seed);
  }

  const auto embedder = make_embedder(both, p);
  const FittedHead fitted = fit_head(ds, *embedder, p.hypotheses, p, ctx.cfg.seed, "final");
  ctx.log.info("final head trained on " + std::to_string(fitted.s) + " selected texts");
  write_output(ctx, "head.json", serialize_head({fitted.trained.head, ctx.cfg.seed, ctx.cfg.epochs}));
  print_reports(ctx, {report}, ds.label_set);
}

void cmd_sweep(RunContext& ctx) {
  const LabeledDataset ds = load_data(ctx.cfg.data, ctx);
  PipelineConfig base = pipeline_config(ctx.cfg);
  const auto sets = load_sets(ds, ctx);
  const bool hypothesis_axis = sets.size() > 1;
  std::vector<std::size_t> ns = ctx.cfg.n;
  if (ns.empty() && !hypothesis_axis) ns = {8, 16, 32, 48, 64, 128, 256, 512};

  std::vector<EvalReport> rows;
  if (ns.empty()) {
    rows = sweep_hypotheses(ds, sets, ctx.cfg.folds, base, ctx.cfg.seed);
  } else {
    std::vector<HypothesisSet> axis = sets;
    if (hypothesis_axis) {
      const auto identity = identity_hypotheses(ds.label_set);
      const bool has_identity =
          std::any_of(axis.begin(), axis.end(), [&](const auto& h) { return h.hypotheses == identity.hypotheses; });
      if (!has_identity) axis.insert(axis.begin(), identity);
    }
    const auto selections = selection_configs(ctx.cfg);
    for (const auto& hset : axis) {
      PipelineConfig point = base;
      point.hypotheses = hset;
      if (ctx.cfg.include_zero_shot) rows.push_back(cross_validate(ds, ctx.cfg.folds, point, ctx.cfg.seed));
      for (const auto& sel : selections) {
        point.selection = sel;
        for (auto& r : sweep_shots(ds, ns, ctx.cfg.folds, point, ctx.cfg.seed)) rows.push_back(std::move(r));
      }
    }
    if (hypothesis_axis) {
      std::size_t best = 0;
      for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].mean.macro_f1 > rows[best].mean.macro_f1) best = i;
      }
      rows[best].best = true;
    }
  }
  print_reports(ctx, rows, ds.label_set);
}

void cmd_select(RunContext& ctx) {
  const LabeledDataset ds = load_data(ctx.cfg.data, ctx);
  PipelineConfig p = pipeline_config(ctx.cfg);
  if (p.pair_scores) throw ValidationError("select needs an encoder, not pair scores");
  const SelectionConfig sel = single_selection(ctx.cfg);
  const auto embedder = make_embedder(ds, p);
  const std::uint64_t seed = derive_seed(ctx.cfg.seed, "select/cli");
  std::ostringstream lines;
  std::size_t total = 0;
  for (const auto& a : ds.authors) {
    const Selection s = select_with_stats(a, *embedder, sel, seed);
    ordered_json j;
    j["author_id"] = a.id;
    j["selected"] = s.indices;
    j["n_texts"] = a.texts.size();
    j["n_clusters"] = s.n_clusters;
    lines << j.dump() << '\n';
    total += s.indices.size();
  }
  write_output(ctx, "selection.jsonl", lines.str());
  ctx.out << "selected " << total << " of " << ds.text_count() << " texts (" << selection_name(sel) << ")\n";
}

void cmd_baseline(RunContext& ctx) {
  const LabeledDataset ds = load_data(ctx.cfg.data, ctx);
  LogisticConfig lc;
  lc.l2 = ctx.cfg.l2;
  lc.learning_rate = ctx.cfg.baseline_lr;
  lc.epochs = ctx.cfg.baseline_epochs;
  lc.encoder = encoder_config(ctx.cfg);
  EvalReport report;
  if (!ctx.cfg.test_data.empty()) {
    report = evaluate_baseline_split(ds, load_data(ctx.cfg.test_data, ctx), lc, ctx.cfg.task);
  } else {
    if (ctx.cfg.folds < 2) throw ValidationError("--folds must be at least 2");
    report = cross_validate_baseline(ds, ctx.cfg.folds, lc, ctx.cfg.task, ctx.cfg.seed);
  }
  print_reports(ctx, {report}, ds.label_set);
}

void cmd_report(RunContext& ctx) {
  if (ctx.cfg.reports.empty()) throw ValidationError("report needs at least one --reports file");
  std::vector<EvalReport> rows;
  std::vector<std::string> labels;
  for (const auto& path : ctx.cfg.reports) {
    std::vector<std::string> these;
    auto parsed = parse_reports(read_file(path), &these);
    if (labels.empty()) labels = these;
    if (these != labels) throw ValidationError("report '" + path + "' has a different label set");
    for (auto& r : parsed) rows.push_back(std::move(r));
  }
  print_reports(ctx, rows, labels);
}

// Finds `--config <path>` / `--config=<path>` ahead of the real parse.
std::string find_config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) return args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

void add_common_options(CLI::App& sub, RunConfig& c, std::string& out_dir, std::string& config_path) {
  sub.add_option("--config", config_path, "JSON run config; flags override its values");
  sub.add_option("--out", out_dir, "Run directory for outputs")->required();
  sub.add_option("--data", c.data, "Dataset JSONL");
  sub.add_option("--labels", c.labels, "Explicit label order")->delimiter(',');
  sub.add_option("--task", c.task, "Task name used in reports (default: data file stem)");
  sub.add_option("--seed", c.seed, "Run seed");
  sub.add_option("--ngram-min", c.ngram_min, "Smallest character n-gram");
  sub.add_option("--ngram-max", c.ngram_max, "Largest character n-gram");
  sub.add_option("--hash-dim", c.hash_dim, "Hashed feature dimension (power of two)");
  sub.add_option("--lowercase", c.lowercase, "Lowercase ASCII before n-gram extraction");
}

void add_model_options(CLI::App& sub, RunConfig& c) {
  sub.add_option("--hypotheses", c.hypotheses, "Hypothesis JSON (object or array of named sets)");
  sub.add_option("--embeddings", c.embeddings, "Precomputed embeddings JSONL");
  sub.add_option("--pair-scores", c.pair_scores, "Precomputed entailment probabilities JSONL");
}

void add_training_options(CLI::App& sub, RunConfig& c) {
  sub.add_option("--folds", c.folds, "Cross-validation folds");
  sub.add_option("-n,--n", c.n, "Users per label")->delimiter(',');
  sub.add_option("--select", c.select, "Instance selection: random and/or cluster")->delimiter(',');
  sub.add_option("--k", c.k, "Texts per author for random selection")->delimiter(',');
  sub.add_option("--threshold", c.threshold, "Average cosine distance threshold for cluster selection");
  sub.add_option("--lr", c.lr, "Learning rate of the projection head");
  sub.add_option("--epochs", c.epochs, "Training epochs");
  sub.add_option("--head-dim", c.head_dim, "Projection head output dimension");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  std::string out_dir;
  std::string config_path;
  try {
    const std::string preset = find_config_path(args);
    if (!preset.empty()) cfg = run_config_from_json(parse_json_document(read_file(preset), "config file"));

    CLI::App app{"Entailment-based zero- and few-shot author profiling", "entailprof"};
    app.require_subcommand(1);
    auto* zeroshot = app.add_subcommand("zeroshot", "Predict authors with the zero-shot path");
    auto* fewshot = app.add_subcommand("fewshot", "Cross-validate few-shot training and save a head");
    auto* sweep = app.add_subcommand("sweep", "Sweep users per label and/or hypothesis sets");
    auto* select = app.add_subcommand("select", "Per-author instance selection");
    auto* baseline = app.add_subcommand("baseline", "Character n-gram logistic regression baseline");
    auto* report = app.add_subcommand("report", "Combine report.json files into one table");

    for (auto* sub : {zeroshot, fewshot, sweep, select, baseline, report}) {
      add_common_options(*sub, cfg, out_dir, config_path);
    }
    for (auto* sub : {zeroshot, fewshot, sweep, select}) add_model_options(*sub, cfg);
    for (auto* sub : {fewshot, sweep}) add_training_options(*sub, cfg);
    select->add_option("--select,--method", cfg.select, "random or cluster")->delimiter(',');
    select->add_option("--k", cfg.k, "Texts per author for random selection")->delimiter(',');
    select->add_option("--threshold", cfg.threshold, "Average cosine distance threshold");
    fewshot->add_option("--test", cfg.test_data, "Held-out test JSONL instead of cross-validation");
    baseline->add_option("--test", cfg.test_data, "Held-out test JSONL instead of cross-validation");
    baseline->add_option("--folds", cfg.folds, "Cross-validation folds");
    baseline->add_option("--l2", cfg.l2, "L2 penalty");
    baseline->add_option("--baseline-lr", cfg.baseline_lr, "Gradient descent step size");
    baseline->add_option("--baseline-epochs", cfg.baseline_epochs, "Gradient descent epochs");
    sweep->add_flag("--include-zero-shot", cfg.include_zero_shot, "Add an n = 0 row per hypothesis set");
    report->add_option("--reports", cfg.reports, "report.json files")->delimiter(',');

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
      app.parse(reversed);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kExitOk : kExitValidation;
    }

    cfg.command = app.get_subcommands().front()->get_name();
    if (cfg.task.empty() && !cfg.data.empty()) cfg.task = fs::path(cfg.data).stem().string();
    if (cfg.task.empty()) cfg.task = "task";

    RunContext ctx{cfg, fs::path(out_dir), RunLog(err), out};
    std::error_code ec;
    fs::create_directories(ctx.out_dir, ec);
    if (ec) throw IoError("cannot create run directory '" + out_dir + "': " + ec.message());

    if (cfg.command == "zeroshot") {
      cmd_zeroshot(ctx);
    } else if (cfg.command == "fewshot") {
      cmd_fewshot(ctx);
    } else if (cfg.command == "sweep") {
      cmd_sweep(ctx);
    } else if (cfg.command == "select") {
      cmd_select(ctx);
    } else if (cfg.command == "baseline") {
      cmd_baseline(ctx);
    } else {
      cmd_report(ctx);
    }
    finish_run(ctx);
    return kExitOk;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  }
}

}  // namespace entailprof
