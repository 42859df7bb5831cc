#include "entailprof/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "entailprof/common.hpp"

namespace entailprof {

double accuracy(std::span<const std::string> pred, std::span<const std::string> gold) {
  if (pred.size() != gold.size()) throw ValidationError("accuracy: prediction and gold lengths differ");
  if (pred.empty()) throw ValidationError("accuracy: no predictions");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) hits += pred[i] == gold[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

Metrics macro_f1(std::span<const std::string> pred, std::span<const std::string> gold,
                 const std::vector<std::string>& label_set) {
  Metrics m;
  m.accuracy = accuracy(pred, gold);
  const std::size_t n_labels = label_set.size();
  if (n_labels == 0) throw ValidationError("macro_f1: empty label set");
  auto index_of = [&](const std::string& l) {
    auto it = std::find(label_set.begin(), label_set.end(), l);
    if (it == label_set.end()) throw ValidationError("macro_f1: unknown label '" + l + "'");
    return static_cast<std::size_t>(it - label_set.begin());
  };
  std::vector<std::size_t> tp(n_labels, 0), fp(n_labels, 0), fn(n_labels, 0);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const std::size_t p = index_of(pred[i]);
    const std::size_t g = index_of(gold[i]);
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  m.per_class_f1.resize(n_labels);
  double sum = 0.0;
  for (std::size_t c = 0; c < n_labels; ++c) {
    const double precision = tp[c] + fp[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fp[c]);
    const double recall = tp[c] + fn[c] == 0 ? 0.0 : static_cast<double>(tp[c]) / static_cast<double>(tp[c] + fn[c]);
    const double f1 = precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
    m.per_class_f1[c] = f1;
    sum += f1;
  }
  m.macro_f1 = sum / static_cast<double>(n_labels);
  return m;
}

namespace {

void mean_std(std::span<const double> xs, double& mean, double& stddev) {
  mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  stddev = std::sqrt(var / static_cast<double>(xs.size()));
}

}  // namespace

void summarize(std::span<const Metrics> folds, Metrics& mean, Metrics& stddev) {
  if (folds.empty()) throw ValidationError("summarize: no folds");
  const std::size_t n_labels = folds.front().per_class_f1.size();
  std::vector<double> buf(folds.size());
  auto column = [&](auto get) {
    for (std::size_t f = 0; f < folds.size(); ++f) buf[f] = get(folds[f]);
    return std::span<const double>(buf);
  };
  mean_std(column([](const Metrics& m) { return m.accuracy; }), mean.accuracy, stddev.accuracy);
  mean_std(column([](const Metrics& m) { return m.macro_f1; }), mean.macro_f1, stddev.macro_f1);
  mean.per_class_f1.assign(n_labels, 0.0);
  stddev.per_class_f1.assign(n_labels, 0.0);
  for (std::size_t c = 0; c < n_labels; ++c) {
    mean_std(column([c](const Metrics& m) { return m.per_class_f1.at(c); }), mean.per_class_f1[c],
             stddev.per_class_f1[c]);
  }
}

HashedTfidfEncoder fit_dataset_encoder(const LabeledDataset& ds, const EncoderConfig& cfg) {
  std::vector<std::string> texts;
  texts.reserve(ds.text_count());
  for (const auto& a : ds.authors) texts.insert(texts.end(), a.texts.begin(), a.texts.end());
  return HashedTfidfEncoder::fit(texts, cfg);
}

std::shared_ptr<const Embedder> make_embedder(const LabeledDataset& ds, const PipelineConfig& cfg) {
  if (cfg.pair_scores) return nullptr;
  if (cfg.embeddings) return cfg.embeddings;
  return std::make_shared<HashedTfidfEncoder>(fit_dataset_encoder(ds, cfg.encoder));
}

namespace {

HypothesisSet resolve_hypotheses(const PipelineConfig& cfg, const std::vector<std::string>& label_set) {
  if (cfg.hypotheses.hypotheses.empty()) return identity_hypotheses(label_set);
  if (cfg.hypotheses.labels() != label_set) throw ValidationError("hypothesis set does not match the label set");
  return cfg.hypotheses;
}

void check_config(const PipelineConfig& cfg) {
  if (cfg.few_shot && cfg.pair_scores) {
    throw ValidationError("few-shot training needs an encoder; entailment score files are zero-shot only");
  }
  if (cfg.embeddings && cfg.pair_scores) {
    throw ValidationError("embeddings and pair scores are mutually exclusive score sources");
  }
  if (cfg.few_shot && cfg.head_dim < 1) throw ValidationError("head dimension must be at least 1");
  if (cfg.selection.method == SelectionMethod::kRandom && cfg.selection.k < 1) {
    throw ValidationError("random selection needs k >= 1");
  }
  if (cfg.selection.method == SelectionMethod::kCluster && !(cfg.selection.threshold > 0.0)) {
    throw ValidationError("cluster threshold must be positive");
  }
}

EvalReport report_header(const PipelineConfig& cfg, const HypothesisSet& hset) {
  EvalReport r;
  r.task = cfg.task;
  r.model = cfg.pair_scores ? "CA" : "SN";
  r.selection = cfg.few_shot ? selection_name(cfg.selection) : "-";
  r.hypotheses = hset.name;
  r.n = cfg.few_shot ? cfg.n_per_label : 0;
  return r;
}

void finish_report(EvalReport& r) {
  summarize(r.per_fold, r.mean, r.std);
  const double total = std::accumulate(r.per_fold_s.begin(), r.per_fold_s.end(), 0.0);
  r.s = static_cast<std::size_t>(std::llround(total / static_cast<double>(r.per_fold_s.size())));
}

// Trains (if few-shot) on `train`, predicts `test`, and returns the fold's
// metrics and training size.
std::pair<Metrics, std::size_t> run_fold(const LabeledDataset& train, const LabeledDataset& test,
                                         const PipelineConfig& cfg, const Embedder* embedder,
                                         const HypothesisSet& hset, std::uint64_t seed, const std::string& stream) {
  std::size_t s = 0;
  std::optional<ProjectionHead> head;
  if (cfg.few_shot) {
    FittedHead fitted = fit_head(train, *embedder, hset, cfg, seed, stream);
    head = std::move(fitted.trained.head);
    s = fitted.s;
  }
  const auto predictions = predict_all(test, cfg, embedder, head ? &*head : nullptr, hset);
  return {score_predictions(test, predictions), s};
}

}  // namespace

FittedHead fit_head(const LabeledDataset& train_set, const Embedder& embedder, const HypothesisSet& hset,
                    const PipelineConfig& cfg, std::uint64_t seed, const std::string& stream) {
  LabeledDataset users = train_set;
  if (cfg.n_per_label > 0) {
    users = subsample_users(train_set, cfg.n_per_label,
                            derive_seed(seed, "subsample/" + stream + "/n" + std::to_string(cfg.n_per_label)))
                .dataset;
  }
  FittedHead out;
  std::vector<std::vector<std::size_t>> selection;
  selection.reserve(users.authors.size());
  const std::uint64_t select_seed = derive_seed(seed, "select/" + stream);
  for (const auto& a : users.authors) {
    selection.push_back(select_instances(a, embedder, cfg.selection, select_seed));
    out.s += selection.back().size();
  }
  const auto pairs = generate_pairs(users.authors, hset, users.label_set, selection);
  const ProjectionHead head = init_head(embedder.dim(), cfg.head_dim, derive_seed(seed, "head/" + stream));
  const TrainConfig tc{cfg.epochs, cfg.learning_rate, derive_seed(seed, "train/" + stream)};
  out.trained = train(head, pairs, embedder, users.label_set.size(), tc);
  return out;
}

std::vector<PredictionResult> predict_all(const LabeledDataset& test, const PipelineConfig& cfg,
                                          const Embedder* embedder, const ProjectionHead* head,
                                          const HypothesisSet& hset) {
  std::vector<PredictionResult> out;
  out.reserve(test.authors.size());
  if (cfg.pair_scores) {
    const auto missing = cfg.pair_scores->missing(test.authors, test.label_set);
    if (!missing.empty()) {
      const auto& [id, t, l] = missing.front();
      throw ValidationError("pair-score table is incomplete: " + std::to_string(missing.size()) +
                            " triples missing, first (" + id + ", " + std::to_string(t) + ", " + l + ")");
    }
    for (const auto& a : test.authors) out.push_back(predict_author(a, *cfg.pair_scores, test.label_set));
    return out;
  }
  if (!embedder) throw ValidationError("no encoder available for Siamese scoring");
  const SiameseScorer scorer(*embedder, head, hset);
  for (const auto& a : test.authors) out.push_back(predict_author(a, scorer, test.label_set));
  return out;
}

Metrics score_predictions(const LabeledDataset& test, std::span<const PredictionResult> predictions) {
  std::vector<std::string> pred, gold;
  for (std::size_t i = 0; i < test.authors.size(); ++i) {
    if (!test.authors[i].label) continue;
    gold.push_back(*test.authors[i].label);
    pred.push_back(predictions[i].label);
  }
  return macro_f1(pred, gold, test.label_set);
}

EvalReport cross_validate(const LabeledDataset& ds, int k, const PipelineConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  const HypothesisSet hset = resolve_hypotheses(cfg, ds.label_set);
  const auto embedder = make_embedder(ds, cfg);
  EvalReport report = report_header(cfg, hset);
  for (const auto& fold : stratified_kfold(ds, k, seed)) {
    const LabeledDataset train_set = restrict_to(ds, fold.train_ids);
    const LabeledDataset test_set = restrict_to(ds, fold.test_ids);
    auto [metrics, s] = run_fold(train_set, test_set, cfg, embedder.get(), hset, seed,
                                 "fold" + std::to_string(fold.fold_index));
    report.per_fold.push_back(std::move(metrics));
    report.per_fold_s.push_back(s);
  }
  finish_report(report);
  return report;
}

EvalReport evaluate_split(const LabeledDataset& train_set, const LabeledDataset& test_set,
                          const PipelineConfig& cfg, std::uint64_t seed) {
  check_config(cfg);
  if (train_set.label_set != test_set.label_set) throw ValidationError("train and test label sets differ");
  const HypothesisSet hset = resolve_hypotheses(cfg, train_set.label_set);
  LabeledDataset both = train_set;
  both.authors.insert(both.authors.end(), test_set.authors.begin(), test_set.authors.end());
  const auto embedder = make_embedder(both, cfg);
  EvalReport report = report_header(cfg, hset);
  auto [metrics, s] = run_fold(train_set, test_set, cfg, embedder.get(), hset, seed, "split");
  report.per_fold.push_back(std::move(metrics));
  report.per_fold_s.push_back(s);
  finish_report(report);
  return report;
}

std::vector<EvalReport> sweep_shots(const LabeledDataset& ds, const std::vector<std::size_t>& ns, int k,
                                    const PipelineConfig& cfg, std::uint64_t seed) {
  if (ns.empty()) throw ValidationError("sweep_shots: no user counts given");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (ns[i] < 1) throw ValidationError("sweep_shots: user counts must be at least 1");
    if (i > 0 && ns[i] <= ns[i - 1]) throw ValidationError("sweep_shots: user counts must be ascending");
  }
  std::vector<EvalReport> reports;
  for (std::size_t n : ns) {
    PipelineConfig point = cfg;
    point.few_shot = true;
    point.n_per_label = n;
    reports.push_back(cross_validate(ds, k, point, seed));
  }
  return reports;
}

std::vector<EvalReport> sweep_hypotheses(const LabeledDataset& ds, std::vector<HypothesisSet> sets, int k,
                                         const PipelineConfig& cfg, std::uint64_t seed) {
  const HypothesisSet identity = identity_hypotheses(ds.label_set);
  const bool has_identity = std::any_of(sets.begin(), sets.end(), [&](const HypothesisSet& h) {
    return h.hypotheses == identity.hypotheses;
  });
  if (!has_identity) sets.insert(sets.begin(), identity);

  std::vector<EvalReport> reports;
  for (const auto& hset : sets) {
    PipelineConfig point = cfg;
    point.hypotheses = hset;
    reports.push_back(cross_validate(ds, k, point, seed));
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < reports.size(); ++i) {
    if (reports[i].mean.macro_f1 > reports[best].mean.macro_f1) best = i;
  }
  reports[best].best = true;
  return reports;
}

LogisticGradient logistic_loss_and_gradient(const LogisticModel& model, std::span<const EmbeddingVector> x,
                                            std::span<const std::size_t> y, double l2) {
  const std::size_t n_labels = model.weights.rows();
  const std::size_t dim = model.weights.cols();
  if (x.size() != y.size() || x.empty()) throw ValidationError("logistic regression: need matching non-empty x, y");
  LogisticGradient g{0.0, Matrix(n_labels, dim), std::vector<double>(n_labels, 0.0)};
  const double inv_n = 1.0 / static_cast<double>(x.size());
  std::vector<double> logits(n_labels);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].dim() != dim) throw ValidationError("logistic regression: feature dim mismatch");
    if (y[i] >= n_labels) throw ValidationError("logistic regression: label out of range");
    for (std::size_t c = 0; c < n_labels; ++c) {
      const auto row = model.weights.row(c);
      double z = model.bias[c];
      for (std::size_t d = 0; d < dim; ++d) z += row[d] * x[i].values[d];
      logits[c] = z;
    }
    const double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - mx);
    const double lse = mx + std::log(sum);
    g.loss += (lse - logits[y[i]]) * inv_n;
    for (std::size_t c = 0; c < n_labels; ++c) {
      const double delta = (std::exp(logits[c] - lse) - (c == y[i] ? 1.0 : 0.0)) * inv_n;
      g.grad_bias[c] += delta;
      auto grow = g.grad_weights.row(c);
      for (std::size_t d = 0; d < dim; ++d) {
        if (x[i].values[d] != 0.0) grow[d] += delta * x[i].values[d];
      }
    }
  }
  double sq = 0.0;
  const auto& w = model.weights.data();
  auto& gw = g.grad_weights.data();
  for (std::size_t k = 0; k < w.size(); ++k) {
    sq += w[k] * w[k];
    gw[k] += l2 * w[k];
  }
  g.loss += 0.5 * l2 * sq;
  return g;
}

LogisticModel fit_logistic(std::span<const EmbeddingVector> x, std::span<const std::size_t> y,
                           std::size_t num_labels, const LogisticConfig& cfg, std::vector<double>* loss_history) {
  if (x.empty()) throw ValidationError("logistic regression: empty training set");
  std::vector<bool> seen(num_labels, false);
  std::size_t distinct = 0;
  for (std::size_t label : y) {
    if (label >= num_labels) throw ValidationError("logistic regression: label out of range");
    if (!seen[label]) {
      seen[label] = true;
      ++distinct;
    }
  }
  if (distinct < 2) throw ValidationError("logistic regression: training set has a single class");
  LogisticModel model{Matrix(num_labels, x.front().dim()), std::vector<double>(num_labels, 0.0)};
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const LogisticGradient g = logistic_loss_and_gradient(model, x, y, cfg.l2);
    if (loss_history) loss_history->push_back(g.loss);
    auto& w = model.weights.data();
    for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * g.grad_weights.data()[k];
    for (std::size_t c = 0; c < num_labels; ++c) model.bias[c] -= cfg.learning_rate * g.grad_bias[c];
  }
  return model;
}

std::size_t predict_logistic(const LogisticModel& model, const EmbeddingVector& x) {
  std::size_t best = 0;
  double best_z = 0.0;
  for (std::size_t c = 0; c < model.weights.rows(); ++c) {
    const auto row = model.weights.row(c);
    double z = model.bias[c];
    for (std::size_t d = 0; d < row.size(); ++d) z += row[d] * x.values[d];
    if (c == 0 || z > best_z) {
      best_z = z;
      best = c;
    }
  }
  return best;
}

namespace {

std::string user_document(const Author& a) {
  std::string doc;
  for (std::size_t t = 0; t < a.texts.size(); ++t) {
    if (t > 0) doc += '\n';
    doc += a.texts[t];
  }
  return doc;
}

std::size_t label_position(const Author& a, const std::vector<std::string>& label_set) {
  if (!a.label) throw ValidationError("author '" + a.id + "' is unlabeled");
  auto it = std::find(label_set.begin(), label_set.end(), *a.label);
  if (it == label_set.end()) throw ValidationError("author '" + a.id + "' has an unknown label");
  return static_cast<std::size_t>(it - label_set.begin());
}

}  // namespace

Metrics baseline_char_lr(std::span<const Author> train_authors, std::span<const Author> test_authors,
                         const std::vector<std::string>& label_set, const LogisticConfig& cfg) {
  std::vector<std::string> train_docs;
  std::vector<std::size_t> y;
  for (const auto& a : train_authors) {
    train_docs.push_back(user_document(a));
    y.push_back(label_position(a, label_set));
  }
  const auto encoder = HashedTfidfEncoder::fit(train_docs, cfg.encoder);
  std::vector<EmbeddingVector> x;
  x.reserve(train_docs.size());
  for (const auto& d : train_docs) x.push_back(encoder.embed(d));
  const LogisticModel model = fit_logistic(x, y, label_set.size(), cfg);

  std::vector<std::string> pred, gold;
  for (const auto& a : test_authors) {
    gold.push_back(label_set[label_position(a, label_set)]);
    pred.push_back(label_set[predict_logistic(model, encoder.embed(user_document(a)))]);
  }
  return macro_f1(pred, gold, label_set);
}

EvalReport cross_validate_baseline(const LabeledDataset& ds, int k, const LogisticConfig& cfg,
                                   const std::string& task, std::uint64_t seed) {
  EvalReport report;
  report.task = task;
  report.model = "user-char-lr";
  report.selection = "-";
  report.hypotheses = "-";
  for (const auto& fold : stratified_kfold(ds, k, seed)) {
    const LabeledDataset train_set = restrict_to(ds, fold.train_ids);
    const LabeledDataset test_set = restrict_to(ds, fold.test_ids);
    report.per_fold.push_back(baseline_char_lr(train_set.authors, test_set.authors, ds.label_set, cfg));
    report.per_fold_s.push_back(train_set.text_count());
  }
  finish_report(report);
  return report;
}

EvalReport evaluate_baseline_split(const LabeledDataset& train_set, const LabeledDataset& test_set,
                                   const LogisticConfig& cfg, const std::string& task) {
  if (train_set.label_set != test_set.label_set) throw ValidationError("train and test label sets differ");
  EvalReport report;
  report.task = task;
  report.model = "user-char-lr";
  report.selection = "-";
  report.hypotheses = "-";
  report.per_fold.push_back(baseline_char_lr(train_set.authors, test_set.authors, train_set.label_set, cfg));
  report.per_fold_s.push_back(train_set.text_count());
  finish_report(report);
  return report;
}

}  // namespace entailprof
