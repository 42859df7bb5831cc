#ifndef ENTAILPROF_EVAL_HPP_
#define ENTAILPROF_EVAL_HPP_

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "entailprof/corpus.hpp"
#include "entailprof/embed.hpp"
#include "entailprof/entail.hpp"
#include "entailprof/matrix.hpp"
#include "entailprof/profile.hpp"
#include "entailprof/select.hpp"
#include "entailprof/siamese.hpp"

namespace entailprof {

struct Metrics {
  double accuracy = 0.0;
  double macro_f1 = 0.0;
  std::vector<double> per_class_f1;  // label_set order

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

/// Fraction of exact matches. Throws on empty or unequal-length input.
double accuracy(std::span<const std::string> pred, std::span<const std::string> gold);

/// Per-class F1 (precision and recall are 0 when undefined, F1 is 0 when
/// P + R = 0) and their unweighted mean over the full label set. Also fills
/// accuracy.
Metrics macro_f1(std::span<const std::string> pred, std::span<const std::string> gold,
                 const std::vector<std::string>& label_set);

/// Mean and population standard deviation (divide by count) of each field.
void summarize(std::span<const Metrics> folds, Metrics& mean, Metrics& stddev);

/// Everything a cross-validation run needs besides the dataset.
struct PipelineConfig {
  std::string task = "task";
  bool few_shot = false;
  std::size_t n_per_label = 0;  // 0: every training user
  SelectionConfig selection;
  int epochs = 10;
  double learning_rate = 0.1;
  std::size_t head_dim = 128;
  EncoderConfig encoder;
  /// Empty name and no hypotheses: the identity set is used.
  HypothesisSet hypotheses;
  /// Optional replacements for the built-in encoder / the Siamese path.
  std::shared_ptr<const EmbeddingTable> embeddings;
  std::shared_ptr<const PairScoreTable> pair_scores;
};

struct EvalReport {
  std::string task;
  std::string model;       // "SN" (Siamese) or "CA" (entailment scores)
  std::string selection;   // "-" for zero-shot, "Ra<k>" or "IS"
  std::string hypotheses;  // hypothesis set name
  std::size_t n = 0;       // users per label (0 for zero-shot)
  std::size_t s = 0;       // selected training texts, rounded fold mean
  std::vector<std::size_t> per_fold_s;
  std::vector<Metrics> per_fold;
  Metrics mean;
  Metrics std;
  bool best = false;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Built-in encoder fitted on every text of the dataset (labels unused).
HashedTfidfEncoder fit_dataset_encoder(const LabeledDataset& ds, const EncoderConfig& cfg);

/// The embedder a pipeline scores with: the configured embedding table, or
/// the built-in encoder fitted on `ds`. Null when pair scores are used.
std::shared_ptr<const Embedder> make_embedder(const LabeledDataset& ds, const PipelineConfig& cfg);

/// Trained few-shot head together with its training size.
struct FittedHead {
  TrainResult trained;
  std::size_t s = 0;
};

/// Subsample, select, pair up and train on `train`. `seed` is the run seed;
/// `stream` distinguishes independent fits (for example one per fold).
FittedHead fit_head(const LabeledDataset& train, const Embedder& embedder, const HypothesisSet& hset,
                    const PipelineConfig& cfg, std::uint64_t seed, const std::string& stream);

/// Predicts every author in `test` with all their texts.
std::vector<PredictionResult> predict_all(const LabeledDataset& test, const PipelineConfig& cfg,
                                          const Embedder* embedder, const ProjectionHead* head,
                                          const HypothesisSet& hset);

/// Gold labels vs predictions for labeled authors.
Metrics score_predictions(const LabeledDataset& test, std::span<const PredictionResult> predictions);

/// k-fold cross-validation of the configured pipeline. Per fold: subsample
/// training users (if n_per_label > 0), select instances, build pairs,
/// train the head (few-shot only), predict each test author with all of
/// its texts and compute metrics.
EvalReport cross_validate(const LabeledDataset& ds, int k, const PipelineConfig& cfg, std::uint64_t seed);

/// Single train/test evaluation; the report holds one fold.
EvalReport evaluate_split(const LabeledDataset& train, const LabeledDataset& test, const PipelineConfig& cfg,
                          std::uint64_t seed);

/// One cross_validate per n, sharing folds and run seed. Subsamples are
/// drawn independently for each n. ns must be non-empty and ascending.
std::vector<EvalReport> sweep_shots(const LabeledDataset& ds, const std::vector<std::size_t>& ns, int k,
                                    const PipelineConfig& cfg, std::uint64_t seed);

/// One cross_validate per hypothesis set, identical folds and seeds. The
/// identity set is prepended unless already present; the report with the
/// highest mean macro-F1 (first on ties) is flagged best.
std::vector<EvalReport> sweep_hypotheses(const LabeledDataset& ds, std::vector<HypothesisSet> sets, int k,
                                         const PipelineConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// user-char-lr baseline
// ---------------------------------------------------------------------------

struct LogisticConfig {
  double l2 = 1e-4;
  int epochs = 200;
  double learning_rate = 0.5;
  EncoderConfig encoder;
};

/// Multinomial logistic regression, weights (n_labels x dim).
struct LogisticModel {
  Matrix weights;
  std::vector<double> bias;
};

struct LogisticGradient {
  double loss = 0.0;
  Matrix grad_weights;
  std::vector<double> grad_bias;
};

/// Mean cross-entropy plus (l2 / 2) * |W|^2 (bias not penalized) and its
/// gradient.
LogisticGradient logistic_loss_and_gradient(const LogisticModel& model, std::span<const EmbeddingVector> x,
                                            std::span<const std::size_t> y, double l2);

/// Full-batch gradient descent from zero weights. Throws if fewer than two
/// classes occur in y. `loss_history`, when given, receives the loss at
/// the start of every epoch.
LogisticModel fit_logistic(std::span<const EmbeddingVector> x, std::span<const std::size_t> y,
                           std::size_t num_labels, const LogisticConfig& cfg,
                           std::vector<double>* loss_history = nullptr);

std::size_t predict_logistic(const LogisticModel& model, const EmbeddingVector& x);

/// User-level character n-gram TF-IDF + logistic regression: each author's
/// texts are concatenated (newline-joined) into one document, the encoder
/// is fitted on the training documents, and test metrics are returned.
Metrics baseline_char_lr(std::span<const Author> train, std::span<const Author> test,
                         const std::vector<std::string>& label_set, const LogisticConfig& cfg);

/// k-fold cross-validation of the baseline (model "user-char-lr").
EvalReport cross_validate_baseline(const LabeledDataset& ds, int k, const LogisticConfig& cfg,
                                   const std::string& task, std::uint64_t seed);

/// Baseline trained on `train` and scored on `test`; the report holds one fold.
EvalReport evaluate_baseline_split(const LabeledDataset& train, const LabeledDataset& test,
                                   const LogisticConfig& cfg, const std::string& task);

}  // namespace entailprof

#endif  // ENTAILPROF_EVAL_HPP_
