#ifndef ENTAILPROF_SIAMESE_HPP_
#define ENTAILPROF_SIAMESE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "entailprof/embed.hpp"
#include "entailprof/entail.hpp"
#include "entailprof/matrix.hpp"

namespace entailprof {

/// Trainable linear map shared by the premise and hypothesis sides:
/// f(v) = normalize(W v), W of shape (out_dim x in_dim).
struct ProjectionHead {
  Matrix weights;

  std::size_t in_dim() const { return weights.cols(); }
  std::size_t out_dim() const { return weights.rows(); }

  friend bool operator==(const ProjectionHead&, const ProjectionHead&) = default;
};

/// Entries uniform in [-a, a], a = sqrt(6 / (in_dim + out_dim)).
ProjectionHead init_head(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed);

/// W v, L2-normalized. A zero result is returned flagged degenerate.
EmbeddingVector project(const ProjectionHead& head, const EmbeddingVector& v);

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // dJ/dS, same shape as S
};

/// Batch softmax over a B x B similarity matrix whose diagonal holds the
/// matched (premise, hypothesis) pairs:
///
///   J = -(1/B) sum_i [ S_ii - log sum_j exp S_ij ]
///   dJ/dS_ij = (softmax_j(S_i.) - [i == j]) / B
///
/// Log-sum-exp is computed with max subtraction. Throws on non-finite or
/// non-square input.
LossResult batch_softmax_loss(const Matrix& s);

struct BatchEntry {
  std::size_t example = 0;  // index into the caller's example list
  std::size_t label = 0;    // label position
};

/// One example per label, in label order.
using Batch = std::vector<BatchEntry>;

/// Builds one epoch of batches from per-label example queues
/// (`per_label[l]` lists example indices of label l). Each queue is
/// shuffled with `seed`; the epoch has max_l |per_label[l]| batches and
/// shorter queues wrap around. Throws if any label has no examples.
std::vector<Batch> make_batches(const std::vector<std::vector<std::size_t>>& per_label, std::uint64_t seed);

/// Loss and dJ/dW for one batch: S_ij = f(x_i) . f(y_j) with f = project.
/// Degenerate projections contribute no gradient.
struct HeadGradient {
  double loss = 0.0;
  Matrix grad;  // same shape as head.weights
};
HeadGradient head_loss_and_gradient(const ProjectionHead& head, std::span<const EmbeddingVector> premises,
                                    std::span<const EmbeddingVector> hypotheses);

struct TrainConfig {
  int epochs = 10;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
};

struct TrainResult {
  ProjectionHead head;
  /// Mean batch loss of each epoch, measured before each step's update.
  std::vector<double> loss_history;
};

/// Few-shot training with plain gradient descent on the batch softmax.
/// Only entailed pairs are used; the other labels in a batch act as
/// negatives. The batch size is the number of labels.
TrainResult train(const ProjectionHead& head, std::span<const PairExample> pairs, const Embedder& embedder,
                  std::size_t num_labels, const TrainConfig& cfg);

/// Scores texts against a hypothesis set with f = project . embed, or with
/// the bare embeddings when no head is given (pure zero-shot). Hypothesis
/// vectors are computed once at construction.
class SiameseScorer {
 public:
  SiameseScorer(const Embedder& embedder, const ProjectionHead* head, const HypothesisSet& hset);

  /// One similarity per label, in label_set order.
  std::vector<double> scores(const std::string& author_id, std::size_t text_index, std::string_view text) const;

  const HypothesisSet& hypotheses() const { return hset_; }

 private:
  EmbeddingVector encode(EmbeddingVector v) const;

  const Embedder& embedder_;
  const ProjectionHead* head_;
  HypothesisSet hset_;
  std::vector<EmbeddingVector> hypothesis_vectors_;
};

/// Convenience wrapper around SiameseScorer for a single text.
std::vector<double> zero_shot_scores(const Embedder& embedder, const ProjectionHead* head, std::string_view text,
                                     const HypothesisSet& hset, const std::string& author_id = {},
                                     std::size_t text_index = 0);

struct HeadCheckpoint {
  ProjectionHead head;
  std::uint64_t seed = 0;
  int epochs = 0;
};

/// `{"in_dim", "out_dim", "weights": [[...], ...], "seed", "epochs"}`.
std::string serialize_head(const HeadCheckpoint& ckpt);
HeadCheckpoint parse_head(const std::string& json_text);
HeadCheckpoint load_head(const std::filesystem::path& path);

}  // namespace entailprof

#endif  // ENTAILPROF_SIAMESE_HPP_
