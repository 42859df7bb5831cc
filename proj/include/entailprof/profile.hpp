#ifndef ENTAILPROF_PROFILE_HPP_
#define ENTAILPROF_PROFILE_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entailprof/corpus.hpp"
#include "entailprof/entail.hpp"
#include "entailprof/matrix.hpp"
#include "entailprof/siamese.hpp"

namespace entailprof {

enum class ScoreSource { kSiamese, kPairScores };

/// Per-text label probabilities.
///
/// Siamese similarities go through a temperature-1 softmax. Entailment
/// probabilities are divided by their sum; a row summing to zero becomes
/// uniform. Throws on non-finite scores or pair scores outside [0, 1].
std::vector<double> text_probabilities(std::span<const double> scores, ScoreSource source);

struct Aggregate {
  std::size_t label_index = 0;
  std::vector<double> summed_scores;
};

/// summed[c] = sum_i P[i][c]; the label is the argmax, ties resolved toward
/// the earliest label. P must have at least one row.
Aggregate aggregate_author(const Matrix& probabilities);

struct PredictionResult {
  std::string author_id;
  std::string label;
  std::vector<double> summed_scores;  // label_set order
  Matrix per_text;                    // n_texts x n_labels
  ScoreSource source = ScoreSource::kSiamese;
  std::size_t uniform_rows = 0;       // pair-score rows that summed to zero
};

/// Scores every text of the author (no selection at prediction time) and
/// aggregates.
PredictionResult predict_author(const Author& author, const SiameseScorer& scorer,
                                const std::vector<std::string>& label_set);
PredictionResult predict_author(const Author& author, const PairScoreTable& table,
                                const std::vector<std::string>& label_set);

/// `{"author_id", "label", "summed_scores": {"<label>": x, ...}}` per line.
std::string serialize_predictions(std::span<const PredictionResult> predictions,
                                  const std::vector<std::string>& label_set);

}  // namespace entailprof

#endif  // ENTAILPROF_PROFILE_HPP_
