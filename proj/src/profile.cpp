#include "entailprof/profile.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "entailprof/common.hpp"
#include "json.hpp"

namespace entailprof {

std::vector<double> text_probabilities(std::span<const double> scores, ScoreSource source) {
  if (scores.empty()) throw ValidationError("text_probabilities: need at least one label");
  for (double s : scores) {
    if (!std::isfinite(s)) throw ValidationError("text_probabilities: non-finite score");
  }
  std::vector<double> p(scores.begin(), scores.end());
  if (source == ScoreSource::kSiamese) {
    const double mx = *std::max_element(p.begin(), p.end());
    double z = 0.0;
    for (double& x : p) {
      x = std::exp(x - mx);
      z += x;
    }
    for (double& x : p) x /= z;
    return p;
  }
  double sum = 0.0;
  for (double x : p) {
    if (x < 0.0 || x > 1.0) throw ValidationError("text_probabilities: entailment probability outside [0, 1]");
    sum += x;
  }
  const double n = static_cast<double>(p.size());
  for (double& x : p) x = sum == 0.0 ? 1.0 / n : x / sum;
  return p;
}

Aggregate aggregate_author(const Matrix& probabilities) {
  if (probabilities.rows() == 0 || probabilities.cols() == 0) {
    throw ValidationError("aggregate_author: empty probability matrix");
  }
  Aggregate agg;
  agg.summed_scores.assign(probabilities.cols(), 0.0);
  for (std::size_t i = 0; i < probabilities.rows(); ++i) {
    for (std::size_t c = 0; c < probabilities.cols(); ++c) agg.summed_scores[c] += probabilities(i, c);
  }
  for (std::size_t c = 1; c < agg.summed_scores.size(); ++c) {
    if (agg.summed_scores[c] > agg.summed_scores[agg.label_index]) agg.label_index = c;
  }
  return agg;
}

namespace {

template <typename ScoreFn>
PredictionResult predict_with(const Author& author, const std::vector<std::string>& label_set, ScoreSource source,
                              ScoreFn&& score_text) {
  if (author.texts.empty()) throw ValidationError("author '" + author.id + "' has no texts");
  PredictionResult r;
  r.author_id = author.id;
  r.source = source;
  r.per_text = Matrix(author.texts.size(), label_set.size());
  for (std::size_t t = 0; t < author.texts.size(); ++t) {
    const std::vector<double> scores = score_text(t);
    if (scores.size() != label_set.size()) throw ValidationError("score count does not match the label set");
    if (source == ScoreSource::kPairScores &&
        std::all_of(scores.begin(), scores.end(), [](double x) { return x == 0.0; })) {
      ++r.uniform_rows;
    }
    const auto p = text_probabilities(scores, source);
    std::copy(p.begin(), p.end(), r.per_text.row(t).begin());
  }
  Aggregate agg = aggregate_author(r.per_text);
  r.label = label_set[agg.label_index];
  r.summed_scores = std::move(agg.summed_scores);
  return r;
}

}  // namespace

PredictionResult predict_author(const Author& author, const SiameseScorer& scorer,
                                const std::vector<std::string>& label_set) {
  return predict_with(author, label_set, ScoreSource::kSiamese,
                      [&](std::size_t t) { return scorer.scores(author.id, t, author.texts[t]); });
}

PredictionResult predict_author(const Author& author, const PairScoreTable& table,
                                const std::vector<std::string>& label_set) {
  return predict_with(author, label_set, ScoreSource::kPairScores, [&](std::size_t t) {
    std::vector<double> scores;
    scores.reserve(label_set.size());
    for (const auto& l : label_set) scores.push_back(table.at(author.id, t, l));
    return scores;
  });
}

std::string serialize_predictions(std::span<const PredictionResult> predictions,
                                  const std::vector<std::string>& label_set) {
  std::ostringstream out;
  for (const auto& p : predictions) {
    nlohmann::ordered_json j;
    j["author_id"] = p.author_id;
    j["label"] = p.label;
    nlohmann::ordered_json sums = nlohmann::ordered_json::object();
    for (std::size_t c = 0; c < label_set.size(); ++c) sums[label_set[c]] = p.summed_scores.at(c);
    j["summed_scores"] = std::move(sums);
    out << j.dump() << '\n';
  }
  return out.str();
}

}  // namespace entailprof
