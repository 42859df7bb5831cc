#include "entailprof/siamese.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "entailprof/common.hpp"
#include "entailprof/jsonl.hpp"

namespace entailprof {

namespace {

struct SparseView {
  std::vector<std::size_t> index;
  std::vector<double> value;
};

SparseView nonzeros(const EmbeddingVector& v) {
  SparseView s;
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (v.values[i] != 0.0) {
      s.index.push_back(i);
      s.value.push_back(v.values[i]);
    }
  }
  return s;
}

std::vector<double> apply(const Matrix& w, const SparseView& x) {
  std::vector<double> out(w.rows(), 0.0);
  for (std::size_t r = 0; r < w.rows(); ++r) {
    const auto row = w.row(r);
    double acc = 0.0;
    for (std::size_t k = 0; k < x.index.size(); ++k) acc += row[x.index[k]] * x.value[k];
    out[r] = acc;
  }
  return out;
}

// Projected, normalized vector plus what backprop needs.
struct Projection {
  SparseView input;
  std::vector<double> unit;  // W x / |W x|, zeros if degenerate
  double norm = 0.0;
};

Projection forward(const Matrix& w, const EmbeddingVector& x) {
  Projection p;
  p.input = nonzeros(x);
  p.unit = apply(w, p.input);
  p.norm = l2_norm(p.unit);
  if (p.norm > 0.0) {
    for (double& v : p.unit) v /= p.norm;
  }
  return p;
}

// Accumulates dJ/dW for one projected vector given dJ/d(unit).
void backward(const Projection& p, std::span<const double> d_unit, Matrix& grad) {
  if (p.norm == 0.0) return;
  double dot = 0.0;
  for (std::size_t r = 0; r < p.unit.size(); ++r) dot += p.unit[r] * d_unit[r];
  for (std::size_t r = 0; r < p.unit.size(); ++r) {
    const double du = (d_unit[r] - p.unit[r] * dot) / p.norm;
    if (du == 0.0) continue;
    auto row = grad.row(r);
    for (std::size_t k = 0; k < p.input.index.size(); ++k) row[p.input.index[k]] += du * p.input.value[k];
  }
}

void check_dim(const ProjectionHead& head, const EmbeddingVector& v) {
  if (v.dim() != head.in_dim()) {
    throw ValidationError("projection: input dim " + std::to_string(v.dim()) + " does not match head in_dim " +
                          std::to_string(head.in_dim()));
  }
}

}  // namespace

ProjectionHead init_head(std::size_t in_dim, std::size_t out_dim, std::uint64_t seed) {
  if (in_dim < 1 || out_dim < 1) throw ValidationError("projection head dimensions must be at least 1");
  const double a = std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  ProjectionHead head{Matrix(out_dim, in_dim)};
  Rng rng(derive_seed(seed, "head"));
  for (double& w : head.weights.data()) w = rng.uniform(-a, a);
  return head;
}

EmbeddingVector project(const ProjectionHead& head, const EmbeddingVector& v) {
  check_dim(head, v);
  EmbeddingVector out;
  out.values = apply(head.weights, nonzeros(v));
  return normalize(std::move(out));
}

LossResult batch_softmax_loss(const Matrix& s) {
  const std::size_t b = s.rows();
  if (b == 0 || s.cols() != b) throw ValidationError("batch softmax: similarity matrix must be square and non-empty");
  for (double x : s.data()) {
    if (!std::isfinite(x)) throw ValidationError("batch softmax: non-finite similarity");
  }
  LossResult r;
  r.grad = Matrix(b, b);
  const double inv_b = 1.0 / static_cast<double>(b);
  double total = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const auto row = s.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0.0;
    for (double x : row) z += std::exp(x - mx);
    const double lse = mx + std::log(z);
    total += row[i] - lse;
    for (std::size_t j = 0; j < b; ++j) {
      r.grad(i, j) = (std::exp(row[j] - lse) - (i == j ? 1.0 : 0.0)) * inv_b;
    }
  }
  r.loss = -total * inv_b;
  return r;
}

std::vector<Batch> make_batches(const std::vector<std::vector<std::size_t>>& per_label, std::uint64_t seed) {
  if (per_label.empty()) throw ValidationError("make_batches: no labels");
  std::size_t longest = 0;
  for (std::size_t l = 0; l < per_label.size(); ++l) {
    if (per_label[l].empty()) {
      throw ValidationError("make_batches: label position " + std::to_string(l) + " has no examples");
    }
    longest = std::max(longest, per_label[l].size());
  }
  Rng rng(seed);
  std::vector<std::vector<std::size_t>> queues = per_label;
  for (auto& q : queues) rng.shuffle(q);

  std::vector<Batch> batches(longest);
  for (std::size_t b = 0; b < longest; ++b) {
    batches[b].reserve(queues.size());
    for (std::size_t l = 0; l < queues.size(); ++l) {
      batches[b].push_back({queues[l][b % queues[l].size()], l});
    }
  }
  return batches;
}

HeadGradient head_loss_and_gradient(const ProjectionHead& head, std::span<const EmbeddingVector> premises,
                                    std::span<const EmbeddingVector> hypotheses) {
  const std::size_t b = premises.size();
  if (b == 0 || hypotheses.size() != b) throw ValidationError("batch needs matching premise and hypothesis lists");
  std::vector<Projection> xs, ys;
  xs.reserve(b);
  ys.reserve(b);
  for (const auto& x : premises) {
    check_dim(head, x);
    xs.push_back(forward(head.weights, x));
  }
  for (const auto& y : hypotheses) {
    check_dim(head, y);
    ys.push_back(forward(head.weights, y));
  }

  const std::size_t d = head.out_dim();
  Matrix s(b, b);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      double dot = 0.0;
      for (std::size_t r = 0; r < d; ++r) dot += xs[i].unit[r] * ys[j].unit[r];
      s(i, j) = dot;
    }
  }
  const LossResult lr = batch_softmax_loss(s);

  HeadGradient out{lr.loss, Matrix(head.out_dim(), head.in_dim())};
  std::vector<double> d_unit(d);
  for (std::size_t i = 0; i < b; ++i) {
    std::fill(d_unit.begin(), d_unit.end(), 0.0);
    for (std::size_t j = 0; j < b; ++j) {
      for (std::size_t r = 0; r < d; ++r) d_unit[r] += lr.grad(i, j) * ys[j].unit[r];
    }
    backward(xs[i], d_unit, out.grad);
  }
  for (std::size_t j = 0; j < b; ++j) {
    std::fill(d_unit.begin(), d_unit.end(), 0.0);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t r = 0; r < d; ++r) d_unit[r] += lr.grad(i, j) * xs[i].unit[r];
    }
    backward(ys[j], d_unit, out.grad);
  }
  return out;
}

TrainResult train(const ProjectionHead& head, std::span<const PairExample> pairs, const Embedder& embedder,
                  std::size_t num_labels, const TrainConfig& cfg) {
  if (cfg.epochs < 0) throw ValidationError("epochs must be non-negative");
  if (!std::isfinite(cfg.learning_rate)) throw ValidationError("learning rate must be finite");
  if (embedder.dim() != head.in_dim()) throw ValidationError("encoder dim does not match head in_dim");

  std::vector<EmbeddingVector> premises;
  std::vector<std::vector<std::size_t>> per_label(num_labels);
  std::vector<EmbeddingVector> hypotheses(num_labels);
  std::vector<bool> have_hypothesis(num_labels, false);
  for (const auto& p : pairs) {
    if (p.klass != PairClass::kEntailed) continue;
    if (p.label_index >= num_labels) throw ValidationError("pair label position out of range");
    per_label[p.label_index].push_back(premises.size());
    premises.push_back(embedder.embed_text(p.author_id, p.text_index, p.premise));
    if (!have_hypothesis[p.label_index]) {
      hypotheses[p.label_index] = embedder.embed_hypothesis(p.label_index, p.hypothesis);
      have_hypothesis[p.label_index] = true;
    }
  }

  TrainResult result{head, {}};
  std::vector<EmbeddingVector> batch_x(num_labels);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto batches = make_batches(per_label, derive_seed(cfg.seed, "batches/" + std::to_string(epoch)));
    double epoch_loss = 0.0;
    for (const auto& batch : batches) {
      for (const auto& e : batch) batch_x[e.label] = premises[e.example];
      const HeadGradient g = head_loss_and_gradient(result.head, batch_x, hypotheses);
      epoch_loss += g.loss;
      if (cfg.learning_rate != 0.0) {
        auto& w = result.head.weights.data();
        const auto& dw = g.grad.data();
        for (std::size_t k = 0; k < w.size(); ++k) w[k] -= cfg.learning_rate * dw[k];
      }
    }
    result.loss_history.push_back(epoch_loss / static_cast<double>(batches.size()));
  }
  return result;
}

SiameseScorer::SiameseScorer(const Embedder& embedder, const ProjectionHead* head, const HypothesisSet& hset)
    : embedder_(embedder), head_(head), hset_(hset) {
  if (head_ && head_->in_dim() != embedder_.dim()) throw ValidationError("encoder dim does not match head in_dim");
  hypothesis_vectors_.reserve(hset_.size());
  for (std::size_t l = 0; l < hset_.size(); ++l) {
    hypothesis_vectors_.push_back(encode(embedder_.embed_hypothesis(l, hset_.text_for(l))));
  }
}

EmbeddingVector SiameseScorer::encode(EmbeddingVector v) const {
  return head_ ? project(*head_, v) : normalize(std::move(v));
}

std::vector<double> SiameseScorer::scores(const std::string& author_id, std::size_t text_index,
                                          std::string_view text) const {
  const EmbeddingVector x = encode(embedder_.embed_text(author_id, text_index, text));
  std::vector<double> out;
  out.reserve(hypothesis_vectors_.size());
  for (const auto& h : hypothesis_vectors_) out.push_back(similarity(x, h));
  return out;
}

std::vector<double> zero_shot_scores(const Embedder& embedder, const ProjectionHead* head, std::string_view text,
                                     const HypothesisSet& hset, const std::string& author_id,
                                     std::size_t text_index) {
  return SiameseScorer(embedder, head, hset).scores(author_id, text_index, text);
}

std::string serialize_head(const HeadCheckpoint& ckpt) {
  nlohmann::ordered_json j;
  j["in_dim"] = ckpt.head.in_dim();
  j["out_dim"] = ckpt.head.out_dim();
  auto rows = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < ckpt.head.out_dim(); ++r) {
    const auto row = ckpt.head.weights.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  j["weights"] = std::move(rows);
  j["seed"] = ckpt.seed;
  j["epochs"] = ckpt.epochs;
  return j.dump() + "\n";
}

HeadCheckpoint parse_head(const std::string& json_text) {
  const auto j = parse_json_document(json_text, "head checkpoint");
  try {
    HeadCheckpoint ckpt;
    const auto in_dim = j.at("in_dim").get<std::size_t>();
    const auto out_dim = j.at("out_dim").get<std::size_t>();
    const auto& rows = j.at("weights");
    if (in_dim < 1 || out_dim < 1 || !rows.is_array() || rows.size() != out_dim) {
      throw ValidationError("head checkpoint: weights must have out_dim rows");
    }
    ckpt.head.weights = Matrix(out_dim, in_dim);
    for (std::size_t r = 0; r < out_dim; ++r) {
      const auto values = rows[r].get<std::vector<double>>();
      if (values.size() != in_dim) throw ValidationError("head checkpoint: row " + std::to_string(r) + " has wrong length");
      for (std::size_t c = 0; c < in_dim; ++c) {
        if (!std::isfinite(values[c])) throw ValidationError("head checkpoint: non-finite weight");
        ckpt.head.weights(r, c) = values[c];
      }
    }
    ckpt.seed = j.value("seed", std::uint64_t{0});
    ckpt.epochs = j.value("epochs", 0);
    return ckpt;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("head checkpoint: ") + e.what());
  }
}

HeadCheckpoint load_head(const std::filesystem::path& path) { return parse_head(read_file(path)); }

}  // namespace entailprof
