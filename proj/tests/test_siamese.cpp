#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "entailprof/common.hpp"
#include "entailprof/embed.hpp"
#include "entailprof/entail.hpp"
#include "entailprof/siamese.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace entailprof;

namespace {

EmbeddingVector vec(std::vector<double> v) { return EmbeddingVector{std::move(v), false}; }

Matrix random_matrix(std::mt19937_64& rng, std::size_t n, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Matrix m(n, n);
  for (double& x : m.data()) x = u(rng);
  return m;
}

}  // namespace

TEST(Head, InitIsDeterministicAndBounded) {
  const auto a = init_head(10, 4, 1);
  EXPECT_EQ(a, init_head(10, 4, 1));
  EXPECT_NE(a, init_head(10, 4, 2));
  const double bound = std::sqrt(6.0 / 14.0);
  for (double w : a.weights.data()) {
    EXPECT_GE(w, -bound);
    EXPECT_LE(w, bound);
  }
  EXPECT_EQ(a.in_dim(), 10u);
  EXPECT_EQ(a.out_dim(), 4u);
  EXPECT_THROW(init_head(0, 4, 1), ValidationError);
}

TEST(Head, ProjectCases) {
  const auto h = init_head(6, 3, 5);
  const auto out = project(h, vec({1, 2, 3, 4, 5, 6}));
  EXPECT_NEAR(l2_norm(out.values), 1.0, 1e-12);

  const ProjectionHead id{Matrix::identity(3)};
  const auto v = normalize(vec({1, 2, 2}));
  EXPECT_EQ(project(id, v).values, v.values);

  const ProjectionHead zero{Matrix(2, 3)};
  EXPECT_TRUE(project(zero, vec({1, 1, 1})).degenerate);
  EXPECT_THROW(project(id, vec({1, 2})), ValidationError);
}

TEST(Loss, WorkedValues) {
  EXPECT_NEAR(batch_softmax_loss(Matrix(2, 2)).loss, fixtures::kLn2, 1e-12);
  Matrix s = Matrix::identity(3);
  for (double& x : s.data()) x *= 10.0;
  EXPECT_NEAR(batch_softmax_loss(s).loss, fixtures::kLossTenIdentity3, 1e-12);
}

TEST(Loss, ConstantMatrixGivesLogB) {
  for (std::size_t b = 1; b <= 6; ++b) {
    EXPECT_NEAR(batch_softmax_loss(Matrix(b, b, 0.37)).loss, std::log(static_cast<double>(b)), 1e-12);
  }
}

TEST(Loss, NonNegativeAndRowsOfGradientSumToZero) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const std::size_t b = 1 + t % 5;
    const Matrix s = random_matrix(rng, b, 5.0);
    const auto r = batch_softmax_loss(s);
    EXPECT_GE(r.loss, 0.0);
    EXPECT_NEAR(r.loss, oracle::batch_softmax([&] {
                  oracle::Mat m(b, oracle::Vec(b));
                  for (std::size_t i = 0; i < b; ++i)
                    for (std::size_t j = 0; j < b; ++j) m[i][j] = s(i, j);
                  return m;
                }()),
                1e-12);
    for (std::size_t i = 0; i < b; ++i) {
      double sum = 0.0;
      for (double g : r.grad.row(i)) sum += g;
      EXPECT_NEAR(sum, 0.0, 1e-12);
    }
  }
}

TEST(Loss, ApproachesZeroWithDiagonalDominance) {
  double prev = 1e9;
  for (double scale : {1.0, 5.0, 20.0, 80.0}) {
    Matrix s = Matrix::identity(4);
    for (double& x : s.data()) x *= scale;
    const double j = batch_softmax_loss(s).loss;
    EXPECT_LT(j, prev);
    prev = j;
  }
  EXPECT_LT(prev, 1e-30);
}

TEST(Loss, GradientMatchesDifferencesOfS) {
  std::mt19937_64 rng(12);
  for (int t = 0; t < 20; ++t) {
    const std::size_t b = 2 + t % 3;
    Matrix s = random_matrix(rng, b, 2.0);
    const auto r = batch_softmax_loss(s);
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        const double keep = s(i, j);
        s(i, j) = keep + 1e-6;
        const double up = batch_softmax_loss(s).loss;
        s(i, j) = keep - 1e-6;
        const double down = batch_softmax_loss(s).loss;
        s(i, j) = keep;
        EXPECT_NEAR(r.grad(i, j), (up - down) / 2e-6, 1e-8);
      }
    }
  }
}

TEST(Loss, RejectsBadInput) {
  Matrix s(2, 2);
  s(0, 1) = std::nan("");
  EXPECT_THROW(batch_softmax_loss(s), ValidationError);
  EXPECT_THROW(batch_softmax_loss(Matrix(2, 3)), ValidationError);
}

TEST(Batches, WorkedCounts) {
  const auto even = make_batches({{0, 1, 2}, {3, 4, 5}}, 1);
  ASSERT_EQ(even.size(), 3u);
  for (const auto& b : even) {
    ASSERT_EQ(b.size(), 2u);
    EXPECT_EQ(b[0].label, 0u);
    EXPECT_EQ(b[1].label, 1u);
  }
  const auto uneven = make_batches({{0, 1, 2, 3}, {4, 5}}, 1);
  ASSERT_EQ(uneven.size(), 4u);
  std::map<std::size_t, int> uses;
  for (const auto& b : uneven) ++uses[b[1].example];
  EXPECT_EQ(uses[4], 2);
  EXPECT_EQ(uses[5], 2);
  EXPECT_THROW(make_batches({{0, 1, 2}, {}}, 1), ValidationError);
}

TEST(Batches, SeedControlsOrder) {
  std::vector<std::vector<std::size_t>> q = {{0, 1, 2, 3, 4, 5, 6, 7}, {8, 9, 10, 11, 12, 13, 14, 15}};
  const auto order = [](const std::vector<Batch>& bs) {
    std::vector<std::size_t> v;
    for (const auto& b : bs)
      for (const auto& e : b) v.push_back(e.example);
    return v;
  };
  EXPECT_EQ(order(make_batches(q, 3)), order(make_batches(q, 3)));
  EXPECT_NE(order(make_batches(q, 3)), order(make_batches(q, 4)));
}

TEST(HeadGradient, DegenerateProjectionContributesNothing) {
  ProjectionHead h{Matrix(2, 3)};
  h.weights(0, 0) = 1.0;
  h.weights(1, 1) = 1.0;
  // The second premise lies in the null space of the head.
  const std::vector<EmbeddingVector> xs = {vec({1, 0.5, 0}), vec({0, 0, 1})};
  const std::vector<EmbeddingVector> ys = {vec({1, 0, 0}), vec({0, 1, 0})};
  const auto g = head_loss_and_gradient(h, xs, ys);
  EXPECT_TRUE(std::isfinite(g.loss));
  for (std::size_t r = 0; r < 2; ++r) EXPECT_EQ(g.grad(r, 2), 0.0);
}

namespace {

// Two labels with orthogonal premise clusters and matching hypotheses.
class ToyEmbedder : public Embedder {
 public:
  std::size_t dim() const override { return 6; }
  EmbeddingVector embed_text(const std::string&, std::size_t i, std::string_view text) const override {
    const bool left = text.front() == 'L';
    std::vector<double> v(6, 0.05);
    v[left ? 0 : 3] = 1.0;
    v[left ? 1 : 4] = 0.3 * static_cast<double>(i % 3);
    v[2] = 0.4;
    return normalize(vec(v));
  }
  EmbeddingVector embed_hypothesis(std::size_t label, std::string_view) const override {
    std::vector<double> v(6, 0.05);
    v[label == 0 ? 0 : 3] = 1.0;
    v[5] = 0.4;
    return normalize(vec(v));
  }
};

std::vector<PairExample> toy_pairs() {
  const std::vector<std::string> labels = {"L", "R"};
  std::vector<Author> authors = {{"a", {"L1", "L2", "L3", "L4"}, "L"}, {"b", {"R1", "R2", "R3"}, "R"}};
  return generate_pairs(authors, identity_hypotheses(labels), labels);
}

}  // namespace

TEST(Train, ZeroLearningRateKeepsHead) {
  ToyEmbedder emb;
  const auto pairs = toy_pairs();
  const auto head = init_head(6, 4, 7);
  const auto r = train(head, pairs, emb, 2, {3, 0.0, 1});
  EXPECT_EQ(r.head, head);
  EXPECT_EQ(r.loss_history.size(), 3u);
}

TEST(Train, LossDecreasesAndIsDeterministic) {
  ToyEmbedder emb;
  const auto pairs = toy_pairs();
  const auto head = init_head(6, 4, 7);
  const TrainConfig cfg{10, 0.5, 3};
  const auto a = train(head, pairs, emb, 2, cfg);
  const auto b = train(head, pairs, emb, 2, cfg);
  EXPECT_EQ(a.loss_history, b.loss_history);
  EXPECT_EQ(a.head, b.head);
  EXPECT_LT(a.loss_history.back(), a.loss_history.front());
}

TEST(Train, DimensionMismatchFails) {
  ToyEmbedder emb;
  EXPECT_THROW(train(init_head(5, 4, 1), toy_pairs(), emb, 2, {}), ValidationError);
}

TEST(Scores, ZeroShotCases) {
  EmbeddingTable t(2);
  t.insert("u", 0, vec({1, 0}));
  t.insert("u", 1, vec({0, 0}));
  t.insert(std::string(kHypothesisAuthor), 0, vec({1, 0}));
  t.insert(std::string(kHypothesisAuthor), 1, vec({0, 1}));
  const auto hset = identity_hypotheses({"a", "b"});
  EXPECT_EQ(zero_shot_scores(t, nullptr, "", hset, "u", 0), (std::vector<double>{1.0, 0.0}));
  EXPECT_EQ(zero_shot_scores(t, nullptr, "", hset, "u", 1), (std::vector<double>{0.0, 0.0}));

  const std::vector<std::string> corpus = {"hello world", "goodbye moon"};
  const auto enc = HashedTfidfEncoder::fit(corpus, {});
  const auto hs = make_hypothesis_set({{"a", "hello world"}, {"b", "goodbye moon"}}, {"a", "b"}, "x");
  const auto s = zero_shot_scores(enc, nullptr, "hello world", hs);
  EXPECT_NEAR(s[0], 1.0, 1e-12);
  EXPECT_LT(s[1], s[0]);
}

TEST(Scores, ArgmaxInvariantToHeadScaling) {
  std::mt19937_64 rng(21);
  const std::vector<std::string> corpus = {"abc def", "ghi jkl", "mno pqr", "abc jkl"};
  const auto enc = HashedTfidfEncoder::fit(corpus, {});
  const auto hs = make_hypothesis_set({{"x", "abc"}, {"y", "jkl"}, {"z", "pqr"}}, {"x", "y", "z"}, "h");
  auto head = init_head(enc.dim(), 8, 4);
  auto scaled = head;
  for (double& w : scaled.weights.data()) w *= 3.5;
  for (const auto& text : corpus) {
    const auto a = zero_shot_scores(enc, &head, text, hs);
    const auto b = zero_shot_scores(enc, &scaled, text, hs);
    EXPECT_EQ(std::max_element(a.begin(), a.end()) - a.begin(), std::max_element(b.begin(), b.end()) - b.begin());
  }
}

TEST(Checkpoint, RoundTrip) {
  const HeadCheckpoint c{init_head(5, 3, 9), 9, 10};
  const auto back = parse_head(serialize_head(c));
  EXPECT_EQ(back.head, c.head);
  EXPECT_EQ(back.seed, 9u);
  EXPECT_EQ(back.epochs, 10);
  EXPECT_THROW(parse_head(R"({"in_dim": 2, "out_dim": 1, "weights": [[1]]})"), ValidationError);
}
