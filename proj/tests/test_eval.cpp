#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>

#include "entailprof/common.hpp"
#include "entailprof/eval.hpp"
#include "entailprof/report.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

using namespace entailprof;

namespace {

using Labels = std::vector<std::string>;

const synthetic::Corpus& small_corpus() {
  static const synthetic::Corpus c = [] {
    synthetic::Options opt;
    opt.authors_per_class = 20;
    opt.texts_per_author = 8;
    return synthetic::make_corpus(opt);
  }();
  return c;
}

PipelineConfig zero_shot_config() {
  PipelineConfig p;
  p.task = "synthetic";
  p.hypotheses = small_corpus().hypotheses;
  return p;
}

}  // namespace

TEST(Metrics, AccuracyCases) {
  const Labels all = {"A", "B", "A"};
  EXPECT_DOUBLE_EQ(accuracy(all, all), 1.0);
  EXPECT_DOUBLE_EQ(accuracy(Labels{"A", "A", "B", "B"}, Labels{"A", "B", "B", "B"}), 0.75);
  EXPECT_THROW(accuracy(Labels{}, Labels{}), ValidationError);
  EXPECT_THROW(accuracy(Labels{"A"}, Labels{"A", "B"}), ValidationError);
}

TEST(Metrics, MacroF1Cases) {
  const Labels ab = {"A", "B"};
  EXPECT_DOUBLE_EQ(macro_f1(Labels{"A", "B"}, Labels{"A", "B"}, ab).macro_f1, 1.0);
  const auto m = macro_f1(Labels{"A", "A", "A", "A"}, Labels{"A", "A", "B", "B"}, ab);
  EXPECT_EQ(m.macro_f1, 1.0 / 3.0);
  EXPECT_EQ(m.per_class_f1, (std::vector<double>{2.0 / 3.0, 0.0}));
  const auto absent = macro_f1(Labels{"A", "B"}, Labels{"A", "B"}, Labels{"A", "B", "C"});
  EXPECT_DOUBLE_EQ(absent.macro_f1, 2.0 / 3.0);
  EXPECT_THROW(macro_f1(Labels{"Z"}, Labels{"A"}, ab), ValidationError);
}

TEST(Metrics, AgreeWithConfusionMatrixOracle) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 500; ++t) {
    const std::size_t nl = 2 + t % 4;
    Labels labels;
    for (std::size_t l = 0; l < nl; ++l) labels.push_back(std::string(1, static_cast<char>('A' + l)));
    Labels pred, gold;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t i = 0; i < n; ++i) {
      pred.push_back(labels[rng() % nl]);
      gold.push_back(labels[rng() % nl]);
    }
    const auto got = macro_f1(pred, gold, labels);
    const auto want = oracle::confusion_scores(pred, gold, labels);
    EXPECT_NEAR(got.accuracy, want.accuracy, 1e-12);
    EXPECT_NEAR(got.macro_f1, want.macro_f1, 1e-12);
    for (std::size_t l = 0; l < nl; ++l) EXPECT_NEAR(got.per_class_f1[l], want.f1[l], 1e-12);
  }
}

TEST(Metrics, PopulationStd) {
  std::vector<Metrics> folds(2);
  folds[0] = {0.5, 0.2, {0.2}};
  folds[1] = {1.0, 0.6, {0.6}};
  Metrics mean, sd;
  summarize(folds, mean, sd);
  EXPECT_DOUBLE_EQ(mean.accuracy, 0.75);
  EXPECT_DOUBLE_EQ(sd.accuracy, 0.25);
  EXPECT_NEAR(sd.macro_f1, 0.2, 1e-15);
  EXPECT_NEAR(sd.per_class_f1[0], 0.2, 1e-15);
}

TEST(CrossValidate, ZeroShotSeparatesSyntheticClasses) {
  const auto r = cross_validate(small_corpus().dataset, 5, zero_shot_config(), 0);
  EXPECT_GE(r.mean.macro_f1, 0.9);
  EXPECT_EQ(r.per_fold.size(), 5u);
  EXPECT_EQ(r.model, "SN");
  EXPECT_EQ(r.selection, "-");
  EXPECT_EQ(r.n, 0u);
  EXPECT_EQ(r.s, 0u);
}

TEST(CrossValidate, DeterministicAndByteIdentical) {
  auto cfg = zero_shot_config();
  cfg.few_shot = true;
  cfg.n_per_label = 4;
  cfg.epochs = 2;
  const auto a = cross_validate(small_corpus().dataset, 3, cfg, 5);
  const auto b = cross_validate(small_corpus().dataset, 3, cfg, 5);
  EXPECT_EQ(a, b);
  const std::vector<EvalReport> ra = {a}, rb = {b};
  EXPECT_EQ(serialize_reports(ra, small_corpus().dataset.label_set),
            serialize_reports(rb, small_corpus().dataset.label_set));
  EXPECT_EQ(a.s, 8u);
}

TEST(CrossValidate, ClusterSelectionVariesPerAuthor) {
  auto cfg = zero_shot_config();
  cfg.few_shot = true;
  cfg.n_per_label = 4;
  cfg.epochs = 1;
  cfg.selection = {SelectionMethod::kCluster, 1, 0.5};
  const auto r = cross_validate(small_corpus().dataset, 3, cfg, 1);
  EXPECT_EQ(r.selection, "IS");
  EXPECT_GT(r.s, 8u);
  EXPECT_LE(r.s, 64u);
}

TEST(CrossValidate, PairScoreTableWithoutEncoder) {
  const auto& ds = small_corpus().dataset;
  auto table = std::make_shared<PairScoreTable>();
  for (const auto& a : ds.authors) {
    for (std::size_t t = 0; t < a.texts.size(); ++t) {
      for (const auto& l : ds.label_set) table->insert(a.id, t, l, l == *a.label ? 0.8 : 0.3);
    }
  }
  PipelineConfig cfg;
  cfg.pair_scores = table;
  const auto r = cross_validate(ds, 5, cfg, 0);
  EXPECT_EQ(r.model, "CA");
  EXPECT_DOUBLE_EQ(r.mean.macro_f1, 1.0);
  cfg.few_shot = true;
  EXPECT_THROW(cross_validate(ds, 5, cfg, 0), ValidationError);

  auto partial = std::make_shared<PairScoreTable>();
  partial->insert(ds.authors[0].id, 0, ds.label_set[0], 0.5);
  PipelineConfig bad;
  bad.pair_scores = partial;
  EXPECT_THROW(cross_validate(ds, 5, bad, 0), ValidationError);
}

TEST(Sweeps, ShotsCarryNAndS) {
  auto cfg = zero_shot_config();
  cfg.epochs = 1;
  const auto rows = sweep_shots(small_corpus().dataset, {2, 4, 8}, 5, cfg, 0);
  ASSERT_EQ(rows.size(), 3u);
  for (const auto& r : rows) {
    EXPECT_EQ(r.selection, "Ra1");
    EXPECT_EQ(r.s, 2 * r.n);
  }
  EXPECT_THROW(sweep_shots(small_corpus().dataset, {}, 5, cfg, 0), ValidationError);
  EXPECT_THROW(sweep_shots(small_corpus().dataset, {8, 4}, 5, cfg, 0), ValidationError);
}

TEST(Sweeps, HypothesesIncludeIdentityAndFlagBest) {
  const auto& c = small_corpus();
  const auto rows = sweep_hypotheses(c.dataset, {c.hypotheses, c.shuffled}, 5, zero_shot_config(), 0);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0].hypotheses, "identity");
  EXPECT_TRUE(rows[1].best);
  EXPECT_GT(rows[1].mean.macro_f1, rows[2].mean.macro_f1);
  int flagged = 0;
  for (const auto& r : rows) flagged += r.best;
  EXPECT_EQ(flagged, 1);

  const auto twins = sweep_hypotheses(c.dataset, {c.hypotheses, c.hypotheses}, 5, zero_shot_config(), 0);
  EXPECT_EQ(twins[1].per_fold, twins[2].per_fold);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<EmbeddingVector> x(3);
  for (auto& v : x)
    for (int k = 0; k < 4; ++k) v.values.push_back(u(rng));
  const std::vector<std::size_t> y = {0, 2, 1};
  LogisticModel m{Matrix(3, 4), std::vector<double>(3)};
  for (double& w : m.weights.data()) w = u(rng);
  for (double& b : m.bias) b = u(rng);
  const double l2 = 0.1;
  const auto g = logistic_loss_and_gradient(m, x, y, l2);
  const double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < m.weights.data().size(); ++i) {
    auto up = m, down = m;
    up.weights.data()[i] += h;
    down.weights.data()[i] -= h;
    const double n =
        (logistic_loss_and_gradient(up, x, y, l2).loss - logistic_loss_and_gradient(down, x, y, l2).loss) / (2 * h);
    const double a = g.grad_weights.data()[i];
    worst = std::max(worst, std::fabs(a - n) / std::max({std::fabs(a), std::fabs(n), 1e-8}));
  }
  for (std::size_t c = 0; c < 3; ++c) {
    auto up = m, down = m;
    up.bias[c] += h;
    down.bias[c] -= h;
    const double n =
        (logistic_loss_and_gradient(up, x, y, l2).loss - logistic_loss_and_gradient(down, x, y, l2).loss) / (2 * h);
    worst = std::max(worst, std::fabs(g.grad_bias[c] - n) / std::max({std::fabs(g.grad_bias[c]), std::fabs(n), 1e-8}));
  }
  EXPECT_LE(worst, 1e-4);
}

TEST(Logistic, LossNonIncreasingOnSeparableData) {
  const std::vector<EmbeddingVector> x = {{{1, 0, 0.2}, false}, {{0.9, 0.1, 0}, false}, {{0, 1, 0.1}, false},
                                          {{0.1, 1, 0}, false}};
  const std::vector<std::size_t> y = {0, 0, 1, 1};
  LogisticConfig cfg;
  cfg.epochs = 100;
  cfg.learning_rate = 0.1;
  std::vector<double> history;
  const auto m = fit_logistic(x, y, 2, cfg, &history);
  ASSERT_EQ(history.size(), 100u);
  for (std::size_t i = 1; i < history.size(); ++i) EXPECT_LE(history[i], history[i - 1] + 1e-9);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_EQ(predict_logistic(m, x[i]), y[i]);
  const std::vector<std::size_t> one = {0, 0, 0, 0};
  EXPECT_THROW(fit_logistic(x, one, 2, cfg), ValidationError);
}

TEST(Baseline, MemorizesTinySeparableSet) {
  const std::vector<Author> authors = {{"a", {"apple banana", "cherry apple"}, "fruit"},
                                       {"b", {"banana cherry"}, "fruit"},
                                       {"c", {"tiger lion", "zebra"}, "animal"},
                                       {"d", {"lion zebra tiger"}, "animal"}};
  const Labels labels = {"fruit", "animal"};
  EXPECT_DOUBLE_EQ(baseline_char_lr(authors, authors, labels, {}).accuracy, 1.0);
  const std::vector<Author> single = {authors[0], authors[1]};
  EXPECT_THROW(baseline_char_lr(single, authors, labels, {}), ValidationError);
}

TEST(Baseline, CrossValidatesOnSynthetic) {
  LogisticConfig cfg;
  cfg.epochs = 30;
  const auto r = cross_validate_baseline(small_corpus().dataset, 5, cfg, "synthetic", 0);
  EXPECT_EQ(r.model, "user-char-lr");
  EXPECT_EQ(r.per_fold.size(), 5u);
  EXPECT_GE(r.mean.macro_f1, 0.9);
}

TEST(Reports, JsonRoundTripAndTables) {
  auto cfg = zero_shot_config();
  const auto r = cross_validate(small_corpus().dataset, 5, cfg, 0);
  const std::vector<EvalReport> rows = {r};
  Labels labels;
  const auto back = parse_reports(serialize_reports(rows, small_corpus().dataset.label_set), &labels);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
  EXPECT_EQ(labels, small_corpus().dataset.label_set);
  const auto csv = reports_to_csv(rows);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "task,model,n,selection,s,f1_mean,f1_std,acc_mean,acc_std,hypotheses,best");
  EXPECT_NE(reports_to_markdown(rows).find("| synthetic | SN | 0 | - | 0 |"), std::string::npos);
}
