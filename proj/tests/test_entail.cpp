#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "entailprof/common.hpp"
#include "entailprof/entail.hpp"

using namespace entailprof;

namespace {

const std::vector<std::string> kGender = {"female", "male"};
const std::vector<std::string> kBot = {"bot", "human"};

}  // namespace

TEST(Hypotheses, ObjectMapsLabels) {
  const auto sets = parse_hypothesis_sets(R"({"female": "I'm a female", "male": "I'm a male"})", kGender);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0].size(), 2u);
  EXPECT_EQ(sets[0].text_for(0), "I'm a female");
  EXPECT_EQ(sets[0].text_for(1), "I'm a male");
}

TEST(Hypotheses, EmptyFileGivesIdentity) {
  const auto sets = parse_hypothesis_sets("", kBot);
  ASSERT_EQ(sets.size(), 1u);
  EXPECT_EQ(sets[0], identity_hypotheses(kBot));
  EXPECT_EQ(sets[0].text_for(0), "bot");
}

TEST(Hypotheses, MissingLabelsFallBackToIdentity) {
  const auto sets = parse_hypothesis_sets(R"({"male": "I'm a man"})", kGender);
  EXPECT_EQ(sets[0].text_for(0), "female");
  EXPECT_EQ(sets[0].text_for(1), "I'm a man");
  EXPECT_EQ(sets[0].labels(), kGender);
}

TEST(Hypotheses, Errors) {
  EXPECT_THROW(parse_hypothesis_sets(R"({"alien": "..."})", kBot), ValidationError);
  EXPECT_THROW(parse_hypothesis_sets(R"({"bot": "  "})", kBot), ValidationError);
  EXPECT_THROW(parse_hypothesis_sets("[1, 2]", kBot), ValidationError);
  EXPECT_THROW(parse_hypothesis_sets("{oops", kBot), ValidationError);
}

TEST(Hypotheses, NamedSetsForSweeps) {
  const auto sets = parse_hypothesis_sets(
      R"([{"name": "short", "hypotheses": {"bot": "a bot"}},
          {"name": "long", "hypotheses": {"bot": "I am a bot", "human": "I am a human"}}])",
      kBot);
  ASSERT_EQ(sets.size(), 2u);
  EXPECT_EQ(sets[0].name, "short");
  EXPECT_EQ(sets[0].text_for(1), "human");
  EXPECT_EQ(sets[1].text_for(0), "I am a bot");
}

TEST(Pairs, CountsMatchLabels) {
  const std::vector<std::string> labels = {"a", "b", "c"};
  const auto hset = identity_hypotheses(labels);
  const std::vector<Author> one = {{"u", {"t"}, "b"}};
  const auto pairs = generate_pairs(one, hset, labels);
  ASSERT_EQ(pairs.size(), 3u);
  EXPECT_EQ(std::count_if(pairs.begin(), pairs.end(), [](const auto& p) { return p.klass == PairClass::kEntailed; }),
            1);
  EXPECT_EQ(pairs[1].klass, PairClass::kEntailed);
  EXPECT_EQ(pairs[1].hypothesis, "b");
  EXPECT_EQ(pairs[0].label, "b");

  const std::vector<Author> none = {{"u", {"t"}, "a"}};
  EXPECT_TRUE(generate_pairs(none, hset, labels, {{}}).empty());

  const std::vector<Author> five = {{"u", {"1", "2", "3", "4", "5"}, "a"}};
  const auto two = identity_hypotheses(kBot);
  const std::vector<Author> five_bot = {{"u", {"1", "2", "3", "4", "5"}, "bot"}};
  const auto p5 = generate_pairs(five_bot, two, kBot);
  EXPECT_EQ(p5.size(), 10u);
  EXPECT_EQ(std::count_if(p5.begin(), p5.end(), [](const auto& p) { return p.klass == PairClass::kEntailed; }), 5);
}

TEST(Pairs, UnlabeledAuthorFails) {
  const std::vector<Author> a = {{"u", {"t"}, std::nullopt}};
  EXPECT_THROW(generate_pairs(a, identity_hypotheses(kBot), kBot), ValidationError);
}

TEST(Pairs, PartitionPropertyOnRandomData) {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 50; ++t) {
    const std::size_t nl = 2 + t % 4;
    std::vector<std::string> labels;
    for (std::size_t l = 0; l < nl; ++l) labels.push_back("L" + std::to_string(l));
    std::vector<Author> authors;
    std::size_t texts = 0;
    for (int a = 0; a < 6; ++a) {
      Author au{"a" + std::to_string(a), {}, labels[rng() % nl]};
      const std::size_t n = 1 + rng() % 5;
      for (std::size_t i = 0; i < n; ++i) au.texts.push_back("x" + std::to_string(i));
      texts += n;
      authors.push_back(au);
    }
    const auto pairs = generate_pairs(authors, identity_hypotheses(labels), labels);
    ASSERT_EQ(pairs.size(), texts * nl);
    for (std::size_t i = 0; i < pairs.size(); i += nl) {
      int entailed = 0;
      for (std::size_t l = 0; l < nl; ++l) {
        const auto& p = pairs[i + l];
        const bool e = p.klass == PairClass::kEntailed;
        entailed += e;
        EXPECT_EQ(e, labels[p.label_index] == p.label);
        EXPECT_EQ(p.hypothesis, labels[p.label_index]);
      }
      EXPECT_EQ(entailed, 1);
    }
  }
}

TEST(Pairs, PermutationEquivariant) {
  std::vector<Author> authors = {{"b", {"x", "y"}, "bot"}, {"a", {"z"}, "human"}, {"c", {"w"}, "bot"}};
  const auto hset = identity_hypotheses(kBot);
  const auto base = generate_pairs(authors, hset, kBot);
  std::reverse(authors.begin(), authors.end());
  const auto again = generate_pairs(authors, hset, kBot);
  ASSERT_EQ(base.size(), again.size());
  for (std::size_t i = 0; i < base.size(); ++i) {
    EXPECT_EQ(base[i].author_id, again[i].author_id);
    EXPECT_EQ(base[i].text_index, again[i].text_index);
    EXPECT_EQ(base[i].label_index, again[i].label_index);
  }
  EXPECT_EQ(base.front().author_id, "a");
}

TEST(Pairs, SelectionRestrictsTexts) {
  const std::vector<Author> a = {{"u", {"t0", "t1", "t2"}, "bot"}};
  const auto pairs = generate_pairs(a, identity_hypotheses(kBot), kBot, {{2, 0}});
  ASSERT_EQ(pairs.size(), 4u);
  EXPECT_EQ(pairs[0].premise, "t0");
  EXPECT_EQ(pairs[2].premise, "t2");
  EXPECT_EQ(pairs[2].text_index, 2u);
}

TEST(PairScores, LoadAndQuery) {
  const auto t = parse_pair_scores(
      R"({"author_id": "u", "text_index": 0, "label": "bot", "entail_prob": 0.9}
{"author_id": "u", "text_index": 0, "label": "human", "entail_prob": 0.1}
{"author_id": "u", "text_index": 1, "label": "bot", "entail_prob": 0.2}
{"author_id": "u", "text_index": 1, "label": "human", "entail_prob": 0.7})");
  EXPECT_EQ(t.size(), 4u);
  EXPECT_DOUBLE_EQ(t.at("u", 1, "human"), 0.7);
  const std::vector<Author> authors = {{"u", {"a", "b", "c"}, "bot"}};
  EXPECT_EQ(t.missing(authors, kBot).size(), 2u);
  try {
    t.at("u", 2, "bot");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("u, 2, bot"), std::string::npos);
  }
}

TEST(PairScores, Errors) {
  EXPECT_THROW(parse_pair_scores(R"({"author_id": "u", "text_index": 0, "label": "bot", "entail_prob": 1.2})"),
               ValidationError);
  try {
    parse_pair_scores(R"({"author_id": "u", "text_index": 0, "label": "bot", "entail_prob": 0.5}
{"author_id": "u", "text_index": 0, "label": "bot", "entail_prob": 0.4})");
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate"), std::string::npos);
  }
}
