#ifndef ENTAILPROF_ENTAIL_HPP_
#define ENTAILPROF_ENTAIL_HPP_

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "entailprof/corpus.hpp"

namespace entailprof {

struct Hypothesis {
  std::string label;
  std::string text;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// One hypothesis per label, in label_set order.
struct HypothesisSet {
  std::string name;
  std::vector<Hypothesis> hypotheses;

  const std::string& text_for(std::size_t label_index) const { return hypotheses.at(label_index).text; }
  std::size_t size() const { return hypotheses.size(); }
  std::vector<std::string> labels() const;

  friend bool operator==(const HypothesisSet&, const HypothesisSet&) = default;
};

/// Each label represented by its raw string.
HypothesisSet identity_hypotheses(const std::vector<std::string>& label_set);

/// Builds a set from a label -> text mapping. Labels missing from the
/// mapping fall back to the identity hypothesis. Throws on unknown labels
/// and empty hypothesis texts.
HypothesisSet make_hypothesis_set(const std::map<std::string, std::string>& mapping,
                                  const std::vector<std::string>& label_set, std::string name);

/// Parses a hypothesis document. Accepts either a single object
/// `{"<label>": "<text>", ...}` or an array of named sets
/// `[{"name": ..., "hypotheses": {...}}, ...]`. Empty input yields the
/// identity set.
std::vector<HypothesisSet> parse_hypothesis_sets(const std::string& text,
                                                 const std::vector<std::string>& label_set);

std::vector<HypothesisSet> load_hypothesis_sets(const std::filesystem::path& path,
                                                const std::vector<std::string>& label_set);

/// Loads a single set; a file holding several sets is an error.
HypothesisSet load_hypotheses(const std::filesystem::path& path, const std::vector<std::string>& label_set);

enum class PairClass { kEntailed, kContradicted };

struct PairExample {
  std::string premise;
  std::string hypothesis;
  PairClass klass = PairClass::kContradicted;
  std::string label;            // reference label of the source text
  std::size_t label_index = 0;  // position of the hypothesis's label in label_set
  std::string author_id;
  std::size_t text_index = 0;
};

/// Entailment training pairs. For each selected text with reference label
/// l: one entailed pair against l's hypothesis and one contradicted pair per
/// other label, emitted in label_set order. Output is ordered by
/// (author id, text index, label position).
///
/// `selection[a]` lists the chosen text indices of `authors[a]`; an empty
/// selection list means every text of every author.
std::vector<PairExample> generate_pairs(std::span<const Author> authors, const HypothesisSet& hset,
                                        const std::vector<std::string>& label_set,
                                        const std::vector<std::vector<std::size_t>>& selection = {});

/// Externally computed entailment probabilities, keyed by
/// (author_id, text_index, label).
class PairScoreTable {
 public:
  using Key = std::tuple<std::string, std::size_t, std::string>;

  void insert(const std::string& author_id, std::size_t text_index, const std::string& label, double prob);

  /// Throws ValidationError naming the missing triple.
  double at(const std::string& author_id, std::size_t text_index, const std::string& label) const;
  std::size_t size() const { return scores_.size(); }

  /// Every (author, text, label) triple of `authors` x `label_set` that has
  /// no score.
  std::vector<Key> missing(std::span<const Author> authors, const std::vector<std::string>& label_set) const;

 private:
  std::map<Key, double> scores_;
};

PairScoreTable parse_pair_scores(const std::string& jsonl);
PairScoreTable load_pair_scores(const std::filesystem::path& path);

}  // namespace entailprof

#endif  // ENTAILPROF_ENTAIL_HPP_
