#ifndef ENTAILPROF_CORPUS_HPP_
#define ENTAILPROF_CORPUS_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace entailprof {

/// One author: an id, the texts they wrote, and an optional gold label.
struct Author {
  std::string id;
  std::vector<std::string> texts;
  std::optional<std::string> label;
};

/// Authors plus the ordered label set. The label order is fixed at load
/// time; every downstream tie-break and matrix column follows it.
struct LabeledDataset {
  std::vector<Author> authors;
  std::vector<std::string> label_set;
  /// Whitespace-only texts removed while loading.
  std::size_t dropped_texts = 0;

  /// Position of `label` in label_set. Throws ValidationError if absent.
  std::size_t label_index(const std::string& label) const;
  const Author& author(const std::string& id) const;
  std::size_t text_count() const;
};

struct FoldSplit {
  std::size_t fold_index = 0;
  std::vector<std::string> train_ids;
  std::vector<std::string> test_ids;
};

/// Parses dataset JSONL (optional `{"label_set": [...]}` header line, then
/// one `{"author_id", "label", "texts"}` record per line).
///
/// If `label_order` is non-empty it overrides the header; otherwise the
/// header order is used, otherwise first-appearance order. Texts without a
/// non-whitespace character are dropped and counted.
LabeledDataset parse_dataset(const std::string& jsonl,
                             const std::vector<std::string>& label_order = {});

LabeledDataset load_dataset(const std::filesystem::path& path,
                            const std::vector<std::string>& label_order = {});

/// Inverse of parse_dataset: header line with label_set, then one record
/// per author in dataset order.
std::string serialize_dataset(const LabeledDataset& ds);

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path);

/// Author-level stratified k-fold split. Every class must have at least k
/// labeled authors and every author must be labeled.
///
/// Within each class the authors are shuffled (seeded) and dealt round-robin
/// over the folds; the dealing offset carries over from one class to the
/// next so fold sizes stay balanced overall.
std::vector<FoldSplit> stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed);

struct SubsampleResult {
  LabeledDataset dataset;
  /// (label, available) for every label with fewer than n authors.
  std::vector<std::pair<std::string, std::size_t>> shortfalls;
};

/// Samples min(n_per_label, available) labeled authors per label without
/// replacement. Output keeps the input author order; unlabeled authors are
/// dropped.
SubsampleResult subsample_users(const LabeledDataset& ds, std::size_t n_per_label,
                                std::uint64_t seed);

/// Restricts a dataset to the given author ids, keeping dataset order.
LabeledDataset restrict_to(const LabeledDataset& ds, const std::vector<std::string>& ids);

}  // namespace entailprof

#endif  // ENTAILPROF_CORPUS_HPP_
