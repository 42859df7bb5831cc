#include "entailprof/corpus.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "entailprof/common.hpp"
#include "entailprof/jsonl.hpp"
#include "json.hpp"

namespace entailprof {

using nlohmann::json;

std::size_t LabeledDataset::label_index(const std::string& label) const {
  auto it = std::find(label_set.begin(), label_set.end(), label);
  if (it == label_set.end()) throw ValidationError("label '" + label + "' is not in the label set");
  return static_cast<std::size_t>(it - label_set.begin());
}

const Author& LabeledDataset::author(const std::string& id) const {
  for (const auto& a : authors) {
    if (a.id == id) return a;
  }
  throw ValidationError("unknown author id '" + id + "'");
}

std::size_t LabeledDataset::text_count() const {
  std::size_t n = 0;
  for (const auto& a : authors) n += a.texts.size();
  return n;
}

namespace {

std::vector<std::string> string_array(const json& j, const std::string& field, std::size_t line_no) {
  if (!j.is_array()) {
    throw ValidationError("line " + std::to_string(line_no) + ": '" + field + "' must be an array of strings");
  }
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_string()) {
      throw ValidationError("line " + std::to_string(line_no) + ": '" + field + "' must be an array of strings");
    }
    out.push_back(e.get<std::string>());
  }
  return out;
}

void check_label_set(const std::vector<std::string>& labels, const std::string& where) {
  std::set<std::string> seen;
  for (const auto& l : labels) {
    if (!seen.insert(l).second) throw ValidationError(where + ": duplicate label '" + l + "'");
  }
}

}  // namespace

LabeledDataset parse_dataset(const std::string& jsonl, const std::vector<std::string>& label_order) {
  LabeledDataset ds;
  std::optional<std::vector<std::string>> header_labels;
  std::unordered_set<std::string> ids;
  bool first_record = true;

  for (const auto& [line_no, record] : parse_jsonl_lines(jsonl)) {
    if (!record.is_object()) {
      throw ValidationError("line " + std::to_string(line_no) + ": record must be a JSON object");
    }
    if (first_record && record.contains("label_set") && !record.contains("author_id")) {
      header_labels = string_array(record["label_set"], "label_set", line_no);
      check_label_set(*header_labels, "line " + std::to_string(line_no));
      first_record = false;
      continue;
    }
    first_record = false;

    auto id_it = record.find("author_id");
    if (id_it == record.end() || !id_it->is_string()) {
      throw ValidationError("line " + std::to_string(line_no) + ": missing string field 'author_id'");
    }
    Author a;
    a.id = id_it->get<std::string>();
    if (!ids.insert(a.id).second) {
      throw ValidationError("line " + std::to_string(line_no) + ": duplicate author id '" + a.id + "'");
    }
    auto label_it = record.find("label");
    if (label_it != record.end() && !label_it->is_null()) {
      if (!label_it->is_string()) {
        throw ValidationError("line " + std::to_string(line_no) + ": 'label' must be a string or null");
      }
      a.label = label_it->get<std::string>();
    }
    auto texts_it = record.find("texts");
    if (texts_it == record.end()) {
      throw ValidationError("line " + std::to_string(line_no) + ": missing field 'texts'");
    }
    for (auto& t : string_array(*texts_it, "texts", line_no)) {
      if (has_content(t)) {
        a.texts.push_back(std::move(t));
      } else {
        ++ds.dropped_texts;
      }
    }
    if (a.texts.empty()) {
      throw ValidationError("line " + std::to_string(line_no) + ": author '" + a.id + "' has zero usable texts");
    }
    ds.authors.push_back(std::move(a));
  }

  if (!label_order.empty()) {
    check_label_set(label_order, "label order");
    ds.label_set = label_order;
  } else if (header_labels) {
    ds.label_set = *header_labels;
  }
  const bool declared = !ds.label_set.empty();
  std::set<std::string> known(ds.label_set.begin(), ds.label_set.end());
  for (const auto& a : ds.authors) {
    if (!a.label || known.count(*a.label)) continue;
    if (declared) {
      throw ValidationError("author '" + a.id + "' has label '" + *a.label + "' outside the declared label set");
    }
    known.insert(*a.label);
    ds.label_set.push_back(*a.label);
  }
  return ds;
}

LabeledDataset load_dataset(const std::filesystem::path& path, const std::vector<std::string>& label_order) {
  return parse_dataset(read_file(path), label_order);
}

std::string serialize_dataset(const LabeledDataset& ds) {
  std::ostringstream out;
  nlohmann::ordered_json header;
  header["label_set"] = ds.label_set;
  out << header.dump() << '\n';
  for (const auto& a : ds.authors) {
    nlohmann::ordered_json rec;
    rec["author_id"] = a.id;
    rec["label"] = a.label ? json(*a.label) : json(nullptr);
    rec["texts"] = a.texts;
    out << rec.dump() << '\n';
  }
  return out.str();
}

void write_dataset(const LabeledDataset& ds, const std::filesystem::path& path) {
  write_file_atomic(path, serialize_dataset(ds));
}

std::vector<FoldSplit> stratified_kfold(const LabeledDataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw ValidationError("number of folds must be at least 2");
  const auto folds = static_cast<std::size_t>(k);

  std::vector<std::vector<std::size_t>> by_class(ds.label_set.size());
  for (std::size_t i = 0; i < ds.authors.size(); ++i) {
    const auto& a = ds.authors[i];
    if (!a.label) throw ValidationError("author '" + a.id + "' is unlabeled and cannot be stratified");
    by_class[ds.label_index(*a.label)].push_back(i);
  }
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    if (by_class[c].size() < folds) {
      throw ValidationError("class '" + ds.label_set[c] + "' has " + std::to_string(by_class[c].size()) +
                            " authors, fewer than the " + std::to_string(k) + " folds requested");
    }
  }

  // fold_of[i] = test fold of author i
  std::vector<std::size_t> fold_of(ds.authors.size(), 0);
  Rng rng(derive_seed(seed, "kfold"));
  std::size_t offset = 0;
  for (auto& members : by_class) {
    rng.shuffle(members);
    for (std::size_t j = 0; j < members.size(); ++j) fold_of[members[j]] = (offset + j) % folds;
    offset = (offset + members.size()) % folds;
  }

  std::vector<FoldSplit> out(folds);
  for (std::size_t f = 0; f < folds; ++f) {
    out[f].fold_index = f;
    for (std::size_t i = 0; i < ds.authors.size(); ++i) {
      (fold_of[i] == f ? out[f].test_ids : out[f].train_ids).push_back(ds.authors[i].id);
    }
  }
  return out;
}

SubsampleResult subsample_users(const LabeledDataset& ds, std::size_t n_per_label, std::uint64_t seed) {
  if (n_per_label < 1) throw ValidationError("users per label must be at least 1");
  std::vector<std::vector<std::size_t>> by_class(ds.label_set.size());
  for (std::size_t i = 0; i < ds.authors.size(); ++i) {
    if (ds.authors[i].label) by_class[ds.label_index(*ds.authors[i].label)].push_back(i);
  }
  SubsampleResult result;
  std::vector<bool> keep(ds.authors.size(), false);
  Rng rng(derive_seed(seed, "subsample"));
  for (std::size_t c = 0; c < by_class.size(); ++c) {
    auto& members = by_class[c];
    if (members.size() < n_per_label) result.shortfalls.emplace_back(ds.label_set[c], members.size());
    rng.shuffle(members);
    const std::size_t take = std::min(n_per_label, members.size());
    for (std::size_t j = 0; j < take; ++j) keep[members[j]] = true;
  }
  result.dataset.label_set = ds.label_set;
  for (std::size_t i = 0; i < ds.authors.size(); ++i) {
    if (keep[i]) result.dataset.authors.push_back(ds.authors[i]);
  }
  return result;
}

LabeledDataset restrict_to(const LabeledDataset& ds, const std::vector<std::string>& ids) {
  std::unordered_set<std::string> wanted(ids.begin(), ids.end());
  LabeledDataset out;
  out.label_set = ds.label_set;
  for (const auto& a : ds.authors) {
    if (wanted.count(a.id)) out.authors.push_back(a);
  }
  return out;
}

}  // namespace entailprof
