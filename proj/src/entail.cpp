#include "entailprof/entail.hpp"

#include <algorithm>
#include <numeric>

#include "entailprof/common.hpp"
#include "entailprof/jsonl.hpp"

namespace entailprof {

using nlohmann::json;

std::vector<std::string> HypothesisSet::labels() const {
  std::vector<std::string> out;
  out.reserve(hypotheses.size());
  for (const auto& h : hypotheses) out.push_back(h.label);
  return out;
}

HypothesisSet identity_hypotheses(const std::vector<std::string>& label_set) {
  HypothesisSet set;
  set.name = "identity";
  for (const auto& l : label_set) set.hypotheses.push_back({l, l});
  return set;
}

HypothesisSet make_hypothesis_set(const std::map<std::string, std::string>& mapping,
                                  const std::vector<std::string>& label_set, std::string name) {
  for (const auto& [label, text] : mapping) {
    if (std::find(label_set.begin(), label_set.end(), label) == label_set.end()) {
      throw ValidationError("hypothesis given for unknown label '" + label + "'");
    }
    if (!has_content(text)) throw ValidationError("empty hypothesis text for label '" + label + "'");
  }
  HypothesisSet set;
  set.name = std::move(name);
  for (const auto& l : label_set) {
    auto it = mapping.find(l);
    set.hypotheses.push_back({l, it == mapping.end() ? l : it->second});
  }
  return set;
}

namespace {

std::map<std::string, std::string> string_mapping(const json& obj, const std::string& where) {
  if (!obj.is_object()) throw ValidationError(where + ": hypotheses must be a JSON object");
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_string()) throw ValidationError(where + ": hypothesis for '" + k + "' must be a string");
    out.emplace(k, v.get<std::string>());
  }
  return out;
}

}  // namespace

std::vector<HypothesisSet> parse_hypothesis_sets(const std::string& text, const std::vector<std::string>& label_set) {
  if (!has_content(text)) return {identity_hypotheses(label_set)};
  const json doc = parse_json_document(text, "hypothesis file");
  if (doc.is_object()) {
    return {make_hypothesis_set(string_mapping(doc, "hypothesis file"), label_set, "default")};
  }
  if (!doc.is_array() || doc.empty()) {
    throw ValidationError("hypothesis file: expected an object or a non-empty array of named sets");
  }
  std::vector<HypothesisSet> sets;
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    const std::string where = "hypothesis set #" + std::to_string(i);
    if (!entry.is_object() || !entry.contains("hypotheses")) {
      throw ValidationError(where + ": expected {\"name\": ..., \"hypotheses\": {...}}");
    }
    std::string name = "set" + std::to_string(i);
    if (entry.contains("name")) {
      if (!entry["name"].is_string()) throw ValidationError(where + ": 'name' must be a string");
      name = entry["name"].get<std::string>();
    }
    sets.push_back(make_hypothesis_set(string_mapping(entry["hypotheses"], where), label_set, name));
  }
  return sets;
}

std::vector<HypothesisSet> load_hypothesis_sets(const std::filesystem::path& path,
                                                const std::vector<std::string>& label_set) {
  return parse_hypothesis_sets(read_file(path), label_set);
}

HypothesisSet load_hypotheses(const std::filesystem::path& path, const std::vector<std::string>& label_set) {
  auto sets = load_hypothesis_sets(path, label_set);
  if (sets.size() != 1) {
    throw ValidationError("'" + path.string() + "' holds " + std::to_string(sets.size()) +
                          " hypothesis sets; expected exactly one");
  }
  return std::move(sets.front());
}

std::vector<PairExample> generate_pairs(std::span<const Author> authors, const HypothesisSet& hset,
                                        const std::vector<std::string>& label_set,
                                        const std::vector<std::vector<std::size_t>>& selection) {
  if (hset.labels() != label_set) throw ValidationError("hypothesis set does not match the label set");
  if (!selection.empty() && selection.size() != authors.size()) {
    throw ValidationError("selection must list one entry per author");
  }

  // Visit authors by id so the output order does not depend on input order.
  std::vector<std::size_t> order(authors.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return authors[a].id < authors[b].id; });

  std::vector<PairExample> pairs;
  for (std::size_t a : order) {
    const Author& author = authors[a];
    if (!author.label) throw ValidationError("author '" + author.id + "' is unlabeled; cannot build pairs");
    const auto ref = static_cast<std::size_t>(
        std::find(label_set.begin(), label_set.end(), *author.label) - label_set.begin());
    if (ref == label_set.size()) throw ValidationError("author '" + author.id + "' has an unknown label");

    std::vector<std::size_t> texts;
    if (selection.empty()) {
      texts.resize(author.texts.size());
      std::iota(texts.begin(), texts.end(), 0);
    } else {
      texts = selection[a];
      std::sort(texts.begin(), texts.end());
    }
    for (std::size_t t : texts) {
      if (t >= author.texts.size()) {
        throw ValidationError("selected text " + std::to_string(t) + " out of range for author '" + author.id + "'");
      }
      for (std::size_t l = 0; l < label_set.size(); ++l) {
        PairExample p;
        p.premise = author.texts[t];
        p.hypothesis = hset.text_for(l);
        p.klass = l == ref ? PairClass::kEntailed : PairClass::kContradicted;
        p.label = *author.label;
        p.label_index = l;
        p.author_id = author.id;
        p.text_index = t;
        pairs.push_back(std::move(p));
      }
    }
  }
  return pairs;
}

void PairScoreTable::insert(const std::string& author_id, std::size_t text_index, const std::string& label,
                            double prob) {
  const std::string desc = "(" + author_id + ", " + std::to_string(text_index) + ", " + label + ")";
  if (!(prob >= 0.0 && prob <= 1.0)) {
    throw ValidationError("entailment probability for " + desc + " is outside [0, 1]");
  }
  if (!scores_.emplace(Key{author_id, text_index, label}, prob).second) {
    throw ValidationError("duplicate pair score " + desc);
  }
}

double PairScoreTable::at(const std::string& author_id, std::size_t text_index, const std::string& label) const {
  auto it = scores_.find(Key{author_id, text_index, label});
  if (it == scores_.end()) {
    throw ValidationError("missing pair score (" + author_id + ", " + std::to_string(text_index) + ", " + label +
                          ")");
  }
  return it->second;
}

std::vector<PairScoreTable::Key> PairScoreTable::missing(std::span<const Author> authors,
                                                         const std::vector<std::string>& label_set) const {
  std::vector<Key> out;
  for (const auto& a : authors) {
    for (std::size_t t = 0; t < a.texts.size(); ++t) {
      for (const auto& l : label_set) {
        Key k{a.id, t, l};
        if (!scores_.count(k)) out.push_back(std::move(k));
      }
    }
  }
  return out;
}

PairScoreTable parse_pair_scores(const std::string& jsonl) {
  PairScoreTable table;
  for (const auto& [line_no, rec] : parse_jsonl_lines(jsonl)) {
    const std::string where = "line " + std::to_string(line_no);
    if (!rec.is_object()) throw ValidationError(where + ": record must be a JSON object");
    if (!rec.contains("author_id") || !rec["author_id"].is_string()) {
      throw ValidationError(where + ": missing string field 'author_id'");
    }
    if (!rec.contains("text_index") || !rec["text_index"].is_number_unsigned()) {
      throw ValidationError(where + ": missing non-negative integer field 'text_index'");
    }
    if (!rec.contains("label") || !rec["label"].is_string()) {
      throw ValidationError(where + ": missing string field 'label'");
    }
    if (!rec.contains("entail_prob") || !rec["entail_prob"].is_number()) {
      throw ValidationError(where + ": missing numeric field 'entail_prob'");
    }
    try {
      table.insert(rec["author_id"].get<std::string>(), rec["text_index"].get<std::size_t>(),
                   rec["label"].get<std::string>(), rec["entail_prob"].get<double>());
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  return table;
}

PairScoreTable load_pair_scores(const std::filesystem::path& path) { return parse_pair_scores(read_file(path)); }

}  // namespace entailprof
