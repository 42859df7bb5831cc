#include "entailprof/embed.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "entailprof/common.hpp"
#include "entailprof/jsonl.hpp"

namespace entailprof {

double l2_norm(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

EmbeddingVector normalize(EmbeddingVector v) {
  const double norm = l2_norm(v.values);
  if (norm == 0.0) {
    v.degenerate = true;
    return v;
  }
  v.degenerate = false;
  if (std::abs(norm - 1.0) <= 1e-12) return v;
  for (double& x : v.values) x /= norm;
  return v;
}

double similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  if (u.dim() != v.dim()) {
    throw ValidationError("similarity: dimension mismatch (" + std::to_string(u.dim()) + " vs " +
                          std::to_string(v.dim()) + ")");
  }
  double dot = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) dot += u.values[i] * v.values[i];
  return dot;
}

HashedFeature hash_ngram(std::string_view gram, std::size_t hash_dim) {
  const std::uint64_t h = mix64(fnv1a64(gram) ^ kNgramHashSeed);
  return {static_cast<std::size_t>(h % hash_dim), (h >> 63) ? -1.0 : 1.0};
}

namespace {

void validate(const EncoderConfig& cfg) {
  if (cfg.n_min < 1 || cfg.n_max < cfg.n_min) {
    throw ValidationError("encoder: n-gram range must satisfy 1 <= n_min <= n_max");
  }
  if (cfg.hash_dim == 0 || (cfg.hash_dim & (cfg.hash_dim - 1)) != 0) {
    throw ValidationError("encoder: hash_dim must be a power of two");
  }
}

// Byte offsets of UTF-8 code point starts, plus the end offset.
std::vector<std::size_t> code_point_bounds(std::string_view s) {
  std::vector<std::size_t> bounds;
  bounds.reserve(s.size() + 1);
  for (std::size_t i = 0; i < s.size(); ++i) {
    if ((static_cast<unsigned char>(s[i]) & 0xC0) != 0x80) bounds.push_back(i);
  }
  bounds.push_back(s.size());
  return bounds;
}

}  // namespace

std::vector<std::string> char_ngrams(std::string_view text, const EncoderConfig& cfg) {
  std::string folded(text);
  if (cfg.lowercase) {
    for (char& c : folded) {
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
  }
  const auto bounds = code_point_bounds(folded);
  const std::size_t len = bounds.size() - 1;
  std::vector<std::string> grams;
  for (int n = cfg.n_min; n <= cfg.n_max; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (un > len) break;
    for (std::size_t i = 0; i + un <= len; ++i) {
      grams.emplace_back(folded.substr(bounds[i], bounds[i + un] - bounds[i]));
    }
  }
  return grams;
}

HashedTfidfEncoder::HashedTfidfEncoder(EncoderConfig cfg, std::vector<double> idf, std::size_t doc_count)
    : cfg_(cfg), idf_(std::move(idf)), doc_count_(doc_count) {
  validate(cfg_);
  if (idf_.size() != cfg_.hash_dim) throw ValidationError("encoder: idf length must equal hash_dim");
}

HashedTfidfEncoder HashedTfidfEncoder::fit(std::span<const std::string> texts, const EncoderConfig& cfg) {
  validate(cfg);
  if (texts.empty()) throw ValidationError("encoder: cannot fit on an empty corpus");
  std::vector<std::size_t> df(cfg.hash_dim, 0);
  std::vector<std::size_t> seen_in(cfg.hash_dim, 0);  // 1 + index of last doc touching a bucket
  for (std::size_t d = 0; d < texts.size(); ++d) {
    for (const auto& gram : char_ngrams(texts[d], cfg)) {
      const auto idx = hash_ngram(gram, cfg.hash_dim).index;
      if (seen_in[idx] != d + 1) {
        seen_in[idx] = d + 1;
        ++df[idx];
      }
    }
  }
  const double n = static_cast<double>(texts.size());
  std::vector<double> idf(cfg.hash_dim);
  for (std::size_t j = 0; j < cfg.hash_dim; ++j) {
    idf[j] = std::log((1.0 + n) / (1.0 + static_cast<double>(df[j]))) + 1.0;
  }
  return HashedTfidfEncoder(cfg, std::move(idf), texts.size());
}

EmbeddingVector HashedTfidfEncoder::embed(std::string_view text) const {
  EmbeddingVector v;
  v.values.assign(cfg_.hash_dim, 0.0);
  for (const auto& gram : char_ngrams(text, cfg_)) {
    const auto f = hash_ngram(gram, cfg_.hash_dim);
    v.values[f.index] += f.sign;
  }
  for (std::size_t j = 0; j < v.values.size(); ++j) v.values[j] *= idf_[j];
  return normalize(std::move(v));
}

void EmbeddingTable::insert(const std::string& author_id, std::size_t text_index, EmbeddingVector v) {
  const std::string key_desc = "(" + author_id + ", " + std::to_string(text_index) + ")";
  if (v.dim() == 0) throw ValidationError("embedding " + key_desc + " is empty");
  if (dim_ == 0) dim_ = v.dim();
  if (v.dim() != dim_) {
    throw ValidationError("embedding " + key_desc + " has dim " + std::to_string(v.dim()) + ", expected " +
                          std::to_string(dim_));
  }
  if (!vectors_.emplace(Key{author_id, text_index}, std::move(v)).second) {
    throw ValidationError("duplicate embedding " + key_desc);
  }
}

const EmbeddingVector& EmbeddingTable::at(const std::string& author_id, std::size_t text_index) const {
  auto it = vectors_.find(Key{author_id, text_index});
  if (it == vectors_.end()) {
    throw ValidationError("no embedding for (" + author_id + ", " + std::to_string(text_index) + ")");
  }
  return it->second;
}

bool EmbeddingTable::contains(const std::string& author_id, std::size_t text_index) const {
  return vectors_.count(Key{author_id, text_index}) > 0;
}

EmbeddingTable parse_embeddings(const std::string& jsonl) {
  std::size_t declared_dim = 0;
  bool pre_normalized = false;
  bool first = true;
  EmbeddingTable table;
  for (const auto& [line_no, rec] : parse_jsonl_lines(jsonl)) {
    const std::string where = "line " + std::to_string(line_no);
    if (!rec.is_object()) throw ValidationError(where + ": record must be a JSON object");
    if (first && !rec.contains("vector")) {
      first = false;
      if (rec.contains("dim")) {
        if (!rec["dim"].is_number_unsigned() || rec["dim"].get<std::size_t>() == 0) {
          throw ValidationError(where + ": 'dim' must be a positive integer");
        }
        declared_dim = rec["dim"].get<std::size_t>();
        table = EmbeddingTable(declared_dim);
      }
      if (rec.contains("normalized")) {
        if (!rec["normalized"].is_boolean()) throw ValidationError(where + ": 'normalized' must be a boolean");
        pre_normalized = rec["normalized"].get<bool>();
      }
      continue;
    }
    first = false;
    if (!rec.contains("author_id") || !rec["author_id"].is_string()) {
      throw ValidationError(where + ": missing string field 'author_id'");
    }
    if (!rec.contains("text_index") || !rec["text_index"].is_number_unsigned()) {
      throw ValidationError(where + ": missing non-negative integer field 'text_index'");
    }
    if (!rec.contains("vector") || !rec["vector"].is_array()) {
      throw ValidationError(where + ": missing array field 'vector'");
    }
    EmbeddingVector v;
    for (const auto& x : rec["vector"]) {
      if (!x.is_number()) throw ValidationError(where + ": vector entries must be numbers");
      const double d = x.get<double>();
      if (!std::isfinite(d)) throw ValidationError(where + ": vector entries must be finite");
      v.values.push_back(d);
    }
    if (pre_normalized) {
      v.degenerate = l2_norm(v.values) == 0.0;
    } else {
      v = normalize(std::move(v));
    }
    try {
      table.insert(rec["author_id"].get<std::string>(), rec["text_index"].get<std::size_t>(), std::move(v));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  if (table.size() == 0) throw ValidationError("embedding file contains no vectors");
  return table;
}

EmbeddingTable load_embeddings(const std::filesystem::path& path) { return parse_embeddings(read_file(path)); }

}  // namespace entailprof
