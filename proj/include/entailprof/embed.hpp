#ifndef ENTAILPROF_EMBED_HPP_
#define ENTAILPROF_EMBED_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace entailprof {

/// Dense embedding. A vector that had nothing to normalize (all zeros) is
/// kept as zeros and flagged degenerate.
struct EmbeddingVector {
  std::vector<double> values;
  bool degenerate = false;

  std::size_t dim() const { return values.size(); }
};

/// Scales `v` to unit L2 norm. Vectors already within 1e-12 of unit norm
/// are returned unchanged, so normalizing twice is exactly normalizing once.
EmbeddingVector normalize(EmbeddingVector v);

double l2_norm(std::span<const double> v);

/// Dot product. For unit vectors this is the cosine similarity.
double similarity(const EmbeddingVector& u, const EmbeddingVector& v);

/// Author id under which hypothesis vectors are stored in embedding files.
inline constexpr std::string_view kHypothesisAuthor = "__hypothesis__";

/// Text-to-vector map used by selection, training and scoring. Texts are
/// addressed both by content and by (author id, text index), so that
/// precomputed tables can stand in for a content-based encoder.
class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dim() const = 0;
  virtual EmbeddingVector embed_text(const std::string& author_id, std::size_t text_index,
                                     std::string_view text) const = 0;
  virtual EmbeddingVector embed_hypothesis(std::size_t label_index, std::string_view text) const = 0;
};

struct EncoderConfig {
  int n_min = 1;
  int n_max = 5;
  std::size_t hash_dim = 4096;
  bool lowercase = true;
};

/// Seed mixed into every n-gram hash. Changing it changes every feature index.
inline constexpr std::uint64_t kNgramHashSeed = 0x5eed0f7e47a11c3dULL;

struct HashedFeature {
  std::size_t index;
  double sign;
};

/// Feature bucket and sign of one n-gram (its UTF-8 bytes):
/// h = mix64(fnv1a64(gram) ^ kNgramHashSeed), index = h mod hash_dim,
/// sign = -1 if the top bit of h is set, else +1.
HashedFeature hash_ngram(std::string_view gram, std::size_t hash_dim);

/// Character n-grams of `text` for n in [n_min, n_max], over UTF-8 code
/// points (ASCII-lowercased when requested), in order of (n, position).
std::vector<std::string> char_ngrams(std::string_view text, const EncoderConfig& cfg);

/// Hashed character n-gram TF-IDF encoder with signed hashing and smoothed
/// idf: idf[j] = ln((1 + N) / (1 + df[j])) + 1.
class HashedTfidfEncoder : public Embedder {
 public:
  HashedTfidfEncoder(EncoderConfig cfg, std::vector<double> idf, std::size_t doc_count);

  /// Counts document frequencies over `texts`. Throws on an empty corpus or
  /// an invalid configuration (hash_dim not a power of two, bad n range).
  static HashedTfidfEncoder fit(std::span<const std::string> texts, const EncoderConfig& cfg);

  /// Signed tf per bucket, times idf, L2-normalized.
  EmbeddingVector embed(std::string_view text) const;

  std::size_t dim() const override { return cfg_.hash_dim; }
  EmbeddingVector embed_text(const std::string&, std::size_t, std::string_view text) const override {
    return embed(text);
  }
  EmbeddingVector embed_hypothesis(std::size_t, std::string_view text) const override { return embed(text); }

  const EncoderConfig& config() const { return cfg_; }
  const std::vector<double>& idf() const { return idf_; }
  std::size_t doc_count() const { return doc_count_; }

 private:
  EncoderConfig cfg_;
  std::vector<double> idf_;
  std::size_t doc_count_;
};

/// Externally computed embeddings keyed by (author_id, text_index).
/// Hypotheses live under kHypothesisAuthor with text_index = label position.
class EmbeddingTable : public Embedder {
 public:
  using Key = std::pair<std::string, std::size_t>;

  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim) : dim_(dim) {}

  /// Adds a vector; throws ValidationError on a duplicate key or a
  /// dimension mismatch.
  void insert(const std::string& author_id, std::size_t text_index, EmbeddingVector v);

  /// Throws ValidationError for absent keys.
  const EmbeddingVector& at(const std::string& author_id, std::size_t text_index) const;
  bool contains(const std::string& author_id, std::size_t text_index) const;
  std::size_t size() const { return vectors_.size(); }

  std::size_t dim() const override { return dim_; }
  EmbeddingVector embed_text(const std::string& author_id, std::size_t text_index,
                             std::string_view) const override {
    return at(author_id, text_index);
  }
  EmbeddingVector embed_hypothesis(std::size_t label_index, std::string_view) const override {
    return at(std::string(kHypothesisAuthor), label_index);
  }

 private:
  std::size_t dim_ = 0;
  std::map<Key, EmbeddingVector> vectors_;
};

/// Parses embedding JSONL: optional `{"dim": D, "normalized": bool}` header,
/// then `{"author_id", "text_index", "vector"}` records. Vectors are
/// L2-normalized unless the header declares them pre-normalized.
EmbeddingTable parse_embeddings(const std::string& jsonl);
EmbeddingTable load_embeddings(const std::filesystem::path& path);

}  // namespace entailprof

#endif  // ENTAILPROF_EMBED_HPP_
