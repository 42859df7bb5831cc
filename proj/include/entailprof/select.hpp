#ifndef ENTAILPROF_SELECT_HPP_
#define ENTAILPROF_SELECT_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "entailprof/corpus.hpp"
#include "entailprof/embed.hpp"

namespace entailprof {

enum class SelectionMethod { kRandom, kCluster };

struct SelectionConfig {
  SelectionMethod method = SelectionMethod::kRandom;
  std::size_t k = 1;        // random: texts per author
  double threshold = 1.5;   // cluster: stop merging above this average cosine distance
};

/// Short name used in reports: "Ra<k>" or "IS".
std::string selection_name(const SelectionConfig& cfg);

struct ClusterResult {
  std::vector<std::vector<std::size_t>> clusters;  // member indices, ascending
  std::vector<EmbeddingVector> centroids;          // plain means of the members
  std::vector<std::size_t> representatives;        // member closest to each centroid
};

/// Cosine distance 1 - cos(u, v); zero vectors are at distance 1 from
/// everything.
double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v);

/// min(k, |texts|) distinct text indices, uniform without replacement,
/// seeded by (seed, author id). Returned ascending.
std::vector<std::size_t> select_random(const Author& author, std::size_t k, std::uint64_t seed);

/// Bottom-up average-linkage clustering under cosine distance.
///
/// Starting from singletons, repeatedly merges the pair of clusters with
/// the smallest mean pairwise distance, as long as that distance does not
/// exceed `threshold`. Clusters are identified by their smallest member
/// index; ties between candidate pairs go to the lexicographically smallest
/// (id, id) pair. Clusters are returned ordered by id.
ClusterResult agglomerative_clusters(std::span<const EmbeddingVector> vectors, double threshold);

/// Texts of `author` to train on. Random selection draws `cfg.k` texts;
/// cluster selection returns the cluster representatives of the author's
/// text embeddings. Output is ascending.
std::vector<std::size_t> select_instances(const Author& author, const Embedder& embedder,
                                          const SelectionConfig& cfg, std::uint64_t seed);

/// Like select_instances, also reporting the number of clusters (for random
/// selection this is the number of selected texts).
struct Selection {
  std::vector<std::size_t> indices;
  std::size_t n_clusters = 0;
};
Selection select_with_stats(const Author& author, const Embedder& embedder, const SelectionConfig& cfg,
                            std::uint64_t seed);

}  // namespace entailprof

#endif  // ENTAILPROF_SELECT_HPP_
