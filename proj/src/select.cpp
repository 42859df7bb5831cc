#include "entailprof/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "entailprof/common.hpp"
#include "entailprof/matrix.hpp"

namespace entailprof {

std::string selection_name(const SelectionConfig& cfg) {
  return cfg.method == SelectionMethod::kCluster ? "IS" : "Ra" + std::to_string(cfg.k);
}

double cosine_distance(const EmbeddingVector& u, const EmbeddingVector& v) {
  const double nu = l2_norm(u.values);
  const double nv = l2_norm(v.values);
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 1.0 - similarity(u, v) / (nu * nv);
}

std::vector<std::size_t> select_random(const Author& author, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw ValidationError("random selection needs k >= 1");
  std::vector<std::size_t> idx(author.texts.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t take = std::min(k, idx.size());
  Rng rng(derive_seed(seed, "select/" + author.id));
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(idx.size() - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(take);
  std::sort(idx.begin(), idx.end());
  return idx;
}

ClusterResult agglomerative_clusters(std::span<const EmbeddingVector> vectors, double threshold) {
  const std::size_t n = vectors.size();
  if (n == 0) throw ValidationError("clustering needs at least one vector");
  if (!(threshold > 0.0)) throw ValidationError("clustering threshold must be positive");
  for (const auto& v : vectors) {
    if (v.dim() != vectors[0].dim()) throw ValidationError("clustering: dimension mismatch");
  }

  // dist_sum(a, b): sum of pairwise distances between members of clusters a
  // and b, where a cluster is named by its smallest member index.
  Matrix dist_sum(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      dist_sum(i, j) = dist_sum(j, i) = cosine_distance(vectors[i], vectors[j]);
    }
  }
  std::vector<std::size_t> size(n, 1);
  std::vector<bool> active(n, true);
  std::vector<std::vector<std::size_t>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {i};

  for (std::size_t remaining = n; remaining > 1; --remaining) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_a = n, best_b = n;
    for (std::size_t a = 0; a < n; ++a) {
      if (!active[a]) continue;
      for (std::size_t b = a + 1; b < n; ++b) {
        if (!active[b]) continue;
        const double avg = dist_sum(a, b) / static_cast<double>(size[a] * size[b]);
        if (avg < best) {
          best = avg;
          best_a = a;
          best_b = b;
        }
      }
    }
    if (best > threshold) break;
    for (std::size_t k = 0; k < n; ++k) {
      if (!active[k] || k == best_a || k == best_b) continue;
      dist_sum(best_a, k) = dist_sum(k, best_a) = dist_sum(best_a, k) + dist_sum(best_b, k);
    }
    size[best_a] += size[best_b];
    active[best_b] = false;
    members[best_a].insert(members[best_a].end(), members[best_b].begin(), members[best_b].end());
    std::sort(members[best_a].begin(), members[best_a].end());
    members[best_b].clear();
  }

  ClusterResult out;
  const std::size_t dim = vectors[0].dim();
  for (std::size_t a = 0; a < n; ++a) {
    if (!active[a]) continue;
    EmbeddingVector centroid;
    centroid.values.assign(dim, 0.0);
    for (std::size_t m : members[a]) {
      for (std::size_t d = 0; d < dim; ++d) centroid.values[d] += vectors[m].values[d];
    }
    for (double& x : centroid.values) x /= static_cast<double>(members[a].size());
    centroid.degenerate = l2_norm(centroid.values) == 0.0;

    std::size_t rep = members[a].front();
    double rep_dist = std::numeric_limits<double>::infinity();
    for (std::size_t m : members[a]) {
      const double d = cosine_distance(vectors[m], centroid);
      if (d < rep_dist) {
        rep_dist = d;
        rep = m;
      }
    }
    out.clusters.push_back(members[a]);
    out.centroids.push_back(std::move(centroid));
    out.representatives.push_back(rep);
  }
  return out;
}

Selection select_with_stats(const Author& author, const Embedder& embedder, const SelectionConfig& cfg,
                            std::uint64_t seed) {
  Selection sel;
  if (cfg.method == SelectionMethod::kRandom) {
    sel.indices = select_random(author, cfg.k, seed);
    sel.n_clusters = sel.indices.size();
    return sel;
  }
  std::vector<EmbeddingVector> vectors;
  vectors.reserve(author.texts.size());
  for (std::size_t t = 0; t < author.texts.size(); ++t) {
    vectors.push_back(embedder.embed_text(author.id, t, author.texts[t]));
  }
  auto clusters = agglomerative_clusters(vectors, cfg.threshold);
  sel.indices = std::move(clusters.representatives);
  std::sort(sel.indices.begin(), sel.indices.end());
  sel.n_clusters = clusters.clusters.size();
  return sel;
}

std::vector<std::size_t> select_instances(const Author& author, const Embedder& embedder,
                                          const SelectionConfig& cfg, std::uint64_t seed) {
  return select_with_stats(author, embedder, cfg, seed).indices;
}

}  // namespace entailprof
