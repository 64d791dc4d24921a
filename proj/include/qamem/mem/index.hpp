#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "qamem/mem/entry.hpp"

namespace qamem::mem {

// Numeric retrieval output: entries sorted by descending raw inner-product
// score (ties broken by ascending id), alpha the softmax over those scores.
struct RetrievalResult {
  std::vector<int> entry_ids;
  std::vector<double> scores;
  std::vector<double> alpha;
};

// Maps a token sequence to its d-dimensional embedding (encoder state at the
// leading [CLS]); supplied by the model layer so the index stays numeric.
using EmbedFn = std::function<std::vector<double>(const text::TokenSeq&)>;

// Frozen key matrix plus an IVF coarse quantizer (k-means centroids with
// inverted lists) for approximate search. Immutable after build.
class MemoryIndex {
 public:
  int size() const { return static_cast<int>(entries_.size()); }
  int dim() const { return dim_; }
  int n_centroids() const { return n_centroids_; }
  const std::vector<MemoryEntry>& entries() const { return entries_; }
  const MemoryEntry& entry(int id) const { return entries_[id]; }
  std::span<const double> key_row(int id) const;
  std::span<const double> value_emb_row(int id) const;
  const std::vector<double>& key_matrix() const { return keys_; }
  const std::vector<double>& centroid_matrix() const { return centroids_; }
  const std::vector<std::vector<int>>& inverted_lists() const { return lists_; }
  bool has_value_embeddings() const { return !value_emb_.empty(); }

  RetrievalResult exact_topk(std::span<const double> query, int k) const;
  // Scans the n_probe inverted lists whose centroids score highest against
  // the query; same contract as exact_topk restricted to scanned entries.
  RetrievalResult approx_topk(std::span<const double> query, int k, int n_probe) const;
  int default_n_probe() const;

  uint64_t key_matrix_hash() const;
  int64_t snapshot_bytes() const;

  // Binary snapshot: header (|M|, d, c), raw key matrix, centroid matrix,
  // inverted lists. Value embeddings are recomputed on load when a value
  // embedder is supplied.
  void save_snapshot(const std::string& path) const;
  static MemoryIndex load_snapshot(const std::string& path,
                                   std::vector<MemoryEntry> entries,
                                   const EmbedFn& value_embedder = nullptr);

  friend MemoryIndex build_index(std::vector<MemoryEntry> entries,
                                 const EmbedFn& key_embedder,
                                 const EmbedFn& value_embedder, int n_centroids,
                                 uint64_t seed);

 private:
  std::vector<MemoryEntry> entries_;
  int dim_ = 0;
  std::vector<double> keys_;       // |M| x d
  std::vector<double> value_emb_;  // |M| x d, optional
  int n_centroids_ = 0;
  std::vector<double> centroids_;  // c x d
  std::vector<std::vector<int>> lists_;

  RetrievalResult topk_over(std::span<const double> query, int k,
                            const std::vector<int>* subset) const;
  void build_quantizer(uint64_t seed);
};

// Embeds every key with the (frozen) key embedder, assembles the key matrix,
// and clusters it into n_centroids inverted lists (0 selects ceil(sqrt(|M|))).
// Deterministic given the seed.
MemoryIndex build_index(std::vector<MemoryEntry> entries, const EmbedFn& key_embedder,
                        const EmbedFn& value_embedder = nullptr, int n_centroids = 0,
                        uint64_t seed = 0);

// Exact k-means assignment helper, exposed for tests.
std::vector<int> nearest_centroids(const std::vector<double>& points,
                                   const std::vector<double>& centroids, int dim);

}  // namespace qamem::mem
