#include "qamem/mem/index.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>

#include "qamem/util/hash.hpp"
#include "qamem/util/io.hpp"
#include "qamem/util/rng.hpp"
#include "qamem/util/status.hpp"

namespace qamem::mem {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using CMap = Eigen::Map<const EMat>;

constexpr char kMagic[4] = {'Q', 'M', 'I', 'X'};
constexpr uint32_t kVersion = 1;
constexpr int kKmeansIters = 15;

}  // namespace

std::span<const double> MemoryIndex::key_row(int id) const {
  return {keys_.data() + static_cast<size_t>(id) * dim_, static_cast<size_t>(dim_)};
}

std::span<const double> MemoryIndex::value_emb_row(int id) const {
  util::require(has_value_embeddings(), "index: value embeddings not built");
  return {value_emb_.data() + static_cast<size_t>(id) * dim_, static_cast<size_t>(dim_)};
}

RetrievalResult MemoryIndex::topk_over(std::span<const double> query, int k,
                                       const std::vector<int>* subset) const {
  util::require(static_cast<int>(query.size()) == dim_, "topk: query dimension mismatch");
  int n_cand = subset ? static_cast<int>(subset->size()) : size();
  util::require(k >= 1 && k <= n_cand,
                "topk: k=" + std::to_string(k) + " exceeds candidate count " +
                    std::to_string(n_cand));

  std::vector<std::pair<double, int>> scored(n_cand);
  for (int i = 0; i < n_cand; ++i) {
    int id = subset ? (*subset)[i] : i;
    const double* row = keys_.data() + static_cast<size_t>(id) * dim_;
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += row[j] * query[j];
    scored[i] = {s, id};
  }
  auto better = [](const std::pair<double, int>& a, const std::pair<double, int>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::partial_sort(scored.begin(), scored.begin() + k, scored.end(), better);

  RetrievalResult r;
  r.entry_ids.reserve(k);
  r.scores.reserve(k);
  double mx = scored[0].first;
  double z = 0.0;
  for (int i = 0; i < k; ++i) {
    r.entry_ids.push_back(scored[i].second);
    r.scores.push_back(scored[i].first);
    z += std::exp(scored[i].first - mx);
  }
  r.alpha.resize(k);
  for (int i = 0; i < k; ++i) r.alpha[i] = std::exp(r.scores[i] - mx) / z;
  return r;
}

RetrievalResult MemoryIndex::exact_topk(std::span<const double> query, int k) const {
  return topk_over(query, k, nullptr);
}

RetrievalResult MemoryIndex::approx_topk(std::span<const double> query, int k,
                                         int n_probe) const {
  util::require(n_centroids_ > 0, "approx_topk: quantizer absent");
  util::require(n_probe >= 1 && n_probe <= n_centroids_,
                "approx_topk: n_probe out of range");
  util::require(static_cast<int>(query.size()) == dim_,
                "approx_topk: query dimension mismatch");

  std::vector<std::pair<double, int>> cscore(n_centroids_);
  for (int c = 0; c < n_centroids_; ++c) {
    const double* row = centroids_.data() + static_cast<size_t>(c) * dim_;
    double s = 0.0;
    for (int j = 0; j < dim_; ++j) s += row[j] * query[j];
    cscore[c] = {s, c};
  }
  std::partial_sort(cscore.begin(), cscore.begin() + n_probe, cscore.end(),
                    [](const auto& a, const auto& b) {
                      if (a.first != b.first) return a.first > b.first;
                      return a.second < b.second;
                    });
  std::vector<int> candidates;
  for (int p = 0; p < n_probe; ++p) {
    const auto& list = lists_[cscore[p].second];
    candidates.insert(candidates.end(), list.begin(), list.end());
  }
  std::sort(candidates.begin(), candidates.end());
  return topk_over(query, k, &candidates);
}

int MemoryIndex::default_n_probe() const {
  // Engineering default: an eighth of the lists, at least one.
  return std::max(1, (n_centroids_ + 7) / 8);
}

uint64_t MemoryIndex::key_matrix_hash() const {
  return util::fnv1a(keys_.data(), keys_.size() * sizeof(double));
}

int64_t MemoryIndex::snapshot_bytes() const {
  int64_t bytes = 4 + 4 + 8 * 3;  // magic, version, |M|, d, c
  bytes += static_cast<int64_t>(keys_.size() + centroids_.size()) * 8;
  for (const auto& l : lists_) bytes += 8 + static_cast<int64_t>(l.size()) * 8;
  return bytes;
}

std::vector<int> nearest_centroids(const std::vector<double>& points,
                                   const std::vector<double>& centroids, int dim) {
  int n = static_cast<int>(points.size()) / dim;
  int c = static_cast<int>(centroids.size()) / dim;
  std::vector<int> assign(n);
  CMap p(points.data(), n, dim);
  CMap q(centroids.data(), c, dim);
  Eigen::VectorXd cn = q.rowwise().squaredNorm();
  // ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; ||x||^2 constant per row.
  constexpr int kBlock = 4096;
  for (int r0 = 0; r0 < n; r0 += kBlock) {
    int rows = std::min(kBlock, n - r0);
    EMat d = p.middleRows(r0, rows) * q.transpose() * -2.0;
    d.rowwise() += cn.transpose();
    for (int r = 0; r < rows; ++r) {
      int best = 0;
      double bv = d(r, 0);
      for (int j = 1; j < c; ++j) {
        if (d(r, j) < bv) {
          bv = d(r, j);
          best = j;
        }
      }
      assign[r0 + r] = best;
    }
  }
  return assign;
}

void MemoryIndex::build_quantizer(uint64_t seed) {
  int n = size();
  if (n_centroids_ <= 0) {
    n_centroids_ = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  }
  n_centroids_ = std::min(n_centroids_, n);
  util::Rng rng(util::mix_seed(seed, "ivf-kmeans"));

  // Init with a random sample of distinct rows.
  std::vector<int> init = util::sample_indices(rng, n, n_centroids_);
  centroids_.assign(static_cast<size_t>(n_centroids_) * dim_, 0.0);
  for (int c = 0; c < n_centroids_; ++c) {
    std::memcpy(centroids_.data() + static_cast<size_t>(c) * dim_,
                keys_.data() + static_cast<size_t>(init[c]) * dim_,
                sizeof(double) * dim_);
  }

  std::vector<int> assign;
  for (int iter = 0; iter < kKmeansIters; ++iter) {
    assign = nearest_centroids(keys_, centroids_, dim_);
    std::vector<double> sums(static_cast<size_t>(n_centroids_) * dim_, 0.0);
    std::vector<int> counts(n_centroids_, 0);
    for (int i = 0; i < n; ++i) {
      ++counts[assign[i]];
      const double* row = keys_.data() + static_cast<size_t>(i) * dim_;
      double* s = sums.data() + static_cast<size_t>(assign[i]) * dim_;
      for (int j = 0; j < dim_; ++j) s[j] += row[j];
    }
    for (int c = 0; c < n_centroids_; ++c) {
      if (counts[c] == 0) {
        // Re-seed an empty cluster from a random row.
        int pick = static_cast<int>(util::rand_index(rng, n));
        std::memcpy(centroids_.data() + static_cast<size_t>(c) * dim_,
                    keys_.data() + static_cast<size_t>(pick) * dim_,
                    sizeof(double) * dim_);
        continue;
      }
      double inv = 1.0 / counts[c];
      double* dst = centroids_.data() + static_cast<size_t>(c) * dim_;
      const double* s = sums.data() + static_cast<size_t>(c) * dim_;
      for (int j = 0; j < dim_; ++j) dst[j] = s[j] * inv;
    }
  }
  assign = nearest_centroids(keys_, centroids_, dim_);
  lists_.assign(n_centroids_, {});
  for (int i = 0; i < n; ++i) lists_[assign[i]].push_back(i);
}

MemoryIndex build_index(std::vector<MemoryEntry> entries, const EmbedFn& key_embedder,
                        const EmbedFn& value_embedder, int n_centroids, uint64_t seed) {
  util::require(!entries.empty(), "build_index: empty entry list");
  MemoryIndex idx;
  idx.entries_ = std::move(entries);
  int n = idx.size();
  std::vector<double> first = key_embedder(idx.entries_[0].key_tokens);
  idx.dim_ = static_cast<int>(first.size());
  idx.keys_.assign(static_cast<size_t>(n) * idx.dim_, 0.0);
  std::copy(first.begin(), first.end(), idx.keys_.begin());
  for (int i = 1; i < n; ++i) {
    std::vector<double> e = key_embedder(idx.entries_[i].key_tokens);
    util::require(static_cast<int>(e.size()) == idx.dim_,
                  "build_index: inconsistent embedding dimension");
    std::copy(e.begin(), e.end(), idx.keys_.begin() + static_cast<size_t>(i) * idx.dim_);
  }
  for (double v : idx.keys_) {
    util::numeric_require(std::isfinite(v), "build_index: non-finite key embedding");
  }
  if (value_embedder) {
    idx.value_emb_.assign(static_cast<size_t>(n) * idx.dim_, 0.0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> e = value_embedder(idx.entries_[i].value_tokens);
      util::require(static_cast<int>(e.size()) == idx.dim_,
                    "build_index: inconsistent value embedding dimension");
      std::copy(e.begin(), e.end(),
                idx.value_emb_.begin() + static_cast<size_t>(i) * idx.dim_);
    }
  }
  idx.n_centroids_ = n_centroids;
  idx.build_quantizer(seed);
  return idx;
}

void MemoryIndex::save_snapshot(const std::string& path) const {
  auto os = util::open_out(path, /*binary=*/true);
  util::write_bytes(os, kMagic, 4);
  util::write_u32(os, kVersion);
  util::write_u64(os, static_cast<uint64_t>(size()));
  util::write_u64(os, static_cast<uint64_t>(dim_));
  util::write_u64(os, static_cast<uint64_t>(n_centroids_));
  util::write_bytes(os, keys_.data(), keys_.size() * sizeof(double));
  util::write_bytes(os, centroids_.data(), centroids_.size() * sizeof(double));
  for (const auto& list : lists_) {
    util::write_u64(os, list.size());
    for (int id : list) util::write_u64(os, static_cast<uint64_t>(id));
  }
}

MemoryIndex MemoryIndex::load_snapshot(const std::string& path,
                                       std::vector<MemoryEntry> entries,
                                       const EmbedFn& value_embedder) {
  auto is = util::open_in(path, /*binary=*/true);
  char magic[4];
  util::read_bytes(is, magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0) throw util::IoError("index: bad magic");
  uint32_t version = util::read_u32(is);
  if (version != kVersion) throw util::IoError("index: unsupported version");
  MemoryIndex idx;
  uint64_t n = util::read_u64(is);
  idx.dim_ = static_cast<int>(util::read_u64(is));
  idx.n_centroids_ = static_cast<int>(util::read_u64(is));
  util::require(entries.size() == n, "index: entry count mismatch with snapshot");
  idx.entries_ = std::move(entries);
  idx.keys_.resize(n * idx.dim_);
  util::read_bytes(is, idx.keys_.data(), idx.keys_.size() * sizeof(double));
  idx.centroids_.resize(static_cast<size_t>(idx.n_centroids_) * idx.dim_);
  util::read_bytes(is, idx.centroids_.data(), idx.centroids_.size() * sizeof(double));
  idx.lists_.resize(idx.n_centroids_);
  for (auto& list : idx.lists_) {
    uint64_t len = util::read_u64(is);
    list.resize(len);
    for (auto& id : list) id = static_cast<int>(util::read_u64(is));
  }
  if (value_embedder) {
    idx.value_emb_.assign(n * idx.dim_, 0.0);
    for (uint64_t i = 0; i < n; ++i) {
      std::vector<double> e = value_embedder(idx.entries_[i].value_tokens);
      std::copy(e.begin(), e.end(),
                idx.value_emb_.begin() + static_cast<size_t>(i) * idx.dim_);
    }
  }
  return idx;
}

}  // namespace qamem::mem
