#include "qamem/mem/bm25.hpp"

#include <algorithm>
#include <cmath>

#include "qamem/text/vocab.hpp"
#include "qamem/util/status.hpp"

namespace qamem::mem {

Bm25Index Bm25Index::build(const std::vector<std::string>& docs, double k1, double b) {
  util::require(!docs.empty(), "bm25: no documents");
  Bm25Index idx;
  idx.k1_ = k1;
  idx.b_ = b;
  idx.doc_len_.resize(docs.size());
  int64_t total_len = 0;
  for (size_t d = 0; d < docs.size(); ++d) {
    auto words = text::normalize_words(docs[d]);
    idx.doc_len_[d] = static_cast<int>(words.size());
    total_len += static_cast<int64_t>(words.size());
    std::unordered_map<std::string, int> tf;
    for (const auto& w : words) ++tf[w];
    for (const auto& [term, count] : tf) {
      idx.postings_[term].push_back({static_cast<int>(d), count});
    }
  }
  for (auto& [term, plist] : idx.postings_) {
    std::sort(plist.begin(), plist.end(),
              [](const Posting& a, const Posting& b) { return a.doc < b.doc; });
  }
  idx.avg_len_ = static_cast<double>(total_len) / static_cast<double>(docs.size());
  return idx;
}

std::vector<double> Bm25Index::score_all(const std::vector<std::string>& query_terms) const {
  std::vector<double> scores(doc_count(), 0.0);
  double n = static_cast<double>(doc_count());
  for (const auto& term : query_terms) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    double df = static_cast<double>(it->second.size());
    double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
    for (const Posting& p : it->second) {
      double tf = static_cast<double>(p.tf);
      double norm = k1_ * (1.0 - b_ + b_ * doc_len_[p.doc] / avg_len_);
      scores[p.doc] += idf * tf * (k1_ + 1.0) / (tf + norm);
    }
  }
  return scores;
}

double Bm25Index::score(const std::vector<std::string>& query_terms, int doc) const {
  util::require(doc >= 0 && doc < doc_count(), "bm25: doc id out of range");
  return score_all(query_terms)[doc];
}

std::vector<int> Bm25Index::topk(const std::string& query, int k,
                                 const std::set<int>& exclude) const {
  util::require(k >= 1, "bm25 topk: k must be >= 1");
  util::require(doc_count() - static_cast<int>(exclude.size()) >= k,
                "bm25 topk: fewer than k non-excluded documents");
  std::vector<double> scores = score_all(text::normalize_words(query));
  std::vector<int> order;
  order.reserve(scores.size());
  for (int d = 0; d < doc_count(); ++d) {
    if (!exclude.count(d)) order.push_back(d);
  }
  std::partial_sort(order.begin(), order.begin() + k, order.end(), [&](int a, int b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(k);
  return order;
}

std::vector<int> mine_hard_negatives(const std::string& passage,
                                     const std::vector<int>& positive_ids,
                                     const Bm25Index& bm25, int k) {
  std::set<int> exclude(positive_ids.begin(), positive_ids.end());
  return bm25.topk(passage, k, exclude);
}

}  // namespace qamem::mem
