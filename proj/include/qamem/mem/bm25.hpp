#pragma once

#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace qamem::mem {

// Okapi BM25 over word-tokenized documents, immutable after build.
// IDF uses the smoothed non-negative form ln(1 + (N - df + 0.5)/(df + 0.5)).
class Bm25Index {
 public:
  static Bm25Index build(const std::vector<std::string>& docs, double k1 = 1.2,
                         double b = 0.75);

  int doc_count() const { return static_cast<int>(doc_len_.size()); }
  double score(const std::vector<std::string>& query_terms, int doc) const;
  std::vector<double> score_all(const std::vector<std::string>& query_terms) const;

  // Top-k doc ids by (score desc, id asc), skipping `exclude`. Zero-score
  // documents still qualify. Requires k non-excluded documents.
  std::vector<int> topk(const std::string& query, int k,
                        const std::set<int>& exclude = {}) const;

  double k1() const { return k1_; }
  double b() const { return b_; }

 private:
  struct Posting {
    int doc;
    int tf;
  };
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::vector<int> doc_len_;
  double avg_len_ = 0.0;
  double k1_ = 1.2;
  double b_ = 0.75;
};

// Hard negatives for a pre-training example: queries the BM25 index built
// over memory questions with the passage text and returns the top-K entries
// excluding the example's own positives.
std::vector<int> mine_hard_negatives(const std::string& passage,
                                     const std::vector<int>& positive_ids,
                                     const Bm25Index& bm25, int k);

}  // namespace qamem::mem
