#pragma once

#include <string>
#include <vector>

#include "qamem/text/vocab.hpp"
#include "qamem/util/rng.hpp"

namespace qamem::text {

struct SpanRef {
  int mask_ordinal = 0;  // 1-based, increases left to right in the input
  int start = 0;         // word offset in the original passage
  int len = 0;
  std::string answer;
};

struct CorruptedExample {
  TokenSeq input;   // [CLS] + passage with each chosen span replaced by [MASK_i]
  TokenSeq target;  // [MASK_1] A^1 ... [MASK_k] A^k
  std::vector<SpanRef> span_map;
};

// Replaces k answer spans of the passage with [MASK_1..k] and emits the
// mask-delimited answers as the target. Each answer must occur as a
// contiguous word span (its first occurrence is the candidate). Candidate
// overlap is resolved greedily left to right into a maximal non-overlapping
// set, from which k spans are sampled uniformly without replacement; it is
// an error if that set has fewer than k spans.
CorruptedExample corrupt_spans(const std::string& passage,
                               const std::vector<std::string>& answers, int k,
                               util::Rng& rng, const Vocab& vocab, int max_input_len,
                               int max_target_len);

}  // namespace qamem::text
