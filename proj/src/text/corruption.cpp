#include "qamem/text/corruption.hpp"

#include <algorithm>

#include "qamem/util/status.hpp"

namespace qamem::text {

namespace {

// First occurrence of `needle` as a contiguous word span, or -1.
int find_span(const std::vector<std::string>& words,
              const std::vector<std::string>& needle) {
  if (needle.empty() || needle.size() > words.size()) return -1;
  for (size_t i = 0; i + needle.size() <= words.size(); ++i) {
    bool hit = true;
    for (size_t j = 0; j < needle.size(); ++j) {
      if (words[i + j] != needle[j]) {
        hit = false;
        break;
      }
    }
    if (hit) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

CorruptedExample corrupt_spans(const std::string& passage,
                               const std::vector<std::string>& answers, int k,
                               util::Rng& rng, const Vocab& vocab, int max_input_len,
                               int max_target_len) {
  util::require(k >= 1 && k <= Vocab::kMaxSpans,
                "corrupt_spans: k must be in [1, " + std::to_string(Vocab::kMaxSpans) + "]");
  util::require(k <= static_cast<int>(answers.size()),
                "corrupt_spans: k exceeds the number of answer spans");
  std::vector<std::string> words = normalize_words(passage);
  util::require(!words.empty(), "corrupt_spans: empty passage");

  struct Cand {
    int start, len;
    std::string answer;
  };
  std::vector<Cand> cands;
  for (const auto& a : answers) {
    std::vector<std::string> aw = normalize_words(a);
    int pos = find_span(words, aw);
    util::require(pos >= 0, "corrupt_spans: answer not a contiguous span: " + a);
    cands.push_back({pos, static_cast<int>(aw.size()), a});
  }
  std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.start != b.start ? a.start < b.start : a.len < b.len;
  });

  // Greedy left-to-right maximal non-overlapping set.
  std::vector<Cand> pool;
  int last_end = -1;
  for (const auto& c : cands) {
    if (c.start > last_end) {
      pool.push_back(c);
      last_end = c.start + c.len - 1;
    }
  }
  util::require(static_cast<int>(pool.size()) >= k,
                "corrupt_spans: no non-overlapping selection of size " + std::to_string(k));

  std::vector<int> picked = util::sample_indices(rng, static_cast<int>(pool.size()), k);
  std::sort(picked.begin(), picked.end());

  CorruptedExample ex;
  std::vector<int> input_ids{Vocab::kCls};
  std::vector<int> target_ids;
  int cursor = 0;
  for (int ord = 1; ord <= k; ++ord) {
    const Cand& c = pool[picked[ord - 1]];
    for (; cursor < c.start; ++cursor) input_ids.push_back(vocab.id(words[cursor]));
    input_ids.push_back(Vocab::mask_span_id(ord));
    target_ids.push_back(Vocab::mask_span_id(ord));
    for (int j = 0; j < c.len; ++j) target_ids.push_back(vocab.id(words[c.start + j]));
    cursor = c.start + c.len;
    ex.span_map.push_back({ord, c.start, c.len, c.answer});
  }
  for (; cursor < static_cast<int>(words.size()); ++cursor) {
    input_ids.push_back(vocab.id(words[cursor]));
  }

  util::require(static_cast<int>(input_ids.size()) <= max_input_len,
                "corrupt_spans: corrupted input exceeds max length");
  util::require(static_cast<int>(target_ids.size()) <= max_target_len,
                "corrupt_spans: target exceeds max length");
  input_ids.resize(max_input_len, Vocab::kPad);
  target_ids.resize(max_target_len, Vocab::kPad);
  ex.input.ids = std::move(input_ids);
  ex.target.ids = std::move(target_ids);
  return ex;
}

}  // namespace qamem::text
