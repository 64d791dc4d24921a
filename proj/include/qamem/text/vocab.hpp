#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace qamem::text {

// Word-level vocabulary. Reserved ids occupy a fixed contiguous prefix:
//   0 [PAD], 1 [UNK], 2 [CLS], 3 [SEP], 4 [MASK], 5..12 [MASK_1]..[MASK_8],
//   13 [EOS].
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;
  static constexpr int kCls = 2;
  static constexpr int kSep = 3;
  static constexpr int kMask = 4;
  static constexpr int kMaskSpanBase = 5;  // [MASK_1]
  static constexpr int kMaxSpans = 8;
  static constexpr int kEos = 13;
  static constexpr int kReservedCount = 14;

  static int mask_span_id(int ordinal);  // 1-based
  // True for [MASK] and [MASK_1]..[MASK_8].
  static bool is_mask_id(int id);
  static const std::vector<std::string>& reserved_tokens();

  int size() const { return static_cast<int>(id_to_token_.size()); }
  int id(const std::string& token) const;  // kUnk when absent
  std::optional<int> lookup(const std::string& token) const;
  const std::string& token(int id) const;

  // One token per line, line number == id.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path);

  friend Vocab build_vocab(const std::vector<std::string>& corpus, int max_size);

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;
  void push(const std::string& token);
};

// Reserved tokens first, then corpus words by descending frequency, ties
// lexicographic. The corpus must contain at least one word.
Vocab build_vocab(const std::vector<std::string>& corpus, int max_size);

// Lowercases, strips punctuation, splits on whitespace.
std::vector<std::string> normalize_words(const std::string& text);

// Fixed-length token-id sequence with right padding. The unpadded prefix is
// the payload; pads never precede non-pads.
struct TokenSeq {
  std::vector<int> ids;

  int max_len() const { return static_cast<int>(ids.size()); }
  int effective_len() const;
  bool empty() const { return effective_len() == 0; }
  std::vector<int> unpadded() const;
  bool operator==(const TokenSeq&) const = default;
};

// Normalizes, maps unknown words to [UNK], right-truncates to max_len, then
// right-pads. `prepend` (e.g. [CLS] or [MASK]) occupies position 0.
TokenSeq encode(const std::string& text, const Vocab& vocab, int max_len,
                std::optional<int> prepend = std::nullopt);

// Space-joined tokens of the unpadded prefix; reserved tokens render as
// their bracketed names.
std::string decode(const TokenSeq& seq, const Vocab& vocab);

}  // namespace qamem::text
