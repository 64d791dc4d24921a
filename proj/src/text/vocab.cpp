#include "qamem/text/vocab.hpp"

#include <algorithm>
#include <cctype>
#include <map>

#include "qamem/util/io.hpp"
#include "qamem/util/status.hpp"

namespace qamem::text {

int Vocab::mask_span_id(int ordinal) {
  util::require(ordinal >= 1 && ordinal <= kMaxSpans,
                "mask ordinal out of range: " + std::to_string(ordinal));
  return kMaskSpanBase + ordinal - 1;
}

bool Vocab::is_mask_id(int id) {
  return id == kMask || (id >= kMaskSpanBase && id < kMaskSpanBase + kMaxSpans);
}

const std::vector<std::string>& Vocab::reserved_tokens() {
  static const std::vector<std::string> reserved = [] {
    std::vector<std::string> r = {"[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"};
    for (int i = 1; i <= kMaxSpans; ++i) r.push_back("[MASK_" + std::to_string(i) + "]");
    r.push_back("[EOS]");
    return r;
  }();
  return reserved;
}

void Vocab::push(const std::string& token) {
  token_to_id_.emplace(token, static_cast<int>(id_to_token_.size()));
  id_to_token_.push_back(token);
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? kUnk : it->second;
}

std::optional<int> Vocab::lookup(const std::string& token) const {
  auto it = token_to_id_.find(token);
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

const std::string& Vocab::token(int id) const {
  util::require(id >= 0 && id < size(), "token id out of range: " + std::to_string(id));
  return id_to_token_[id];
}

void Vocab::save(const std::string& path) const {
  std::string out;
  for (const auto& t : id_to_token_) {
    out += t;
    out += "\n";
  }
  util::write_file(path, out);
}

Vocab Vocab::load(const std::string& path) {
  Vocab v;
  for (const auto& line : util::read_lines(path)) v.push(line);
  const auto& reserved = reserved_tokens();
  util::require(v.size() >= kReservedCount, "vocab file too small: " + path);
  for (int i = 0; i < kReservedCount; ++i) {
    util::require(v.id_to_token_[i] == reserved[i],
                  "vocab file missing reserved prefix: " + path);
  }
  return v;
}

Vocab build_vocab(const std::vector<std::string>& corpus, int max_size) {
  util::require(max_size >= Vocab::kReservedCount,
                "vocab max_size smaller than reserved token count");
  std::map<std::string, int64_t> freq;  // ordered: lexicographic tie-break for free
  for (const auto& line : corpus) {
    for (const auto& w : normalize_words(line)) ++freq[w];
  }
  util::require(!freq.empty(), "build_vocab: empty corpus");

  std::vector<std::pair<std::string, int64_t>> by_freq(freq.begin(), freq.end());
  std::stable_sort(by_freq.begin(), by_freq.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  Vocab v;
  for (const auto& t : Vocab::reserved_tokens()) v.push(t);
  for (const auto& [word, count] : by_freq) {
    if (v.size() >= max_size) break;
    if (!v.lookup(word)) v.push(word);
  }
  return v;
}

std::vector<std::string> normalize_words(const std::string& text) {
  std::vector<std::string> words;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

int TokenSeq::effective_len() const {
  int n = max_len();
  while (n > 0 && ids[n - 1] == Vocab::kPad) --n;
  return n;
}

std::vector<int> TokenSeq::unpadded() const {
  return std::vector<int>(ids.begin(), ids.begin() + effective_len());
}

TokenSeq encode(const std::string& text, const Vocab& vocab, int max_len,
                std::optional<int> prepend) {
  util::require(max_len >= 1, "encode: max_len must be >= 1");
  TokenSeq seq;
  seq.ids.reserve(max_len);
  if (prepend) seq.ids.push_back(*prepend);
  for (const auto& w : normalize_words(text)) {
    if (static_cast<int>(seq.ids.size()) >= max_len) break;
    seq.ids.push_back(vocab.id(w));
  }
  if (static_cast<int>(seq.ids.size()) > max_len) seq.ids.resize(max_len);
  seq.ids.resize(max_len, Vocab::kPad);
  return seq;
}

std::string decode(const TokenSeq& seq, const Vocab& vocab) {
  std::string out;
  int n = seq.effective_len();
  for (int i = 0; i < n; ++i) {
    if (!out.empty()) out += ' ';
    out += vocab.token(seq.ids[i]);
  }
  return out;
}

}  // namespace qamem::text
