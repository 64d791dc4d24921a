#include "qamem/corpus/silver.hpp"

#include <algorithm>
#include <set>

#include "qamem/text/vocab.hpp"

namespace qamem::corpus {

namespace {

const std::set<std::string>& stopwords() {
  static const std::set<std::string> words = {
      "a",    "an",   "the",  "is",  "was",  "are", "were", "in",   "of",  "to",
      "does", "do",   "did",  "what", "which", "where", "who", "when", "how", "on",
      "at",   "as",   "for",  "and", "or",   "by",  "with", "that", "this", "it"};
  return words;
}

std::set<std::string> content_tokens(const std::string& s) {
  std::set<std::string> out;
  for (const auto& w : text::normalize_words(s)) {
    if (!stopwords().count(w)) out.insert(w);
  }
  return out;
}

std::string normalize_match(const std::string& s) {
  std::string out;
  for (const auto& w : text::normalize_words(s)) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

int token_overlap(const std::string& a, const std::string& b) {
  auto ta = content_tokens(a);
  auto tb = content_tokens(b);
  int n = 0;
  for (const auto& w : ta) {
    if (tb.count(w)) ++n;
  }
  return n;
}

std::optional<SilverChain> mine_silver_chain(const std::string& two_hop_question,
                                             const std::string& answer,
                                             const std::vector<QaPair>& memory) {
  const std::set<std::string> q_tokens = content_tokens(two_hop_question);
  const std::string answer_norm = normalize_match(answer);
  if (answer_norm.empty()) return std::nullopt;

  struct Best {
    int final_overlap = -1;
    int inter_overlap = -1;
    int final_id = -1;
    int inter_id = -1;
    std::string bridge;
  } best;

  for (int f = 0; f < static_cast<int>(memory.size()); ++f) {
    if (normalize_match(memory[f].answer) != answer_norm) continue;
    int f_overlap = token_overlap(memory[f].question, two_hop_question);

    // Bridge: content tokens of the final-hop question the two-hop question
    // does not mention.
    std::string bridge;
    for (const auto& w : text::normalize_words(memory[f].question)) {
      if (stopwords().count(w) || q_tokens.count(w)) continue;
      if (!bridge.empty()) bridge += ' ';
      bridge += w;
    }
    if (bridge.empty()) continue;
    std::string bridge_norm = normalize_match(bridge);

    for (int m = 0; m < static_cast<int>(memory.size()); ++m) {
      if (m == f) continue;
      if (normalize_match(memory[m].answer) != bridge_norm) continue;
      int m_overlap = token_overlap(memory[m].question, two_hop_question);
      if (m_overlap < 1) continue;
      bool wins = std::tie(f_overlap, m_overlap) > std::tie(best.final_overlap,
                                                            best.inter_overlap);
      bool ties = f_overlap == best.final_overlap && m_overlap == best.inter_overlap;
      bool lower_ids =
          ties && std::tie(f, m) < std::tie(best.final_id, best.inter_id);
      if (wins || lower_ids) {
        best = {f_overlap, m_overlap, f, m, bridge};
      }
    }
  }
  if (best.final_id < 0) return std::nullopt;
  SilverChain chain;
  chain.question = two_hop_question;
  chain.final_id = best.final_id;
  chain.intermediate_id = best.inter_id;
  chain.final_answer = answer;
  chain.bridge = best.bridge;
  return chain;
}

}  // namespace qamem::corpus
