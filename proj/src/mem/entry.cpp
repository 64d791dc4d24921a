#include "qamem/mem/entry.hpp"

#include <nlohmann/json.hpp>

#include "qamem/util/io.hpp"
#include "qamem/util/status.hpp"

namespace qamem::mem {

using json = nlohmann::json;

MemoryEntry make_entry(int id, const std::string& question, const std::string& answer,
                       const text::Vocab& vocab, int key_len, int value_len) {
  util::require(!question.empty() && !answer.empty(),
                "memory entry needs non-empty question and answer");
  MemoryEntry e;
  e.id = id;
  e.question = question;
  e.answer = answer;
  e.key_tokens = text::encode(question, vocab, key_len, text::Vocab::kCls);

  // Value layout: [CLS] question [SEP] answer, right-truncating the question
  // if needed but never the answer.
  std::vector<int> ids{text::Vocab::kCls};
  std::vector<int> q_ids, a_ids;
  for (const auto& w : text::normalize_words(question)) q_ids.push_back(vocab.id(w));
  for (const auto& w : text::normalize_words(answer)) a_ids.push_back(vocab.id(w));
  int q_budget = value_len - 2 - static_cast<int>(a_ids.size());
  util::require(q_budget >= 0, "memory value length too small for answer: " + answer);
  if (static_cast<int>(q_ids.size()) > q_budget) q_ids.resize(q_budget);
  ids.insert(ids.end(), q_ids.begin(), q_ids.end());
  ids.push_back(text::Vocab::kSep);
  ids.insert(ids.end(), a_ids.begin(), a_ids.end());
  ids.resize(value_len, text::Vocab::kPad);
  e.value_tokens.ids = std::move(ids);
  return e;
}

std::vector<MemoryEntry> load_memory_jsonl(const std::string& path,
                                           const text::Vocab& vocab, int key_len,
                                           int value_len) {
  std::vector<MemoryEntry> entries;
  for (const auto& line : util::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    entries.push_back(make_entry(j.at("id").get<int>(), j.at("question").get<std::string>(),
                                 j.at("answer").get<std::string>(), vocab, key_len,
                                 value_len));
  }
  util::require(!entries.empty(), "memory file is empty: " + path);
  for (size_t i = 0; i < entries.size(); ++i) {
    util::require(entries[i].id == static_cast<int>(i),
                  "memory file ids must be 0..n-1 in order: " + path);
  }
  return entries;
}

void save_memory_jsonl(const std::vector<MemoryEntry>& entries, const std::string& path) {
  auto os = util::open_out(path);
  for (const auto& e : entries) {
    json j{{"id", e.id}, {"question", e.question}, {"answer", e.answer}};
    os << j.dump() << "\n";
  }
}

}  // namespace qamem::mem
