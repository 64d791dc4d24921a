#pragma once

#include <string>
#include <vector>

#include "qamem/text/vocab.hpp"

namespace qamem::mem {

// One QA pair in the memory. The key is the question; the value is the
// question-answer concatenation. Both carry a leading [CLS] whose encoder
// state is the entry's embedding slot.
struct MemoryEntry {
  int id = 0;
  std::string question;
  std::string answer;
  text::TokenSeq key_tokens;    // [CLS] question
  text::TokenSeq value_tokens;  // [CLS] question [SEP] answer
};

MemoryEntry make_entry(int id, const std::string& question, const std::string& answer,
                       const text::Vocab& vocab, int key_len, int value_len);

// JSONL of {id, question, answer}, one object per line.
std::vector<MemoryEntry> load_memory_jsonl(const std::string& path,
                                           const text::Vocab& vocab, int key_len,
                                           int value_len);
void save_memory_jsonl(const std::vector<MemoryEntry>& entries, const std::string& path);

}  // namespace qamem::mem
