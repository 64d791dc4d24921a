#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qamem/corpus/generate.hpp"

namespace qamem::corpus {

// A mined first-hop supervision signal for a two-hop question.
struct SilverChain {
  std::string question;     // the two-hop question
  int final_id = -1;        // memory entry answering the final hop
  int intermediate_id = -1; // memory entry m_1 for the first hop
  std::string final_answer;
  std::string bridge;       // mined bridge entity string
};

// Count of shared non-stopword tokens between two strings.
int token_overlap(const std::string& a, const std::string& b);

// Two-step lexical mining over the QA memory:
//   1. final-hop candidates: entries whose answer matches the two-hop
//      answer; scored by question overlap with the two-hop question.
//   2. the candidate's bridge is its question's content tokens absent from
//      the two-hop question; the intermediate is the entry whose answer
//      matches the bridge and whose question overlaps the two-hop question.
// Candidate pairs are ranked by (final overlap, intermediate overlap) with
// lower ids breaking ties; nullopt when either step has no candidate.
std::optional<SilverChain> mine_silver_chain(const std::string& two_hop_question,
                                             const std::string& answer,
                                             const std::vector<QaPair>& memory);

}  // namespace qamem::corpus
