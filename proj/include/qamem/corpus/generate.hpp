#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qamem/corpus/world.hpp"

namespace qamem::corpus {

struct Passage {
  int id = 0;
  std::string text;
  std::vector<int> fact_ids;
};

struct AnswerSpan {
  int fact_id = 0;
  int char_start = 0;
  int char_len = 0;
  std::string answer;
};

struct QaPair {
  std::string question;
  std::string answer;
};

struct PretrainExample {
  int passage_id = 0;
  std::string passage;
  std::vector<QaPair> qa_pairs;
  std::vector<int> fact_ids;  // provenance
};

struct TwoHopExample {
  std::string question;
  std::string answer;
  std::string bridge;  // ground truth, for evaluation only
  std::string subject;
  std::string first_relation;
  std::string second_relation;
};

// Groups facts by subject and chunks them into passages of at most
// facts_per_passage statements; every fact lands in exactly one passage.
std::vector<Passage> render_passages(const WorldModel& world, int facts_per_passage);

// Object/literal spans of every world fact whose statement is rendered in
// the passage, with character offsets. Unknown passages yield an empty list.
std::vector<AnswerSpan> extract_answers(const std::string& passage,
                                        const WorldModel& world);

// Instantiates the canonical question template for the fact behind the span.
// The span must come from extract_answers on this passage.
std::string generate_question(const std::string& passage, const AnswerSpan& span,
                              const WorldModel& world);

// Rule-based reading-comprehension filter: parses the question against the
// relation templates, reads the object off the passage, and keeps the pair
// iff it matches the stored answer (case-insensitive, article-stripped).
bool filter_question(const QaPair& qa, const std::string& passage,
                     const WorldModel& world);

// Full pipeline: render -> extract -> generate -> filter.
std::vector<PretrainExample> build_pretrain_corpus(const WorldModel& world,
                                                   int facts_per_passage);

// All QA pairs of a corpus in passage order, deduplicated by exact
// (question, answer) string match; the memory source.
std::vector<QaPair> collect_memory_qas(const std::vector<PretrainExample>& corpus);

// One paraphrase-form QA per fact, split into train/heldout by a seeded hash
// of the fact id.
struct QaSplit {
  std::vector<QaPair> train;
  std::vector<QaPair> heldout;
};
QaSplit build_qa_split(const WorldModel& world, double heldout_frac, uint64_t seed);

// Two-hop questions for every composable relation pair (r1.object_type ==
// r2.subject_type), e.g. "what country is the city where X was born located
// in". Bridge is the intermediate entity.
std::vector<TwoHopExample> build_twohop(const WorldModel& world);
std::vector<TwoHopExample> build_twohop_split(const WorldModel& world,
                                              double heldout_frac, uint64_t seed,
                                              bool heldout);

// JSONL helpers for the emitted datasets.
void save_pretrain_jsonl(const std::vector<PretrainExample>& corpus,
                         const std::string& path);
std::vector<PretrainExample> load_pretrain_jsonl(const std::string& path);
void save_qa_jsonl(const std::vector<QaPair>& items, const std::string& path);
std::vector<QaPair> load_qa_jsonl(const std::string& path);
void save_twohop_jsonl(const std::vector<TwoHopExample>& items, const std::string& path);
std::vector<TwoHopExample> load_twohop_jsonl(const std::string& path);

}  // namespace qamem::corpus
