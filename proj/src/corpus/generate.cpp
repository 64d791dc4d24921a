#include "qamem/corpus/generate.hpp"

#include <algorithm>
#include <map>
#include <nlohmann/json.hpp>
#include <set>

#include "qamem/text/vocab.hpp"
#include "qamem/util/io.hpp"
#include "qamem/util/rng.hpp"
#include "qamem/util/status.hpp"

namespace qamem::corpus {

using json = nlohmann::json;

namespace {

// Statement text plus the character offset of the object within it.
std::pair<std::string, int> render_statement(const Relation& r, const Fact& f) {
  std::string tmpl = r.statement_tmpl;
  size_t s_pos = tmpl.find("{s}");
  util::require(s_pos != std::string::npos, "statement template missing {s}");
  tmpl.replace(s_pos, 3, f.subject);
  size_t o_pos = tmpl.find("{o}");
  util::require(o_pos != std::string::npos, "statement template missing {o}");
  tmpl.replace(o_pos, 3, f.object);
  return {tmpl, static_cast<int>(o_pos)};
}

std::string strip_articles_lower(const std::string& s) {
  auto words = text::normalize_words(s);
  std::string out;
  for (const auto& w : words) {
    if (w == "a" || w == "an" || w == "the") continue;
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

// Splits a template around a slot; empty second when the slot is absent.
std::pair<std::string, std::string> split_at(const std::string& tmpl,
                                             const std::string& slot) {
  size_t pos = tmpl.find(slot);
  if (pos == std::string::npos) return {tmpl, ""};
  return {tmpl.substr(0, pos), tmpl.substr(pos + slot.size())};
}

}  // namespace

std::vector<Passage> render_passages(const WorldModel& world, int facts_per_passage) {
  util::require(facts_per_passage >= 1, "render_passages: facts_per_passage must be >= 1");
  util::require(!world.facts.empty(), "render_passages: empty world");

  // Group facts by subject (stable within subject), then chunk.
  std::vector<int> order(world.facts.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return world.facts[a].subject < world.facts[b].subject;
  });

  std::vector<Passage> passages;
  for (size_t i = 0; i < order.size(); i += facts_per_passage) {
    Passage p;
    p.id = static_cast<int>(passages.size());
    for (size_t j = i; j < std::min(order.size(), i + facts_per_passage); ++j) {
      const Fact& f = world.facts[order[j]];
      const Relation* r = world.relation(f.relation);
      util::require(r != nullptr, "render_passages: unknown relation " + f.relation);
      auto [stmt, o_pos] = render_statement(*r, f);
      if (!p.text.empty()) p.text += ' ';
      p.text += stmt;
      p.text += '.';
      p.fact_ids.push_back(f.id);
    }
    passages.push_back(std::move(p));
  }
  return passages;
}

std::vector<AnswerSpan> extract_answers(const std::string& passage,
                                        const WorldModel& world) {
  std::vector<AnswerSpan> spans;
  for (const auto& f : world.facts) {
    const Relation* r = world.relation(f.relation);
    if (!r) continue;
    auto [stmt, o_pos] = render_statement(*r, f);
    size_t pos = passage.find(stmt);
    if (pos == std::string::npos) continue;
    spans.push_back({f.id, static_cast<int>(pos) + o_pos,
                     static_cast<int>(f.object.size()), f.object});
  }
  std::sort(spans.begin(), spans.end(),
            [](const AnswerSpan& a, const AnswerSpan& b) {
              return a.char_start < b.char_start;
            });
  return spans;
}

std::string generate_question(const std::string& passage, const AnswerSpan& span,
                              const WorldModel& world) {
  util::require(span.fact_id >= 0 && span.fact_id < static_cast<int>(world.facts.size()),
                "generate_question: span not attributable to a world fact");
  const Fact& f = world.facts[span.fact_id];
  const Relation* r = world.relation(f.relation);
  util::require(r != nullptr, "generate_question: unknown relation");
  // The span must actually slice the recorded object out of the passage.
  util::require(span.char_start >= 0 &&
                    span.char_start + span.char_len <= static_cast<int>(passage.size()) &&
                    passage.substr(span.char_start, span.char_len) == f.object,
                "generate_question: span does not match the fact object");
  return instantiate(r->question_tmpl, f.subject, "");
}

bool filter_question(const QaPair& qa, const std::string& passage,
                     const WorldModel& world) {
  // Recover (relation, subject) from the question text alone.
  for (const auto& r : world.relations) {
    auto [q_pre, q_post] = split_at(r.question_tmpl, "{s}");
    if (qa.question.size() < q_pre.size() + q_post.size()) continue;
    if (qa.question.compare(0, q_pre.size(), q_pre) != 0) continue;
    if (!q_post.empty() &&
        qa.question.compare(qa.question.size() - q_post.size(), q_post.size(), q_post) !=
            0) {
      continue;
    }
    std::string subject = qa.question.substr(
        q_pre.size(), qa.question.size() - q_pre.size() - q_post.size());
    if (subject.empty()) continue;

    // Read the object off the passage from the statement pattern.
    auto [s_tmpl_pre, s_tmpl_post] = split_at(r.statement_tmpl, "{o}");
    std::string stmt_pre = instantiate(s_tmpl_pre, subject, "");
    size_t pos = passage.find(stmt_pre);
    if (pos == std::string::npos) continue;
    size_t obj_start = pos + stmt_pre.size();
    size_t sentence_end = passage.find('.', obj_start);
    if (sentence_end == std::string::npos) sentence_end = passage.size();
    std::string object = passage.substr(obj_start, sentence_end - obj_start);
    if (!s_tmpl_post.empty() && object.size() >= s_tmpl_post.size() &&
        object.compare(object.size() - s_tmpl_post.size(), s_tmpl_post.size(),
                       s_tmpl_post) == 0) {
      object.resize(object.size() - s_tmpl_post.size());
    }
    return strip_articles_lower(object) == strip_articles_lower(qa.answer);
  }
  return false;  // question matches no known template
}

std::vector<PretrainExample> build_pretrain_corpus(const WorldModel& world,
                                                   int facts_per_passage) {
  std::vector<PretrainExample> corpus;
  for (const auto& p : render_passages(world, facts_per_passage)) {
    PretrainExample ex;
    ex.passage_id = p.id;
    ex.passage = p.text;
    ex.fact_ids = p.fact_ids;
    for (const auto& span : extract_answers(p.text, world)) {
      QaPair qa{generate_question(p.text, span, world), span.answer};
      if (filter_question(qa, p.text, world)) ex.qa_pairs.push_back(std::move(qa));
    }
    util::require(!ex.qa_pairs.empty(), "pretrain example with no QA pairs");
    corpus.push_back(std::move(ex));
  }
  return corpus;
}

std::vector<QaPair> collect_memory_qas(const std::vector<PretrainExample>& corpus) {
  std::vector<QaPair> memory;
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& ex : corpus) {
    for (const auto& qa : ex.qa_pairs) {
      if (seen.insert({qa.question, qa.answer}).second) memory.push_back(qa);
    }
  }
  return memory;
}

QaSplit build_qa_split(const WorldModel& world, double heldout_frac, uint64_t seed) {
  util::require(heldout_frac >= 0.0 && heldout_frac < 1.0,
                "build_qa_split: heldout_frac must be in [0, 1)");
  QaSplit split;
  for (const auto& f : world.facts) {
    const Relation* r = world.relation(f.relation);
    if (!r) continue;
    QaPair qa{instantiate(r->paraphrase_tmpl, f.subject, ""), f.object};
    uint64_t h = util::mix_seed(seed, "qa-split-" + std::to_string(f.id));
    bool heldout = (h % 10000) < static_cast<uint64_t>(heldout_frac * 10000);
    (heldout ? split.heldout : split.train).push_back(std::move(qa));
  }
  return split;
}

std::vector<TwoHopExample> build_twohop(const WorldModel& world) {
  std::vector<TwoHopExample> out;
  for (const auto& r1 : world.relations) {
    for (const auto& r2 : world.relations) {
      if (r1.object_type != r2.subject_type) continue;
      if (!world.is_entity_type(r1.object_type)) continue;
      // Natural phrasing for the composed question from the first relation's
      // statement verb phrase: "{s} was born in {o}" -> "was born".
      std::string after_subject = split_at(r1.statement_tmpl, "{s}").second;
      std::string verb_part = split_at(after_subject, "{o}").first;
      std::string verb;
      {
        auto words = text::normalize_words(verb_part);
        static const std::set<std::string> preps = {"in", "at", "as", "of", "on", "a",
                                                    "the", "is"};
        while (!words.empty() && preps.count(words.back())) words.pop_back();
        for (const auto& w : words) {
          if (!verb.empty()) verb += ' ';
          verb += w;
        }
      }
      if (verb.empty()) continue;
      auto [q2_pre, q2_post] = split_at(r2.question_tmpl, "{s}");
      for (const auto& f1 : world.facts) {
        if (f1.relation != r1.name) continue;
        std::string o2 = world.walk(f1.object, r2.name);
        if (o2.empty()) continue;
        TwoHopExample ex;
        // e.g. "what country is the city where alice was born located in".
        ex.question = q2_pre + "the " + r1.object_type + " where " + f1.subject + " " +
                      verb + (q2_post.empty() ? "" : q2_post);
        ex.answer = o2;
        ex.bridge = f1.object;
        ex.subject = f1.subject;
        ex.first_relation = r1.name;
        ex.second_relation = r2.name;
        out.push_back(std::move(ex));
      }
    }
  }
  return out;
}

std::vector<TwoHopExample> build_twohop_split(const WorldModel& world,
                                              double heldout_frac, uint64_t seed,
                                              bool heldout) {
  std::vector<TwoHopExample> out;
  for (auto& ex : build_twohop(world)) {
    uint64_t h = util::mix_seed(seed, "twohop-" + ex.subject + "-" + ex.first_relation +
                                          "-" + ex.second_relation);
    bool is_heldout = (h % 10000) < static_cast<uint64_t>(heldout_frac * 10000);
    if (is_heldout == heldout) out.push_back(std::move(ex));
  }
  return out;
}

void save_pretrain_jsonl(const std::vector<PretrainExample>& corpus,
                         const std::string& path) {
  auto os = util::open_out(path);
  for (const auto& ex : corpus) {
    json qa = json::array();
    for (const auto& p : ex.qa_pairs) {
      qa.push_back({{"question", p.question}, {"answer", p.answer}});
    }
    json j{{"passage_id", ex.passage_id}, {"passage", ex.passage}, {"qa_pairs", qa}};
    os << j.dump() << "\n";
  }
}

std::vector<PretrainExample> load_pretrain_jsonl(const std::string& path) {
  std::vector<PretrainExample> corpus;
  for (const auto& line : util::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    PretrainExample ex;
    ex.passage_id = j.at("passage_id").get<int>();
    ex.passage = j.at("passage").get<std::string>();
    for (const auto& qa : j.at("qa_pairs")) {
      ex.qa_pairs.push_back(
          {qa.at("question").get<std::string>(), qa.at("answer").get<std::string>()});
    }
    corpus.push_back(std::move(ex));
  }
  util::require(!corpus.empty(), "empty pretrain corpus: " + path);
  return corpus;
}

void save_qa_jsonl(const std::vector<QaPair>& items, const std::string& path) {
  auto os = util::open_out(path);
  for (const auto& qa : items) {
    json j{{"question", qa.question}, {"answer", qa.answer}};
    os << j.dump() << "\n";
  }
}

std::vector<QaPair> load_qa_jsonl(const std::string& path) {
  std::vector<QaPair> items;
  for (const auto& line : util::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    items.push_back(
        {j.at("question").get<std::string>(), j.at("answer").get<std::string>()});
  }
  util::require(!items.empty(), "empty QA file: " + path);
  return items;
}

void save_twohop_jsonl(const std::vector<TwoHopExample>& items, const std::string& path) {
  auto os = util::open_out(path);
  for (const auto& ex : items) {
    json j{{"question", ex.question}, {"answer", ex.answer}, {"bridge", ex.bridge}};
    os << j.dump() << "\n";
  }
}

std::vector<TwoHopExample> load_twohop_jsonl(const std::string& path) {
  std::vector<TwoHopExample> items;
  for (const auto& line : util::read_lines(path)) {
    if (line.empty()) continue;
    json j = json::parse(line);
    TwoHopExample ex;
    ex.question = j.at("question").get<std::string>();
    ex.answer = j.at("answer").get<std::string>();
    ex.bridge = j.value("bridge", "");
    items.push_back(std::move(ex));
  }
  util::require(!items.empty(), "empty two-hop file: " + path);
  return items;
}

}  // namespace qamem::corpus
