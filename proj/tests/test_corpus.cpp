#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>

#include "qamem/corpus/generate.hpp"
#include "qamem/corpus/silver.hpp"
#include "qamem/corpus/world.hpp"
#include "qamem/util/rng.hpp"
#include "qamem/util/status.hpp"

using namespace qamem;
using corpus::QaPair;
using corpus::WorldModel;

namespace {

// Hand-built micro-world: two persons, two cities, one country.
WorldModel micro_world() {
  WorldModel w;
  w.entities["person"] = {"alice", "bob"};
  w.entities["city"] = {"paris", "lyon"};
  w.entities["country"] = {"france"};
  w.relations = corpus::default_relations();
  w.facts = {
      {0, "alice", "born_in", "paris"},
      {1, "bob", "born_in", "lyon"},
      {2, "paris", "located_in", "france"},
      {3, "lyon", "located_in", "france"},
  };
  return w;
}

}  // namespace

TEST_CASE("generate_world is deterministic in the seed") {
  WorldModel a = corpus::generate_world(7, 40);
  WorldModel b = corpus::generate_world(7, 40);
  CHECK(a.to_json() == b.to_json());
  WorldModel c = corpus::generate_world(8, 40);
  CHECK(a.to_json() != c.to_json());
}

TEST_CASE("generate_world with two entities and one relation") {
  std::vector<corpus::Relation> rel = {corpus::default_relations()[0]};  // born_in
  WorldModel w = corpus::generate_world(3, 2, rel);
  REQUIRE(w.entities.at("person").size() == 1);
  REQUIRE(w.entities.at("city").size() == 1);
  // Exactly the expressible facts: one born_in per person.
  REQUIRE(w.facts.size() == 1);
  CHECK(w.facts[0].subject == w.entities.at("person")[0]);
  CHECK(w.facts[0].relation == "born_in");
  CHECK(w.facts[0].object == w.entities.at("city")[0]);
}

TEST_CASE("every generated two-hop chain composes on the relation graph") {
  WorldModel w = corpus::generate_world(11, 60);
  auto chains = corpus::build_twohop(w);
  REQUIRE(!chains.empty());
  for (const auto& c : chains) {
    // Graph-walk oracle: subject --r1--> bridge --r2--> answer.
    std::string hop1 = w.walk(c.subject, c.first_relation);
    REQUIRE(hop1 == c.bridge);
    CHECK(w.walk(hop1, c.second_relation) == c.answer);
  }
}

TEST_CASE("render_passages: ten facts at five per passage") {
  WorldModel w = micro_world();
  // Extend to exactly 10 facts with extra person relations.
  w.facts.push_back({4, "alice", "lives_in", "lyon"});
  w.facts.push_back({5, "bob", "lives_in", "paris"});
  w.facts.push_back({6, "alice", "works_as", "teacher"});
  w.facts.push_back({7, "bob", "works_as", "baker"});
  w.facts.push_back({8, "alice", "plays", "violin"});
  w.facts.push_back({9, "bob", "plays", "flute"});
  auto passages = corpus::render_passages(w, 5);
  REQUIRE(passages.size() == 2);
  std::set<int> seen;
  for (const auto& p : passages) {
    CHECK(p.fact_ids.size() == 5);
    for (int id : p.fact_ids) CHECK(seen.insert(id).second);  // disjoint
  }
  CHECK(seen.size() == 10);
}

TEST_CASE("render_passages: a single fact is a single-sentence passage") {
  WorldModel w = micro_world();
  w.facts = {{0, "alice", "born_in", "paris"}};
  auto passages = corpus::render_passages(w, 5);
  REQUIRE(passages.size() == 1);
  CHECK(passages[0].text == "alice was born in paris.");
  CHECK(passages[0].fact_ids == std::vector<int>{0});
}

TEST_CASE("render_passages covers all facts exactly once") {
  WorldModel w = corpus::generate_world(13, 80);
  for (int fpp : {1, 3, 4, 7}) {
    auto passages = corpus::render_passages(w, fpp);
    std::set<int> covered;
    for (const auto& p : passages) {
      for (int id : p.fact_ids) CHECK(covered.insert(id).second);
    }
    CHECK(covered.size() == w.facts.size());
  }
}

TEST_CASE("extract_answers finds object spans with exact offsets") {
  WorldModel w = micro_world();
  w.facts = {{0, "alice", "born_in", "paris"}};
  auto passages = corpus::render_passages(w, 5);
  auto spans = corpus::extract_answers(passages[0].text, w);
  REQUIRE(spans.size() == 1);
  CHECK(spans[0].answer == "paris");
  CHECK(passages[0].text.substr(spans[0].char_start, spans[0].char_len) == "paris");

  // Alien passage: empty list, not an error.
  CHECK(corpus::extract_answers("the weather is nice today.", w).empty());
}

TEST_CASE("extract_answers: three facts give three spans slicing exactly") {
  WorldModel w = micro_world();
  w.facts = {{0, "alice", "born_in", "paris"},
             {1, "alice", "works_as", "teacher"},
             {2, "alice", "plays", "violin"}};
  auto passages = corpus::render_passages(w, 5);
  REQUIRE(passages.size() == 1);
  auto spans = corpus::extract_answers(passages[0].text, w);
  REQUIRE(spans.size() == 3);
  for (const auto& s : spans) {
    CHECK(passages[0].text.substr(s.char_start, s.char_len) == s.answer);
  }
}

TEST_CASE("generate_question instantiates the relation template") {
  WorldModel w = micro_world();
  w.facts = {{0, "alice", "born_in", "paris"}, {1, "bob", "lives_in", "paris"}};
  auto passages = corpus::render_passages(w, 5);
  auto spans = corpus::extract_answers(passages[0].text, w);
  REQUIRE(spans.size() == 2);
  std::set<std::string> questions;
  for (const auto& s : spans) {
    questions.insert(corpus::generate_question(passages[0].text, s, w));
  }
  // Two facts share the answer string but produce distinct questions.
  REQUIRE(questions.size() == 2);
  CHECK(questions.count("where was alice born") == 1);
  CHECK(questions.count("what city does bob live in") == 1);
}

TEST_CASE("generated questions agree with the world graph") {
  WorldModel w = corpus::generate_world(17, 60);
  auto corpus_set = corpus::build_pretrain_corpus(w, 4);
  int checked = 0;
  for (const auto& ex : corpus_set) {
    auto spans = corpus::extract_answers(ex.passage, w);
    for (const auto& s : spans) {
      std::string q = corpus::generate_question(ex.passage, s, w);
      // World-graph QA oracle: answering the question from the graph yields
      // the span text.
      const corpus::Fact& f = w.facts[s.fact_id];
      CHECK(w.walk(f.subject, f.relation) == s.answer);
      ++checked;
    }
  }
  CHECK(checked > 100);
}

TEST_CASE("filter_question keeps consistent pairs and drops corrupted ones") {
  WorldModel w = micro_world();
  w.facts = {{0, "alice", "born_in", "paris"}};
  auto passages = corpus::render_passages(w, 5);
  QaPair good{"where was alice born", "paris"};
  QaPair bad{"where was alice born", "lyon"};
  QaPair articled{"where was alice born", "the paris"};
  CHECK(corpus::filter_question(good, passages[0].text, w));
  CHECK(!corpus::filter_question(bad, passages[0].text, w));
  CHECK(corpus::filter_question(articled, passages[0].text, w));  // article-stripped
}

TEST_CASE("filter precision is 1.0 under injected corruption") {
  WorldModel w = corpus::generate_world(19, 80);
  auto corpus_set = corpus::build_pretrain_corpus(w, 4);
  util::Rng rng(5);
  int kept_corrupted = 0, dropped_clean = 0, total = 0, corrupted = 0;
  for (const auto& ex : corpus_set) {
    for (const auto& qa : ex.qa_pairs) {
      ++total;
      bool corrupt = util::rand_unit(rng) < 0.10;
      QaPair candidate = qa;
      if (corrupt) {
        ++corrupted;
        candidate.answer = "zzzwrong";
      }
      bool keep = corpus::filter_question(candidate, ex.passage, w);
      if (corrupt && keep) ++kept_corrupted;
      if (!corrupt && !keep) ++dropped_clean;
    }
  }
  REQUIRE(corrupted > 20);
  CHECK(kept_corrupted == 0);  // precision 1.0
  CHECK(dropped_clean == 0);   // no false drops on the clean part
  CHECK(total > 200);
}

TEST_CASE("pretrain corpus answers are verbatim contiguous spans") {
  WorldModel w = corpus::generate_world(23, 60);
  auto corpus_set = corpus::build_pretrain_corpus(w, 4);
  REQUIRE(!corpus_set.empty());
  for (const auto& ex : corpus_set) {
    REQUIRE(!ex.qa_pairs.empty());
    for (const auto& qa : ex.qa_pairs) {
      CHECK(ex.passage.find(qa.answer) != std::string::npos);
    }
  }
  // Purity: same seed and config, same corpus.
  auto again = corpus::build_pretrain_corpus(corpus::generate_world(23, 60), 4);
  REQUIRE(again.size() == corpus_set.size());
  for (size_t i = 0; i < again.size(); ++i) {
    CHECK(again[i].passage == corpus_set[i].passage);
    CHECK(again[i].qa_pairs.size() == corpus_set[i].qa_pairs.size());
  }
}

TEST_CASE("mine_silver_chain recovers the hand-built chain") {
  std::vector<QaPair> memory = {
      {"what is the favorite color of carol", "red"},
      {"where was alice born", "paris"},
      {"what country is paris located in", "france"},
      {"where was bob born", "lyon"},
      {"what country is lyon located in", "france"},
  };
  auto chain = corpus::mine_silver_chain(
      "what country is the city where alice was born located in", "france", memory);
  REQUIRE(chain.has_value());
  CHECK(chain->final_id == 2);
  CHECK(chain->intermediate_id == 1);
  CHECK(chain->bridge == "paris");

  // Exhaustive oracle over all (final, intermediate) pairs satisfying
  // answer-match + bridge-match + overlap, ranked by (final overlap,
  // intermediate overlap, lower ids): the winner must be (2, 1).
  const std::string twohop = "what country is the city where alice was born located in";
  int best_f = -1, best_m = -1, best_fo = -1, best_mo = -1;
  for (size_t f = 0; f < memory.size(); ++f) {
    if (memory[f].answer != "france") continue;
    std::string bridge =
        memory[f].question == "what country is paris located in" ? "paris" : "lyon";
    int fo = corpus::token_overlap(memory[f].question, twohop);
    for (size_t m = 0; m < memory.size(); ++m) {
      if (m == f) continue;
      if (memory[m].answer != bridge) continue;
      int mo = corpus::token_overlap(memory[m].question, twohop);
      if (mo < 1) continue;
      bool wins = std::tie(fo, mo) > std::tie(best_fo, best_mo);
      if (wins) {
        best_fo = fo;
        best_mo = mo;
        best_f = static_cast<int>(f);
        best_m = static_cast<int>(m);
      }
    }
  }
  CHECK(best_f == 2);
  CHECK(best_m == 1);
  CHECK(best_f == chain->final_id);
  CHECK(best_m == chain->intermediate_id);
}

TEST_CASE("mine_silver_chain: unmatched answer stays unmined") {
  std::vector<QaPair> memory = {{"where was alice born", "paris"}};
  auto chain = corpus::mine_silver_chain("what country is the city where alice was born",
                                         "germany", memory);
  CHECK(!chain.has_value());
}

TEST_CASE("mine_silver_chain prefers higher question overlap") {
  // Two final-hop candidates share the answer; one shares 3 content tokens
  // with the two-hop question {country, city, sailed}, the other only 1
  // {country}. Each leaves one bridge token (bremport vs dovania).
  std::vector<QaPair> memory = {
      {"what country is dovania in", "prussia"},
      {"what country is the city bremport sailed", "prussia"},
      {"where did carol sail from", "bremport"},
      {"which port did carol leave", "dovania"},
  };
  auto chain = corpus::mine_silver_chain(
      "what country is the city where carol sailed years ago", "prussia", memory);
  REQUIRE(chain.has_value());
  CHECK(chain->final_id == 1);
  CHECK(chain->intermediate_id == 2);
  CHECK(chain->bridge == "bremport");
}

TEST_CASE("silver mining recovers at least 95 percent of mineable chains") {
  WorldModel w = corpus::generate_world(29, 120);
  auto corpus_set = corpus::build_pretrain_corpus(w, 4);
  auto memory = corpus::collect_memory_qas(corpus_set);
  auto chains = corpus::build_twohop(w);
  REQUIRE(chains.size() >= 100);

  int mined = 0, correct = 0;
  for (const auto& c : chains) {
    auto silver = corpus::mine_silver_chain(c.question, c.answer, memory);
    if (!silver) continue;
    ++mined;
    const QaPair& m1 = memory[silver->intermediate_id];
    // Ground truth by construction: the intermediate must be the first-hop
    // fact's QA (bridge answer and the true subject in the question).
    bool answer_ok = m1.answer == c.bridge;
    bool subject_ok = m1.question.find(c.subject) != std::string::npos;
    if (answer_ok && subject_ok) ++correct;
  }
  CHECK(mined >= static_cast<int>(chains.size() * 95 / 100));
  CHECK(correct * 100 >= mined * 95);
}

TEST_CASE("two-hop question phrasing matches the intended surface form") {
  WorldModel w = micro_world();
  auto chains = corpus::build_twohop(w);
  bool found = false;
  for (const auto& c : chains) {
    if (c.subject == "alice" && c.first_relation == "born_in") {
      CHECK(c.question == "what country is the city where alice was born located in");
      CHECK(c.answer == "france");
      CHECK(c.bridge == "paris");
      found = true;
    }
  }
  CHECK(found);
}

TEST_CASE("world JSON round-trips") {
  WorldModel w = corpus::generate_world(31, 50);
  WorldModel back = WorldModel::from_json(w.to_json());
  CHECK(back.to_json() == w.to_json());
}
