#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qamem::corpus {

// A relation type with its surface templates. "{s}" and "{o}" are the
// subject and object slots. question_tmpl is the canonical form used for
// memory entries; paraphrase_tmpl is a differently-worded form used for
// fine-tuning/eval sets so retrieval must generalize beyond string match.
struct Relation {
  std::string name;
  std::string subject_type;  // entity type, e.g. "person"
  std::string object_type;   // entity type or literal pool name
  std::string statement_tmpl;
  std::string question_tmpl;
  std::string paraphrase_tmpl;
};

struct Fact {
  int id = 0;
  std::string subject;
  std::string relation;
  std::string object;
};

// Deterministic synthetic knowledge graph: typed entities, literal pools,
// facts, and per-relation templates. Relations compose (person -> city ->
// country) so two-hop questions exist.
struct WorldModel {
  std::map<std::string, std::vector<std::string>> entities;  // type -> names
  std::vector<Relation> relations;
  std::vector<Fact> facts;

  const Relation* relation(const std::string& name) const;
  bool is_entity_type(const std::string& type) const { return entities.count(type) > 0; }

  // Follows subject --relation--> object in the fact list; empty if absent.
  std::string walk(const std::string& subject, const std::string& relation) const;

  std::string to_json() const;
  static WorldModel from_json(const std::string& text);
  void save(const std::string& path) const;
  static WorldModel load(const std::string& path);
};

// The default six-relation schema; five person relations plus city ->
// country, giving two composable chains via the city bridge.
std::vector<Relation> default_relations();

// Builds a world of roughly n_entities names split over persons, cities and
// countries, with every relation instantiated for every eligible subject.
// Pure function of (seed, n_entities, relations).
WorldModel generate_world(uint64_t seed, int n_entities,
                          const std::vector<Relation>& relations = default_relations());

std::string instantiate(const std::string& tmpl, const std::string& subject,
                        const std::string& object);

}  // namespace qamem::corpus
