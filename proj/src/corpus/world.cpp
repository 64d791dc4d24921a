#include "qamem/corpus/world.hpp"

#include <nlohmann/json.hpp>
#include <set>

#include "qamem/text/vocab.hpp"
#include "qamem/util/io.hpp"
#include "qamem/util/rng.hpp"
#include "qamem/util/status.hpp"

namespace qamem::corpus {

using json = nlohmann::json;

namespace {

const std::vector<std::string>& literal_pool(const std::string& type) {
  static const std::map<std::string, std::vector<std::string>> pools = {
      {"job",
       {"teacher", "baker", "doctor", "farmer", "singer", "pilot", "tailor", "barber",
        "mason", "potter", "weaver", "plumber", "florist", "clerk", "chef", "judge",
        "miner", "sailor", "guard", "scribe"}},
      {"instrument",
       {"violin", "piano", "flute", "drums", "cello", "trumpet", "harp", "oboe", "banjo",
        "guitar", "tuba", "clarinet", "fiddle", "organ", "accordion", "mandolin", "sitar",
        "viola", "lute", "bassoon"}},
      {"color",
       {"red", "blue", "green", "yellow", "purple", "orange", "teal", "maroon", "crimson",
        "indigo", "violet", "amber", "coral", "olive", "navy", "beige", "magenta", "cyan",
        "scarlet", "turquoise"}},
  };
  auto it = pools.find(type);
  util::require(it != pools.end(), "unknown literal pool: " + type);
  return it->second;
}

bool is_literal_type(const std::string& type) {
  return type == "job" || type == "instrument" || type == "color";
}

// Single-token fantasy names that cannot collide with template words or
// literals.
std::vector<std::string> make_names(util::Rng& rng, int count,
                                    const std::set<std::string>& blocked,
                                    std::set<std::string>& used,
                                    const char* flavor_suffix) {
  static const std::vector<std::string> onsets = {"b",  "d",  "f",  "g",  "k",  "l",
                                                  "m",  "n",  "p",  "r",  "s",  "t",
                                                  "v",  "z",  "br", "dr", "kr", "pl",
                                                  "st", "tr", "gl", "fr"};
  static const std::vector<std::string> vowels = {"a", "e", "i", "o", "u"};
  static const std::vector<std::string> codas = {"", "n", "r", "l", "s", "m"};
  std::vector<std::string> names;
  while (static_cast<int>(names.size()) < count) {
    std::string name;
    int syllables = 2 + static_cast<int>(util::rand_index(rng, 2));
    for (int s = 0; s < syllables; ++s) {
      name += onsets[util::rand_index(rng, onsets.size())];
      name += vowels[util::rand_index(rng, vowels.size())];
    }
    name += codas[util::rand_index(rng, codas.size())];
    name += flavor_suffix;
    if (blocked.count(name) || used.count(name)) continue;
    used.insert(name);
    names.push_back(name);
  }
  return names;
}

std::set<std::string> template_words(const std::vector<Relation>& relations) {
  std::set<std::string> words;
  auto absorb = [&](const std::string& tmpl) {
    for (const auto& w : text::normalize_words(tmpl)) {
      if (w != "s" && w != "o") words.insert(w);
    }
  };
  for (const auto& r : relations) {
    absorb(r.statement_tmpl);
    absorb(r.question_tmpl);
    absorb(r.paraphrase_tmpl);
  }
  for (const auto& pool : {"job", "instrument", "color"}) {
    for (const auto& w : literal_pool(pool)) words.insert(w);
  }
  return words;
}

}  // namespace

std::vector<Relation> default_relations() {
  return {
      {"born_in", "person", "city", "{s} was born in {o}", "where was {s} born",
       "which city is the birthplace of {s}"},
      {"lives_in", "person", "city", "{s} lives in {o}", "what city does {s} live in",
       "which city is home to {s}"},
      {"works_as", "person", "job", "{s} works as a {o}", "what does {s} work as",
       "which job does {s} hold"},
      {"plays", "person", "instrument", "{s} plays the {o}",
       "what instrument does {s} play", "which instrument does {s} perform on"},
      {"favorite_color", "person", "color", "the favorite color of {s} is {o}",
       "what is the favorite color of {s}", "which color does {s} like best"},
      {"located_in", "city", "country", "{s} is located in {o}",
       "what country is {s} located in", "which country contains {s}"},
  };
}

std::string instantiate(const std::string& tmpl, const std::string& subject,
                        const std::string& object) {
  std::string out = tmpl;
  auto replace = [&](const std::string& slot, const std::string& value) {
    size_t pos = out.find(slot);
    if (pos != std::string::npos) out.replace(pos, slot.size(), value);
  };
  replace("{s}", subject);
  replace("{o}", object);
  return out;
}

const Relation* WorldModel::relation(const std::string& name) const {
  for (const auto& r : relations) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::string WorldModel::walk(const std::string& subject,
                             const std::string& relation) const {
  for (const auto& f : facts) {
    if (f.subject == subject && f.relation == relation) return f.object;
  }
  return "";
}

WorldModel generate_world(uint64_t seed, int n_entities,
                          const std::vector<Relation>& relations) {
  util::require(n_entities >= 2, "generate_world: need at least 2 entities");
  util::require(!relations.empty(), "generate_world: need at least 1 relation");
  WorldModel w;
  w.relations = relations;

  util::Rng rng(util::mix_seed(seed, "world"));
  std::set<std::string> blocked = template_words(relations);
  std::set<std::string> used;

  // Split named entities over the entity types referenced by the relation
  // schema; literal pools are fixed word lists.
  std::set<std::string> entity_types;
  for (const auto& r : relations) {
    entity_types.insert(r.subject_type);
    if (!is_literal_type(r.object_type)) entity_types.insert(r.object_type);
  }
  for (const auto& r : relations) {
    if (is_literal_type(r.object_type)) w.entities[r.object_type] = literal_pool(r.object_type);
  }

  // Proportions: bulk persons, fewer cities, few countries. Any other entity
  // type shares the residual evenly.
  std::map<std::string, double> weight;
  for (const auto& t : entity_types) {
    if (t == "person") {
      weight[t] = 0.78;
    } else if (t == "city") {
      weight[t] = 0.16;
    } else if (t == "country") {
      weight[t] = 0.06;
    } else {
      weight[t] = 0.10;
    }
  }
  double total = 0.0;
  for (const auto& [t, x] : weight) total += x;
  for (const auto& t : entity_types) {
    int count = std::max(1, static_cast<int>(n_entities * weight[t] / total));
    const char* suffix = t == "city" ? "ville" : (t == "country" ? "land" : "");
    w.entities[t] = make_names(rng, count, blocked, used, suffix);
  }

  // Every eligible subject gets every relation, object drawn uniformly.
  int fact_id = 0;
  for (const auto& r : relations) {
    auto sit = w.entities.find(r.subject_type);
    util::require(sit != w.entities.end() && !sit->second.empty(),
                  "generate_world: no entities of type " + r.subject_type);
    const auto& objects = w.entities.at(r.object_type);
    util::require(!objects.empty(), "generate_world: no objects of type " + r.object_type);
    for (const auto& s : sit->second) {
      const std::string& o = objects[util::rand_index(rng, objects.size())];
      w.facts.push_back({fact_id++, s, r.name, o});
    }
  }
  return w;
}

std::string WorldModel::to_json() const {
  json j;
  j["entities"] = entities;
  j["relations"] = json::array();
  for (const auto& r : relations) {
    j["relations"].push_back({{"name", r.name},
                              {"subject_type", r.subject_type},
                              {"object_type", r.object_type},
                              {"statement", r.statement_tmpl},
                              {"question", r.question_tmpl},
                              {"paraphrase", r.paraphrase_tmpl}});
  }
  j["facts"] = json::array();
  for (const auto& f : facts) {
    j["facts"].push_back({{"id", f.id},
                          {"subject", f.subject},
                          {"relation", f.relation},
                          {"object", f.object}});
  }
  return j.dump(2);
}

WorldModel WorldModel::from_json(const std::string& text) {
  json j = json::parse(text);
  WorldModel w;
  w.entities = j.at("entities").get<std::map<std::string, std::vector<std::string>>>();
  for (const auto& r : j.at("relations")) {
    w.relations.push_back({r.at("name").get<std::string>(),
                           r.at("subject_type").get<std::string>(),
                           r.at("object_type").get<std::string>(),
                           r.at("statement").get<std::string>(),
                           r.at("question").get<std::string>(),
                           r.at("paraphrase").get<std::string>()});
  }
  for (const auto& f : j.at("facts")) {
    w.facts.push_back({f.at("id").get<int>(), f.at("subject").get<std::string>(),
                       f.at("relation").get<std::string>(),
                       f.at("object").get<std::string>()});
  }
  return w;
}

void WorldModel::save(const std::string& path) const {
  util::write_file(path, to_json());
}

WorldModel WorldModel::load(const std::string& path) {
  return from_json(util::slurp_file(path));
}

}  // namespace qamem::corpus
