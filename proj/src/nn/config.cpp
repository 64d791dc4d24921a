#include "qamem/nn/config.hpp"

#include "qamem/util/status.hpp"

namespace qamem::nn {

void ModelConfig::validate() const {
  util::require(d >= 2 && heads >= 1 && d % heads == 0,
                "model: d must be positive and divisible by heads");
  util::require(layers >= 1, "model: layers must be >= 1");
  util::require(vocab_size >= 1, "model: vocab_size unset");
  util::require(lambda >= 0.0, "model: lambda must be >= 0");
  util::require(k_retrieval >= 1, "model: k_retrieval must be >= 1");
  util::require(len_input >= 2 && len_key >= 2 && len_value >= 3 && len_target >= 2,
                "model: role lengths too small");
  util::require(len_concat_max >= len_input, "model: len_concat_max < len_input");
  util::require(dropout >= 0.0 && dropout < 1.0, "model: dropout must be in [0, 1)");
}

util::KvConfig ModelConfig::to_kv() const {
  util::KvConfig kv;
  kv.set_int("model.d", d);
  kv.set_int("model.layers", layers);
  kv.set_int("model.heads", heads);
  kv.set_int("model.vocab_size", vocab_size);
  kv.set_double("model.lambda", lambda);
  kv.set_int("model.k", k_retrieval);
  kv.set_int("len.input", len_input);
  kv.set_int("len.key", len_key);
  kv.set_int("len.value", len_value);
  kv.set_int("len.target", len_target);
  kv.set_int("len.concat_max", len_concat_max);
  kv.set_double("model.dropout", dropout);
  return kv;
}

ModelConfig ModelConfig::from_kv(const util::KvConfig& kv) {
  ModelConfig cfg;
  cfg.d = static_cast<int>(kv.get_int("model.d", cfg.d));
  cfg.layers = static_cast<int>(kv.get_int("model.layers", cfg.layers));
  cfg.heads = static_cast<int>(kv.get_int("model.heads", cfg.heads));
  cfg.vocab_size = static_cast<int>(kv.get_int("model.vocab_size", cfg.vocab_size));
  cfg.lambda = kv.get_double("model.lambda", cfg.lambda);
  cfg.k_retrieval = static_cast<int>(kv.get_int("model.k", cfg.k_retrieval));
  cfg.len_input = static_cast<int>(kv.get_int("len.input", cfg.len_input));
  cfg.len_key = static_cast<int>(kv.get_int("len.key", cfg.len_key));
  cfg.len_value = static_cast<int>(kv.get_int("len.value", cfg.len_value));
  cfg.len_target = static_cast<int>(kv.get_int("len.target", cfg.len_target));
  cfg.len_concat_max = static_cast<int>(kv.get_int("len.concat_max", cfg.len_concat_max));
  cfg.dropout = kv.get_double("model.dropout", cfg.dropout);
  return cfg;
}

void ModelConfig::save(const std::string& path) const { to_kv().save(path); }

ModelConfig ModelConfig::load(const std::string& path) {
  ModelConfig cfg = from_kv(util::KvConfig::load(path));
  cfg.validate();
  return cfg;
}

}  // namespace qamem::nn
