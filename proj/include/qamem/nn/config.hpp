#pragma once

#include <string>

#include "qamem/util/kvconfig.hpp"

namespace qamem::nn {

// Model geometry and role length limits. Hidden size must divide evenly over
// the attention heads.
struct ModelConfig {
  int d = 64;
  int layers = 2;  // encoder and decoder depth
  int heads = 4;
  int vocab_size = 0;
  double lambda = 1.0;  // hybrid balance weight
  int k_retrieval = 4;
  int len_input = 128;
  int len_key = 32;
  int len_value = 40;
  int len_target = 48;
  int len_concat_max = 1024;
  double dropout = 0.0;

  int head_dim() const { return d / heads; }
  void validate() const;

  util::KvConfig to_kv() const;
  static ModelConfig from_kv(const util::KvConfig& kv);
  void save(const std::string& path) const;
  static ModelConfig load(const std::string& path);
};

}  // namespace qamem::nn
