#pragma once

#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "qamem/ad/tensor.hpp"
#include "qamem/util/rng.hpp"

namespace qamem::ad {

// Accumulated per-step gradients keyed by parameter name.
using GradMap = std::unordered_map<std::string, std::vector<double>>;

// Named trainable leaves, kept in insertion order so every iteration over
// parameters is deterministic.
class ParamStore {
 public:
  Tensor create(const std::string& name, Shape shape, std::vector<double> init);
  Tensor create_trunc_normal(const std::string& name, Shape shape, double sigma,
                             util::Rng& rng);
  Tensor create_constant(const std::string& name, Shape shape, double v);

  bool contains(const std::string& name) const;
  Tensor get(const std::string& name) const;
  const std::vector<std::string>& names() const { return order_; }
  std::vector<std::string> names_with_prefix(const std::string& prefix) const;
  size_t count() const { return order_.size(); }

  // Deep-copies every "from<rest>" parameter to "to<rest>". Existing
  // destination names are overwritten in place (shape must match).
  void copy_prefix(const std::string& from, const std::string& to);

  // Order-sensitive FNV over raw parameter bytes (optionally restricted to a
  // name prefix); detects any drift of frozen parameters.
  uint64_t content_hash(const std::string& prefix = "") const;

 private:
  std::vector<std::string> order_;
  std::unordered_map<std::string, Tensor> map_;
};

}  // namespace qamem::ad
