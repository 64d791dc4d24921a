#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "qamem/ad/param_store.hpp"

namespace qamem::ad {

struct OptimizerConfig {
  std::string kind = "adam";  // adam | sgd
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam with per-parameter moment state (SGD as a plain fallback). Parameters
// in the freeze set, or absent from the gradient map, are left bit-identical,
// moments included.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg);

  // Validates all gradients finite before touching any parameter; a
  // non-finite gradient aborts the whole step.
  void step(ParamStore& params, const GradMap& grads,
            const std::set<std::string>& freeze = {});

  int64_t step_count() const { return t_; }
  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }

 private:
  struct Moments {
    std::vector<double> m, v;
  };
  OptimizerConfig cfg_;
  int64_t t_ = 0;
  std::unordered_map<std::string, Moments> state_;
};

}  // namespace qamem::ad
