#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qamem/ad/tensor.hpp"

namespace qamem::ad {

struct GradCheckReport {
  struct Entry {
    std::string name;
    double max_rel_err = 0.0;
  };
  std::vector<Entry> per_param;
  double max_rel_err = 0.0;
  bool passed = false;
};

// Compares reverse-mode gradients against central finite differences for
// every element of every listed parameter. `forward` must rebuild the graph
// from the parameters' current values on each call and be deterministic:
// two evaluations at the same point are required to agree bitwise, otherwise
// the check aborts. Relative error is |ga - gn| / (|ga| + |gn| + 1e-12).
GradCheckReport grad_check(const std::function<Tensor()>& forward,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double eps, double tol);

}  // namespace qamem::ad
