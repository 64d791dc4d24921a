#include "qamem/ad/optimizer.hpp"

#include <cmath>

#include "qamem/util/status.hpp"

namespace qamem::ad {

Optimizer::Optimizer(OptimizerConfig cfg) : cfg_(std::move(cfg)) {
  util::require(cfg_.kind == "adam" || cfg_.kind == "sgd",
                "optimizer: unknown kind " + cfg_.kind);
  util::require(cfg_.lr > 0.0, "optimizer: learning rate must be positive");
}

void Optimizer::step(ParamStore& params, const GradMap& grads,
                     const std::set<std::string>& freeze) {
  auto frozen = [&](const std::string& name) {
    if (freeze.count(name)) return true;
    // Prefix entries end with '.'; freeze whole parameter groups.
    for (const auto& f : freeze) {
      if (!f.empty() && f.back() == '.' && name.rfind(f, 0) == 0) return true;
    }
    return false;
  };

  // Validate before mutating anything.
  for (const auto& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end() || frozen(name)) continue;
    Tensor p = params.get(name);
    util::require(static_cast<int>(it->second.size()) == p.size(),
                  "optimizer: gradient shape mismatch for " + name);
    for (double g : it->second) {
      if (!std::isfinite(g)) {
        throw util::NumericError("optimizer: non-finite gradient for " + name +
                                 "; step aborted");
      }
    }
  }

  ++t_;
  for (const auto& name : params.names()) {
    auto it = grads.find(name);
    if (it == grads.end() || frozen(name)) continue;
    Tensor p = params.get(name);
    auto theta = p.raw_mut();
    const auto& g = it->second;
    if (cfg_.kind == "sgd") {
      for (size_t i = 0; i < theta.size(); ++i) theta[i] -= cfg_.lr * g[i];
      continue;
    }
    Moments& mo = state_[name];
    if (mo.m.empty()) {
      mo.m.assign(theta.size(), 0.0);
      mo.v.assign(theta.size(), 0.0);
    }
    double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (size_t i = 0; i < theta.size(); ++i) {
      mo.m[i] = cfg_.beta1 * mo.m[i] + (1.0 - cfg_.beta1) * g[i];
      mo.v[i] = cfg_.beta2 * mo.v[i] + (1.0 - cfg_.beta2) * g[i] * g[i];
      double mhat = mo.m[i] / bc1;
      double vhat = mo.v[i] / bc2;
      theta[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

}  // namespace qamem::ad
