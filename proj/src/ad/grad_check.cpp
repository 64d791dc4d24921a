#include "qamem/ad/grad_check.hpp"

#include <cmath>

#include "qamem/util/status.hpp"

namespace qamem::ad {

GradCheckReport grad_check(const std::function<Tensor()>& forward,
                           const std::vector<std::pair<std::string, Tensor>>& params,
                           double eps, double tol) {
  util::require(eps > 0.0 && tol > 0.0, "grad_check: eps and tol must be positive");

  Tensor loss0 = forward();
  util::require(loss0.size() == 1, "grad_check: forward must return a scalar");
  {
    Tensor again = forward();
    if (loss0.item() != again.item()) {
      throw util::ValidationError(
          "grad_check: non-deterministic forward (two runs differ); disable dropout");
    }
  }

  for (const auto& [name, p] : params) {
    Tensor handle = p;
    handle.zero_grad();
  }
  Tensor loss = forward();
  backward(loss);

  GradCheckReport report;
  report.max_rel_err = 0.0;
  for (auto& [name, p] : params) {
    GradCheckReport::Entry entry;
    entry.name = name;
    Tensor handle = p;
    auto theta = handle.raw_mut();
    auto analytic = p.grad();
    util::require(!analytic.empty(), "grad_check: no gradient reached " + name);
    for (size_t i = 0; i < theta.size(); ++i) {
      double saved = theta[i];
      theta[i] = saved + eps;
      double up = forward().item();
      theta[i] = saved - eps;
      double down = forward().item();
      theta[i] = saved;
      double numeric = (up - down) / (2.0 * eps);
      double rel = std::abs(analytic[i] - numeric) /
                   (std::abs(analytic[i]) + std::abs(numeric) + 1e-12);
      entry.max_rel_err = std::max(entry.max_rel_err, rel);
    }
    report.max_rel_err = std::max(report.max_rel_err, entry.max_rel_err);
    report.per_param.push_back(std::move(entry));
  }
  report.passed = report.max_rel_err < tol;
  return report;
}

}  // namespace qamem::ad
