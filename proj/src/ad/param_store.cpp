#include "qamem/ad/param_store.hpp"

#include <algorithm>

#include "qamem/util/hash.hpp"
#include "qamem/util/status.hpp"

namespace qamem::ad {

Tensor ParamStore::create(const std::string& name, Shape shape, std::vector<double> init) {
  util::require(!contains(name), "parameter already exists: " + name);
  Tensor t = Tensor::from(std::move(shape), std::move(init), /*requires_grad=*/true);
  order_.push_back(name);
  map_.emplace(name, t);
  return t;
}

Tensor ParamStore::create_trunc_normal(const std::string& name, Shape shape, double sigma,
                                       util::Rng& rng) {
  int n = numel(shape);
  std::vector<double> init(n);
  for (double& v : init) v = util::trunc_normal(rng, sigma);
  return create(name, std::move(shape), std::move(init));
}

Tensor ParamStore::create_constant(const std::string& name, Shape shape, double v) {
  int n = numel(shape);
  return create(name, std::move(shape), std::vector<double>(n, v));
}

bool ParamStore::contains(const std::string& name) const { return map_.count(name) > 0; }

Tensor ParamStore::get(const std::string& name) const {
  auto it = map_.find(name);
  util::require(it != map_.end(), "unknown parameter: " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names_with_prefix(const std::string& prefix) const {
  std::vector<std::string> out;
  for (const auto& n : order_) {
    if (n.rfind(prefix, 0) == 0) out.push_back(n);
  }
  return out;
}

void ParamStore::copy_prefix(const std::string& from, const std::string& to) {
  for (const auto& name : names_with_prefix(from)) {
    std::string dst = to + name.substr(from.size());
    Tensor src = map_.at(name);
    auto it = map_.find(dst);
    if (it == map_.end()) {
      create(dst, src.shape(), std::vector<double>(src.value().begin(), src.value().end()));
    } else {
      util::require(it->second.shape() == src.shape(),
                    "copy_prefix: shape mismatch at " + dst);
      auto d = it->second.raw_mut();
      auto s = src.value();
      std::copy(s.begin(), s.end(), d.begin());
    }
  }
}

uint64_t ParamStore::content_hash(const std::string& prefix) const {
  uint64_t h = 14695981039346656037ull;
  for (const auto& name : order_) {
    if (!prefix.empty() && name.rfind(prefix, 0) != 0) continue;
    h = util::fnv1a(name.data(), name.size(), h);
    auto v = map_.at(name).value();
    h = util::fnv1a(v.data(), v.size() * sizeof(double), h);
  }
  return h;
}

}  // namespace qamem::ad
