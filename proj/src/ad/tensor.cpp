#include "qamem/ad/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "qamem/util/status.hpp"

namespace qamem::ad {

int numel(const Shape& s) {
  int n = 1;
  for (int d : s) n *= d;
  return n;
}

std::string shape_str(const Shape& s) {
  std::string out = "[";
  for (size_t i = 0; i < s.size(); ++i) {
    if (i) out += "x";
    out += std::to_string(s[i]);
  }
  return out + "]";
}

void Node::ensure_grad() {
  if (grad.empty()) grad.assign(val->size(), 0.0);
}

void Node::add_grad(std::span<const double> g) {
  ensure_grad();
  for (size_t i = 0; i < g.size(); ++i) grad[i] += g[i];
}

Tensor Tensor::from(Shape shape, std::vector<double> data, bool requires_grad) {
  util::require(!shape.empty() && numel(shape) == static_cast<int>(data.size()),
                "tensor: shape " + shape_str(shape) + " does not match data length " +
                    std::to_string(data.size()));
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->val = std::make_shared<std::vector<double>>(std::move(data));
  n->requires_grad = requires_grad;
  return Tensor(std::move(n));
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
  int n = numel(shape);
  return from(std::move(shape), std::vector<double>(n, 0.0), requires_grad);
}

Tensor Tensor::full(Shape shape, double v) {
  int n = numel(shape);
  return from(std::move(shape), std::vector<double>(n, v));
}

Tensor Tensor::scalar(double v) { return from({1}, {v}); }

int Tensor::rows() const { return ndim() == 2 ? n_->shape[0] : 1; }

int Tensor::cols() const { return ndim() == 2 ? n_->shape[1] : n_->shape[0]; }

std::span<double> Tensor::raw_mut() {
  util::require(n_->parents.empty(), "raw_mut: only leaf tensors are mutable");
  return *n_->val;
}

std::span<const double> Tensor::grad() const {
  static const std::vector<double> empty;
  return n_->grad.empty() ? std::span<const double>(empty) : std::span<const double>(n_->grad);
}

double Tensor::item() const {
  util::require(size() == 1, "item: tensor has " + std::to_string(size()) + " elements");
  return (*n_->val)[0];
}

void Tensor::zero_grad() {
  std::fill(n_->grad.begin(), n_->grad.end(), 0.0);
}

Tensor Tensor::alias() const {
  auto n = std::make_shared<Node>();
  n->shape = n_->shape;
  n->val = n_->val;
  n->requires_grad = true;
  return Tensor(std::move(n));
}

Tensor Tensor::detached() const {
  auto n = std::make_shared<Node>();
  n->shape = n_->shape;
  n->val = n_->val;
  n->requires_grad = false;
  return Tensor(std::move(n));
}

namespace detail {

void check_finite(std::span<const double> v, const char* op_name) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw util::NumericError(std::string("non-finite value produced by ") + op_name);
    }
  }
}

Tensor make_op(Shape shape, std::vector<double> data, std::vector<Tensor> inputs,
               std::function<void(Node&)> backward_fn, const char* op_name) {
  check_finite(data, op_name);
  auto n = std::make_shared<Node>();
  n->shape = std::move(shape);
  n->val = std::make_shared<std::vector<double>>(std::move(data));
  bool any_grad = false;
  for (const auto& in : inputs) {
    if (in.requires_grad()) any_grad = true;
  }
  if (any_grad) {
    n->requires_grad = true;
    n->parents.reserve(inputs.size());
    for (const auto& in : inputs) n->parents.push_back(in.node());
    n->backward_fn = std::move(backward_fn);
  }
  return Tensor(std::move(n));
}

}  // namespace detail

namespace {

// Iterative post-order over parent links; returns topological order with
// seeds last.
std::vector<Node*> topo_order(const std::vector<std::shared_ptr<Node>>& seeds) {
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  struct Frame {
    Node* node;
    size_t next_parent;
  };
  std::vector<Frame> stack;
  for (const auto& seed : seeds) {
    if (visited.count(seed.get())) continue;
    stack.push_back({seed.get(), 0});
    visited.insert(seed.get());
    while (!stack.empty()) {
      Frame& f = stack.back();
      if (f.next_parent < f.node->parents.size()) {
        Node* p = f.node->parents[f.next_parent++].get();
        if (p->requires_grad && !visited.count(p)) {
          visited.insert(p);
          stack.push_back({p, 0});
        }
      } else {
        order.push_back(f.node);
        stack.pop_back();
      }
    }
  }
  return order;
}

}  // namespace

void backward_seeded(const std::vector<std::pair<Tensor, std::vector<double>>>& seeds) {
  std::vector<std::shared_ptr<Node>> roots;
  for (const auto& [t, g] : seeds) {
    util::require(t.defined(), "backward: undefined tensor");
    util::require(static_cast<int>(g.size()) == t.size(),
                  "backward: seed gradient size mismatch");
    if (t.node()->consumed) {
      throw util::ValidationError("backward: graph already consumed");
    }
    if (!t.requires_grad()) continue;
    roots.push_back(t.node());
  }
  std::vector<Node*> order = topo_order(roots);
  for (const auto& [t, g] : seeds) {
    if (t.requires_grad()) t.node()->add_grad(g);
  }
  // Reverse topological order: every node's grad is complete before its
  // backward_fn distributes it to parents.
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    Node* n = *it;
    if (n->backward_fn && !n->grad.empty()) {
      n->backward_fn(*n);
    }
    n->consumed = true;
  }
  // Tear down edges iteratively; also prevents deep destructor recursion.
  for (Node* n : order) {
    n->backward_fn = nullptr;
    n->parents.clear();
  }
}

void backward(const Tensor& loss) {
  util::require(loss.defined() && loss.size() == 1,
                "backward: loss must be a scalar tensor");
  backward_seeded({{loss, {1.0}}});
}

}  // namespace qamem::ad
