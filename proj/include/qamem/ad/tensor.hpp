#pragma once

#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace qamem::ad {

// Shape is {n} for vectors or {rows, cols} for matrices; scalars are {1}.
using Shape = std::vector<int>;

int numel(const Shape& s);
std::string shape_str(const Shape& s);

struct Node {
  Shape shape;
  std::shared_ptr<std::vector<double>> val;
  std::vector<double> grad;  // allocated on first use
  bool requires_grad = false;
  bool consumed = false;  // backward ran through this node
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  int size() const { return static_cast<int>(val->size()); }
  void ensure_grad();
  void add_grad(std::span<const double> g);
};

// Shared handle to a node in the implicit computation graph. Copying is
// cheap; value buffers are immutable once an op has produced them, except
// for leaf mutation via raw_mut (optimizer updates, finite differences).
class Tensor {
 public:
  Tensor() = default;

  static Tensor from(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double v);
  static Tensor scalar(double v);

  bool defined() const { return n_ != nullptr; }
  const Shape& shape() const { return n_->shape; }
  int ndim() const { return static_cast<int>(n_->shape.size()); }
  int size() const { return n_->size(); }
  // 2-D view: vectors count as a single row.
  int rows() const;
  int cols() const;

  std::span<const double> value() const { return *n_->val; }
  std::span<double> raw_mut();  // leaves only
  std::span<const double> grad() const;
  bool has_grad() const { return !n_->grad.empty(); }
  bool requires_grad() const { return n_->requires_grad; }
  double item() const;
  void zero_grad();

  // Leaf view sharing this tensor's value buffer. `alias` participates in a
  // new graph as a trainable leaf (used for per-thread parameter views and
  // subgraph boundaries); `detached` is a constant view.
  Tensor alias() const;
  Tensor detached() const;

  std::shared_ptr<Node> node() const { return n_; }
  explicit Tensor(std::shared_ptr<Node> n) : n_(std::move(n)) {}

 private:
  std::shared_ptr<Node> n_;
};

// Reverse-mode sweep from a scalar loss (seed gradient 1). Gradients
// accumulate (sum) into every reachable tensor that requires grad. The
// traversed graph is consumed: a second backward through it is an error.
void backward(const Tensor& loss);

// Generalized sweep seeded with explicit output gradients. Used to continue
// backpropagation into a shared subgraph after per-example passes stopped at
// its boundary.
void backward_seeded(const std::vector<std::pair<Tensor, std::vector<double>>>& seeds);

namespace detail {
Tensor make_op(Shape shape, std::vector<double> data,
               std::vector<Tensor> inputs, std::function<void(Node&)> backward_fn,
               const char* op_name);
void check_finite(std::span<const double> v, const char* op_name);
}  // namespace detail

}  // namespace qamem::ad
