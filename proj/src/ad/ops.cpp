#include "qamem/ad/ops.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>

#include "qamem/util/status.hpp"

namespace qamem::ad {

namespace {

using util::require;

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Map = Eigen::Map<EMat>;
using CMap = Eigen::Map<const EMat>;

CMap as_mat(const Tensor& t) { return CMap(t.value().data(), t.rows(), t.cols()); }

CMap buf_mat(const std::shared_ptr<std::vector<double>>& v, int r, int c) {
  return CMap(v->data(), r, c);
}

void require_2dish(const Tensor& t, const char* op) {
  require(t.defined() && t.ndim() <= 2, std::string(op) + ": expects a 1-D or 2-D tensor");
}

// Accumulates grad into parent i of `self` if it requires grad.
bool wants_grad(Node& self, size_t i) {
  return self.parents[i]->requires_grad;
}

void acc(Node& self, size_t i, const EMat& g) {
  Node& p = *self.parents[i];
  p.ensure_grad();
  Map(p.grad.data(), g.rows(), g.cols()) += g;
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_2dish(a, "matmul");
  require_2dish(b, "matmul");
  int m = a.rows(), k = a.cols(), k2 = b.rows(), n = b.cols();
  require(k == k2, "matmul: inner dimensions differ " + shape_str(a.shape()) + " vs " +
                       shape_str(b.shape()));
  std::vector<double> out(static_cast<size_t>(m) * n);
  Map(out.data(), m, n).noalias() = as_mat(a) * as_mat(b);
  auto av = a.node()->val;
  auto bv = b.node()->val;
  return detail::make_op(
      {m, n}, std::move(out), {a, b},
      [av, bv, m, k, n](Node& self) {
        CMap g(self.grad.data(), m, n);
        if (wants_grad(self, 0)) acc(self, 0, g * buf_mat(bv, k, n).transpose());
        if (wants_grad(self, 1)) acc(self, 1, buf_mat(av, m, k).transpose() * g);
      },
      "matmul");
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_2dish(a, "matmul_nt");
  require_2dish(b, "matmul_nt");
  int m = a.rows(), k = a.cols(), n = b.rows();
  require(k == b.cols(), "matmul_nt: inner dimensions differ " + shape_str(a.shape()) +
                             " vs " + shape_str(b.shape()));
  std::vector<double> out(static_cast<size_t>(m) * n);
  Map(out.data(), m, n).noalias() = as_mat(a) * as_mat(b).transpose();
  auto av = a.node()->val;
  auto bv = b.node()->val;
  return detail::make_op(
      {m, n}, std::move(out), {a, b},
      [av, bv, m, k, n](Node& self) {
        CMap g(self.grad.data(), m, n);
        if (wants_grad(self, 0)) acc(self, 0, g * buf_mat(bv, n, k));
        if (wants_grad(self, 1)) acc(self, 1, g.transpose() * buf_mat(av, m, k));
      },
      "matmul_nt");
}

Tensor transpose(const Tensor& a) {
  require_2dish(a, "transpose");
  int m = a.rows(), n = a.cols();
  std::vector<double> out(static_cast<size_t>(m) * n);
  Map(out.data(), n, m) = as_mat(a).transpose();
  return detail::make_op(
      {n, m}, std::move(out), {a},
      [m, n](Node& self) {
        if (wants_grad(self, 0)) acc(self, 0, CMap(self.grad.data(), n, m).transpose());
      },
      "transpose");
}

Tensor add(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "add: shape mismatch " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  std::vector<double> out(a.size());
  auto av = a.value(), bv = b.value();
  for (int i = 0; i < a.size(); ++i) out[i] = av[i] + bv[i];
  return detail::make_op(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        if (wants_grad(self, 0)) self.parents[0]->add_grad(self.grad);
        if (wants_grad(self, 1)) self.parents[1]->add_grad(self.grad);
      },
      "add");
}

Tensor add_rowwise(const Tensor& a, const Tensor& v) {
  require_2dish(a, "add_rowwise");
  require(v.size() == a.cols(), "add_rowwise: vector length " + std::to_string(v.size()) +
                                    " != columns " + std::to_string(a.cols()));
  int m = a.rows(), n = a.cols();
  std::vector<double> out(a.value().begin(), a.value().end());
  auto vv = v.value();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += vv[j];
  return detail::make_op(
      a.shape(), std::move(out), {a, v},
      [m, n](Node& self) {
        if (wants_grad(self, 0)) self.parents[0]->add_grad(self.grad);
        if (wants_grad(self, 1)) {
          Node& p = *self.parents[1];
          p.ensure_grad();
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j)
              p.grad[j] += self.grad[static_cast<size_t>(i) * n + j];
        }
      },
      "add_rowwise");
}

Tensor sub(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "sub: shape mismatch");
  std::vector<double> out(a.size());
  auto av = a.value(), bv = b.value();
  for (int i = 0; i < a.size(); ++i) out[i] = av[i] - bv[i];
  return detail::make_op(
      a.shape(), std::move(out), {a, b},
      [](Node& self) {
        if (wants_grad(self, 0)) self.parents[0]->add_grad(self.grad);
        if (wants_grad(self, 1)) {
          Node& p = *self.parents[1];
          p.ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] -= self.grad[i];
        }
      },
      "sub");
}

Tensor mul(const Tensor& a, const Tensor& b) {
  require(a.shape() == b.shape(), "mul: shape mismatch " + shape_str(a.shape()) + " vs " +
                                      shape_str(b.shape()));
  std::vector<double> out(a.size());
  auto av_s = a.value(), bv_s = b.value();
  for (int i = 0; i < a.size(); ++i) out[i] = av_s[i] * bv_s[i];
  auto av = a.node()->val;
  auto bv = b.node()->val;
  return detail::make_op(
      a.shape(), std::move(out), {a, b},
      [av, bv](Node& self) {
        if (wants_grad(self, 0)) {
          Node& p = *self.parents[0];
          p.ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * (*bv)[i];
        }
        if (wants_grad(self, 1)) {
          Node& p = *self.parents[1];
          p.ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * (*av)[i];
        }
      },
      "mul");
}

Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.size());
  auto av = a.value();
  for (int i = 0; i < a.size(); ++i) out[i] = av[i] * c;
  return detail::make_op(
      a.shape(), std::move(out), {a},
      [c](Node& self) {
        if (wants_grad(self, 0)) {
          Node& p = *self.parents[0];
          p.ensure_grad();
          for (size_t i = 0; i < self.grad.size(); ++i) p.grad[i] += self.grad[i] * c;
        }
      },
      "scale");
}

Tensor concat_rows(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_rows: no inputs");
  int cols = parts[0].cols();
  int rows = 0;
  for (const auto& p : parts) {
    require(p.cols() == cols, "concat_rows: column count mismatch");
    rows += p.rows();
  }
  std::vector<double> out;
  out.reserve(static_cast<size_t>(rows) * cols);
  for (const auto& p : parts) {
    auto v = p.value();
    out.insert(out.end(), v.begin(), v.end());
  }
  std::vector<int> row_of(parts.size());
  for (size_t i = 0, r = 0; i < parts.size(); ++i) {
    row_of[i] = static_cast<int>(r);
    r += parts[i].rows();
  }
  return detail::make_op(
      {rows, cols}, std::move(out), parts,
      [row_of, cols](Node& self) {
        for (size_t i = 0; i < self.parents.size(); ++i) {
          if (!wants_grad(self, i)) continue;
          Node& p = *self.parents[i];
          p.ensure_grad();
          const double* g = self.grad.data() + static_cast<size_t>(row_of[i]) * cols;
          for (size_t j = 0; j < p.grad.size(); ++j) p.grad[j] += g[j];
        }
      },
      "concat_rows");
}

Tensor concat_cols(const std::vector<Tensor>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  int rows = parts[0].rows();
  int cols = 0;
  for (const auto& p : parts) {
    require(p.rows() == rows, "concat_cols: row count mismatch");
    cols += p.cols();
  }
  std::vector<double> out(static_cast<size_t>(rows) * cols);
  std::vector<int> col_of(parts.size());
  {
    int c0 = 0;
    for (size_t i = 0; i < parts.size(); ++i) {
      col_of[i] = c0;
      auto v = parts[i].value();
      int pc = parts[i].cols();
      for (int r = 0; r < rows; ++r)
        for (int j = 0; j < pc; ++j)
          out[static_cast<size_t>(r) * cols + c0 + j] = v[static_cast<size_t>(r) * pc + j];
      c0 += pc;
    }
  }
  return detail::make_op(
      {rows, cols}, std::move(out), parts,
      [col_of, rows, cols](Node& self) {
        for (size_t i = 0; i < self.parents.size(); ++i) {
          if (!wants_grad(self, i)) continue;
          Node& p = *self.parents[i];
          p.ensure_grad();
          int pc = static_cast<int>(p.grad.size()) / rows;
          for (int r = 0; r < rows; ++r)
            for (int j = 0; j < pc; ++j)
              p.grad[static_cast<size_t>(r) * pc + j] +=
                  self.grad[static_cast<size_t>(r) * cols + col_of[i] + j];
        }
      },
      "concat_cols");
}

Tensor slice_rows(const Tensor& a, int start, int count) {
  require_2dish(a, "slice_rows");
  require(start >= 0 && count >= 1 && start + count <= a.rows(),
          "slice_rows: range out of bounds");
  int n = a.cols();
  auto v = a.value();
  std::vector<double> out(v.begin() + static_cast<size_t>(start) * n,
                          v.begin() + static_cast<size_t>(start + count) * n);
  return detail::make_op(
      {count, n}, std::move(out), {a},
      [start, n](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        double* g = p.grad.data() + static_cast<size_t>(start) * n;
        for (size_t i = 0; i < self.grad.size(); ++i) g[i] += self.grad[i];
      },
      "slice_rows");
}

Tensor slice_cols(const Tensor& a, int start, int count) {
  require_2dish(a, "slice_cols");
  require(start >= 0 && count >= 1 && start + count <= a.cols(),
          "slice_cols: range out of bounds");
  int m = a.rows(), n = a.cols();
  std::vector<double> out(static_cast<size_t>(m) * count);
  auto v = a.value();
  for (int r = 0; r < m; ++r)
    for (int j = 0; j < count; ++j)
      out[static_cast<size_t>(r) * count + j] = v[static_cast<size_t>(r) * n + start + j];
  return detail::make_op(
      {m, count}, std::move(out), {a},
      [start, m, n, count](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (int r = 0; r < m; ++r)
          for (int j = 0; j < count; ++j)
            p.grad[static_cast<size_t>(r) * n + start + j] +=
                self.grad[static_cast<size_t>(r) * count + j];
      },
      "slice_cols");
}

Tensor gather_rows(const Tensor& a, std::vector<int> idx) {
  require_2dish(a, "gather_rows");
  int m = a.rows(), n = a.cols();
  for (int i : idx) require(i >= 0 && i < m, "gather_rows: index out of bounds");
  std::vector<double> out(idx.size() * static_cast<size_t>(n));
  auto v = a.value();
  for (size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < n; ++j)
      out[r * n + j] = v[static_cast<size_t>(idx[r]) * n + j];
  int k = static_cast<int>(idx.size());
  return detail::make_op(
      {k, n}, std::move(out), {a},
      [idx = std::move(idx), n](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (size_t r = 0; r < idx.size(); ++r)
          for (int j = 0; j < n; ++j)
            p.grad[static_cast<size_t>(idx[r]) * n + j] += self.grad[r * n + j];
      },
      "gather_rows");
}

Tensor embedding(const Tensor& table, const std::vector<int>& ids) {
  return gather_rows(table, ids);
}

Tensor softmax_rows(const Tensor& a) {
  require_2dish(a, "softmax");
  int m = a.rows(), n = a.cols();
  std::vector<double> out(a.size());
  auto v = a.value();
  for (int r = 0; r < m; ++r) {
    const double* x = v.data() + static_cast<size_t>(r) * n;
    double* y = out.data() + static_cast<size_t>(r) * n;
    double mx = x[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      y[j] = std::exp(x[j] - mx);
      z += y[j];
    }
    for (int j = 0; j < n; ++j) y[j] /= z;
  }
  return detail::make_op(
      a.shape(), std::move(out), {a},
      [m, n](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (int r = 0; r < m; ++r) {
          const double* y = self.val->data() + static_cast<size_t>(r) * n;
          const double* g = self.grad.data() + static_cast<size_t>(r) * n;
          double dot = 0.0;
          for (int j = 0; j < n; ++j) dot += y[j] * g[j];
          double* pg = p.grad.data() + static_cast<size_t>(r) * n;
          for (int j = 0; j < n; ++j) pg[j] += y[j] * (g[j] - dot);
        }
      },
      "softmax");
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps) {
  require_2dish(x, "layer_norm");
  int m = x.rows(), n = x.cols();
  require(gamma.size() == n && beta.size() == n,
          "layer_norm: gamma/beta length must equal feature dimension");
  std::vector<double> out(x.size());
  auto xhat = std::make_shared<std::vector<double>>(x.size());
  auto inv_std = std::make_shared<std::vector<double>>(m);
  auto xv = x.value();
  auto gv_s = gamma.value(), bv_s = beta.value();
  for (int r = 0; r < m; ++r) {
    const double* row = xv.data() + static_cast<size_t>(r) * n;
    double mu = 0.0;
    for (int j = 0; j < n; ++j) mu += row[j];
    mu /= n;
    double var = 0.0;
    for (int j = 0; j < n; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= n;
    double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[r] = is;
    double* xh = xhat->data() + static_cast<size_t>(r) * n;
    double* y = out.data() + static_cast<size_t>(r) * n;
    for (int j = 0; j < n; ++j) {
      xh[j] = (row[j] - mu) * is;
      y[j] = gv_s[j] * xh[j] + bv_s[j];
    }
  }
  auto gval = gamma.node()->val;
  return detail::make_op(
      x.shape(), std::move(out), {x, gamma, beta},
      [xhat, inv_std, gval, m, n](Node& self) {
        for (int r = 0; r < m; ++r) {
          const double* xh = xhat->data() + static_cast<size_t>(r) * n;
          const double* g = self.grad.data() + static_cast<size_t>(r) * n;
          if (wants_grad(self, 1)) {
            Node& pg = *self.parents[1];
            pg.ensure_grad();
            for (int j = 0; j < n; ++j) pg.grad[j] += g[j] * xh[j];
          }
          if (wants_grad(self, 2)) {
            Node& pb = *self.parents[2];
            pb.ensure_grad();
            for (int j = 0; j < n; ++j) pb.grad[j] += g[j];
          }
          if (wants_grad(self, 0)) {
            Node& px = *self.parents[0];
            px.ensure_grad();
            double mean_h = 0.0, mean_hx = 0.0;
            for (int j = 0; j < n; ++j) {
              double h = (*gval)[j] * g[j];
              mean_h += h;
              mean_hx += h * xh[j];
            }
            mean_h /= n;
            mean_hx /= n;
            double is = (*inv_std)[r];
            double* pxg = px.grad.data() + static_cast<size_t>(r) * n;
            for (int j = 0; j < n; ++j) {
              double h = (*gval)[j] * g[j];
              pxg[j] += is * (h - mean_h - xh[j] * mean_hx);
            }
          }
        }
      },
      "layer_norm");
}

Tensor relu(const Tensor& a) {
  std::vector<double> out(a.size());
  auto v = a.value();
  for (int i = 0; i < a.size(); ++i) out[i] = v[i] > 0.0 ? v[i] : 0.0;
  auto xv = a.node()->val;
  return detail::make_op(
      a.shape(), std::move(out), {a},
      [xv](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
          if ((*xv)[i] > 0.0) p.grad[i] += self.grad[i];
      },
      "relu");
}

Tensor gelu(const Tensor& a) {
  // Exact form: x * Phi(x), with Phi the standard normal CDF.
  std::vector<double> out(a.size());
  auto v = a.value();
  constexpr double inv_sqrt2 = 0.7071067811865475244;
  for (int i = 0; i < a.size(); ++i) {
    out[i] = 0.5 * v[i] * (1.0 + std::erf(v[i] * inv_sqrt2));
  }
  auto xv = a.node()->val;
  return detail::make_op(
      a.shape(), std::move(out), {a},
      [xv](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        const double inv_sqrt2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
        for (size_t i = 0; i < self.grad.size(); ++i) {
          double x = (*xv)[i];
          double cdf = 0.5 * (1.0 + std::erf(x * inv_sqrt2));
          double pdf = inv_sqrt2pi * std::exp(-0.5 * x * x);
          p.grad[i] += self.grad[i] * (cdf + x * pdf);
        }
      },
      "gelu");
}

Tensor dropout(const Tensor& a, double p, util::Rng& rng, bool train) {
  require(p >= 0.0 && p < 1.0, "dropout: p must be in [0, 1)");
  if (!train || p == 0.0) return a;
  double keep = 1.0 - p;
  auto mask = std::make_shared<std::vector<double>>(a.size());
  std::vector<double> out(a.size());
  auto v = a.value();
  for (int i = 0; i < a.size(); ++i) {
    double m = util::rand_unit(rng) < p ? 0.0 : 1.0 / keep;
    (*mask)[i] = m;
    out[i] = v[i] * m;
  }
  return detail::make_op(
      a.shape(), std::move(out), {a},
      [mask](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p0 = *self.parents[0];
        p0.ensure_grad();
        for (size_t i = 0; i < self.grad.size(); ++i)
          p0.grad[i] += self.grad[i] * (*mask)[i];
      },
      "dropout");
}

Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& targets,
                            int ignore_id) {
  require_2dish(logits, "cross_entropy");
  int m = logits.rows(), n = logits.cols();
  require(static_cast<int>(targets.size()) == m,
          "cross_entropy: target count must equal logits rows");
  auto v = logits.value();
  std::vector<int> kept;
  kept.reserve(targets.size());
  for (int r = 0; r < m; ++r) {
    if (targets[r] == ignore_id) continue;
    require(targets[r] >= 0 && targets[r] < n, "cross_entropy: target id out of range");
    kept.push_back(r);
  }
  require(!kept.empty(), "cross_entropy: all rows ignored");
  // Stable per-row log-softmax; softmax probabilities retained for backward.
  auto probs = std::make_shared<std::vector<double>>(static_cast<size_t>(m) * n);
  double total = 0.0;
  for (int r : kept) {
    const double* x = v.data() + static_cast<size_t>(r) * n;
    double* q = probs->data() + static_cast<size_t>(r) * n;
    double mx = x[0];
    for (int j = 1; j < n; ++j) mx = std::max(mx, x[j]);
    double z = 0.0;
    for (int j = 0; j < n; ++j) {
      q[j] = std::exp(x[j] - mx);
      z += q[j];
    }
    for (int j = 0; j < n; ++j) q[j] /= z;
    total += std::log(z) + mx - x[targets[r]];
  }
  double inv_count = 1.0 / static_cast<double>(kept.size());
  std::vector<double> out{total * inv_count};
  return detail::make_op(
      {1}, std::move(out), {logits},
      [probs, kept, targets, n, inv_count](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        double g = self.grad[0] * inv_count;
        for (int r : kept) {
          const double* q = probs->data() + static_cast<size_t>(r) * n;
          double* pg = p.grad.data() + static_cast<size_t>(r) * n;
          for (int j = 0; j < n; ++j) pg[j] += g * q[j];
          pg[targets[r]] -= g;
        }
      },
      "cross_entropy");
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.value()) s += x;
  return detail::make_op(
      {1}, {s}, {a},
      [](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (double& g : p.grad) g += self.grad[0];
      },
      "sum");
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double x : a.value()) s += x;
  double inv = 1.0 / a.size();
  return detail::make_op(
      {1}, {s * inv}, {a},
      [inv](Node& self) {
        if (!wants_grad(self, 0)) return;
        Node& p = *self.parents[0];
        p.ensure_grad();
        for (double& g : p.grad) g += self.grad[0] * inv;
      },
      "mean");
}

Tensor stop_gradient(const Tensor& a) {
  // Shares the value buffer; records no parents, so backward never reaches
  // the operand through this node.
  return a.detached();
}

}  // namespace qamem::ad
