#pragma once

#include <vector>

#include "qamem/ad/tensor.hpp"
#include "qamem/util/rng.hpp"

namespace qamem::ad {

// Every op records a backward rule when any operand requires grad. Shapes
// are validated and every output is checked finite.

Tensor matmul(const Tensor& a, const Tensor& b);     // (m,k)x(k,n) -> (m,n)
Tensor matmul_nt(const Tensor& a, const Tensor& b);  // (m,k)x(n,k)^T -> (m,n)
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);          // same shape
Tensor add_rowwise(const Tensor& a, const Tensor& v);  // v broadcast over rows
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);  // elementwise
Tensor scale(const Tensor& a, double c);

Tensor concat_rows(const std::vector<Tensor>& parts);
Tensor concat_cols(const std::vector<Tensor>& parts);
Tensor slice_rows(const Tensor& a, int start, int count);
Tensor slice_cols(const Tensor& a, int start, int count);
Tensor gather_rows(const Tensor& a, std::vector<int> idx);
// Embedding lookup is a row gather on the table; duplicate ids accumulate
// gradient.
Tensor embedding(const Tensor& table, const std::vector<int>& ids);

Tensor softmax_rows(const Tensor& a);  // along the last axis
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  double eps = 1e-5);
Tensor relu(const Tensor& a);
Tensor gelu(const Tensor& a);
// Train-only inverted dropout; p == 0 or train == false is the identity.
Tensor dropout(const Tensor& a, double p, util::Rng& rng, bool train);

// Mean over rows not equal to ignore_id of -log softmax(logits)[target].
Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& targets,
                            int ignore_id = -1);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);

// Identity forward; no gradient flows to the operand.
Tensor stop_gradient(const Tensor& a);

}  // namespace qamem::ad
