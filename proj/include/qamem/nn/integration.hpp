#pragma once

#include <vector>

#include "qamem/mem/index.hpp"
#include "qamem/nn/transformer.hpp"

namespace qamem::nn {

// Retrieval slice handed to the hybrid forward. Keys and value embeddings
// are K x d tensors in rank order (best first): graph tensors during
// in-batch training (trainable key path), constants when retrieving from a
// frozen global index. value_ids are the unpadded value token sequences.
struct RetrievalTensors {
  std::vector<int> ids;
  ad::Tensor keys;
  ad::Tensor value_emb;
  std::vector<std::vector<int>> value_ids;

  int k() const { return static_cast<int>(ids.size()); }
  bool empty() const { return ids.empty(); }
};

// Constant RetrievalTensors from a frozen index result.
RetrievalTensors from_index(const mem::MemoryIndex& index, const mem::RetrievalResult& r);

// states + broadcast(alpha . value_emb): the differentiable integration path.
ad::Tensor integrate_sum(const ad::Tensor& states, const ad::Tensor& alpha,
                         const ad::Tensor& value_emb);

// Token layout of the concatenated input: [v_K, SEP, ..., v_1, SEP, X] —
// retrieved values highest-score-last, immediately before X. Each value's
// leading [CLS] is dropped; X keeps its own layout. Errors on overflow of
// the encoder maximum.
std::vector<int> build_concat_ids(const std::vector<int>& input_ids,
                                  const std::vector<std::vector<int>>& value_ids_ranked,
                                  int max_len);

struct HybridOutput {
  ad::Tensor loss;
  ad::Tensor logits;
  ad::Tensor scores;  // 1 x K raw inner products (graph tensor)
  ad::Tensor alpha;   // 1 x K softmax weights (post stop-gradient when applied)
  EncoderOutput enc;
};

// The hybrid objective: cross-entropy of the decoder over a memory that
// combines the weighted-sum path H and the concatenation path Hhat.
//   lambda == 0 : decoder memory is H alone (sum-only model).
//   lambda  > 0 : decoder memory is lambda*Hhat with H added onto its final
//                 n rows (the X segment).
// Gradients reach the retrieval scores only through alpha; stop_grad_alpha
// severs that path (frozen-index training).
HybridOutput hybrid_forward(const ParamView& pv, const ModelConfig& cfg,
                            const std::vector<int>& input_ids,
                            const std::vector<int>& target_ids,
                            const RetrievalTensors& r, double lambda,
                            bool stop_grad_alpha, util::Rng* drop_rng = nullptr);

// Greedy argmax decoding. With lambda > 0 the decoder attends to the
// concatenation representation Hhat alone (the sum path is dropped at
// inference); a lambda == 0 model keeps its trained sum-path memory H.
// Decoding starts from [CLS] and stops at [EOS] or max_out_len.
std::vector<int> greedy_decode(const ParamView& pv, const ModelConfig& cfg,
                               const std::vector<int>& input_ids,
                               const RetrievalTensors& r, int max_out_len,
                               double lambda);

// Query vector for retrieval: encoder state at the query slot, as plain
// numbers (detached view recommended).
std::vector<double> query_embedding(const ParamView& pv, const ModelConfig& cfg,
                                    const std::vector<int>& input_ids,
                                    const std::string& enc_prefix = "enc.",
                                    const std::string& emb_prefix = "emb.");

// Embedding closures over frozen parameters for index construction.
mem::EmbedFn make_key_embedder(const ad::ParamStore& store, const ModelConfig& cfg,
                               const std::string& enc_prefix,
                               const std::string& emb_prefix);
mem::EmbedFn make_value_embedder(const ad::ParamStore& store, const ModelConfig& cfg,
                                 const std::string& enc_prefix,
                                 const std::string& emb_prefix);

// Question ids with the pseudo-[MASK] front token used for fine-tuning and
// evaluation inputs.
std::vector<int> question_input_ids(const std::string& question, const text::Vocab& vocab,
                                    const ModelConfig& cfg);

}  // namespace qamem::nn
