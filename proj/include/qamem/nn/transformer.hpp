#pragma once

#include <map>
#include <string>
#include <vector>

#include "qamem/ad/ops.hpp"
#include "qamem/ad/param_store.hpp"
#include "qamem/nn/config.hpp"
#include "qamem/text/vocab.hpp"

namespace qamem::nn {

// How a forward pass binds parameters:
//   direct   -- the store's own leaves; gradients land on them (single
//               threaded paths, grad checks).
//   alias    -- fresh leaf views sharing value buffers; each view collects
//               its own gradients (per-worker graphs).
//   detached -- constant views; no graph recording (inference).
enum class BindMode { direct, alias, detached };

class ParamView {
 public:
  ParamView(const ad::ParamStore& store, BindMode mode)
      : store_(&store), mode_(mode) {}

  ad::Tensor operator()(const std::string& name) const;
  BindMode mode() const { return mode_; }

  // Sums this view's accumulated leaf gradients into `out` (alias mode).
  void collect_grads(ad::GradMap& out) const;
  // Collects and clears gradients sitting on the store's own leaves
  // (direct mode).
  static void collect_direct_grads(const ad::ParamStore& store, ad::GradMap& out);

 private:
  const ad::ParamStore* store_;
  BindMode mode_;
  mutable std::map<std::string, ad::Tensor> cache_;
};

// Creates token/position embeddings, encoder and decoder stacks, and the
// output projection under the prefixes "emb.", "enc.", "dec.".
void init_model_params(ad::ParamStore& store, const ModelConfig& cfg, util::Rng& rng);

enum class Role { input, memory_key, memory_value };

struct EncoderOutput {
  ad::Tensor states;  // n x d, trailing [PAD]s stripped
  int query_pos = 0;  // first mask for inputs, [CLS] for memory roles
  int cls_pos = 0;
  int n = 0;

  ad::Tensor query() const { return ad::slice_rows(states, query_pos, 1); }
  ad::Tensor cls() const { return ad::slice_rows(states, cls_pos, 1); }
};

// Transformer encoder over an unpadded id sequence. Trailing pads must be
// stripped by the caller (encode_seq does); masking out pads and dropping
// them are equivalent here since pads are only ever trailing. A non-null
// drop_rng enables train-time dropout at cfg.dropout.
EncoderOutput encode_ids(const ParamView& pv, const ModelConfig& cfg,
                         const std::vector<int>& ids, Role role,
                         const std::string& enc_prefix = "enc.",
                         const std::string& emb_prefix = "emb.",
                         util::Rng* drop_rng = nullptr);

EncoderOutput encode_seq(const ParamView& pv, const ModelConfig& cfg,
                         const text::TokenSeq& seq, Role role,
                         const std::string& enc_prefix = "enc.",
                         const std::string& emb_prefix = "emb.",
                         util::Rng* drop_rng = nullptr);

// Teacher-forcing decoder: causal self-attention over dec_input_ids, cross
// attention into `memory`, returns logits (T x vocab).
ad::Tensor decode_logits(const ParamView& pv, const ModelConfig& cfg,
                         const ad::Tensor& memory, const std::vector<int>& dec_input_ids,
                         const std::string& dec_prefix = "dec.",
                         const std::string& emb_prefix = "emb.",
                         util::Rng* drop_rng = nullptr);

}  // namespace qamem::nn
