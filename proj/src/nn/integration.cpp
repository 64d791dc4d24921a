#include "qamem/nn/integration.hpp"

#include <algorithm>

#include "qamem/util/status.hpp"

namespace qamem::nn {

using ad::Tensor;
using text::Vocab;

RetrievalTensors from_index(const mem::MemoryIndex& index,
                            const mem::RetrievalResult& r) {
  util::require(index.has_value_embeddings(),
                "from_index: index was built without value embeddings");
  RetrievalTensors out;
  out.ids = r.entry_ids;
  int k = static_cast<int>(r.entry_ids.size());
  int d = index.dim();
  std::vector<double> keys(static_cast<size_t>(k) * d);
  std::vector<double> values(static_cast<size_t>(k) * d);
  for (int i = 0; i < k; ++i) {
    auto kr = index.key_row(r.entry_ids[i]);
    auto vr = index.value_emb_row(r.entry_ids[i]);
    std::copy(kr.begin(), kr.end(), keys.begin() + static_cast<size_t>(i) * d);
    std::copy(vr.begin(), vr.end(), values.begin() + static_cast<size_t>(i) * d);
    out.value_ids.push_back(index.entry(r.entry_ids[i]).value_tokens.unpadded());
  }
  out.keys = Tensor::from({k, d}, std::move(keys));
  out.value_emb = Tensor::from({k, d}, std::move(values));
  return out;
}

ad::Tensor integrate_sum(const ad::Tensor& states, const ad::Tensor& alpha,
                         const ad::Tensor& value_emb) {
  util::require(alpha.size() == value_emb.rows(),
                "integrate_sum: alpha/value count mismatch");
  Tensor offset = ad::matmul(alpha, value_emb);  // 1 x d
  return ad::add_rowwise(states, offset);
}

std::vector<int> build_concat_ids(const std::vector<int>& input_ids,
                                  const std::vector<std::vector<int>>& value_ids_ranked,
                                  int max_len) {
  std::vector<int> out;
  // Reverse rank order: m_K first, best retrieval immediately before X.
  for (auto it = value_ids_ranked.rbegin(); it != value_ids_ranked.rend(); ++it) {
    size_t start = (!it->empty() && (*it)[0] == Vocab::kCls) ? 1 : 0;
    out.insert(out.end(), it->begin() + start, it->end());
    out.push_back(Vocab::kSep);
  }
  out.insert(out.end(), input_ids.begin(), input_ids.end());
  util::require(static_cast<int>(out.size()) <= max_len,
                "integrate_concat: concatenated length " + std::to_string(out.size()) +
                    " overflows encoder maximum " + std::to_string(max_len));
  return out;
}

HybridOutput hybrid_forward(const ParamView& pv, const ModelConfig& cfg,
                            const std::vector<int>& input_ids,
                            const std::vector<int>& target_ids,
                            const RetrievalTensors& r, double lambda,
                            bool stop_grad_alpha, util::Rng* drop_rng) {
  util::require(!target_ids.empty(), "hybrid_forward: empty target");

  HybridOutput out;
  out.enc = encode_ids(pv, cfg, input_ids, Role::input, "enc.", "emb.", drop_rng);
  Tensor memory;
  if (r.empty()) {
    // No-memory model: plain sequence-to-sequence.
    memory = out.enc.states;
  } else {
    Tensor query = out.enc.query();             // 1 x d
    out.scores = ad::matmul_nt(query, r.keys);  // 1 x K
    out.alpha = ad::softmax_rows(out.scores);
    if (stop_grad_alpha) out.alpha = ad::stop_gradient(out.alpha);

    Tensor h = integrate_sum(out.enc.states, out.alpha, r.value_emb);
    if (lambda == 0.0) {
      memory = h;
    } else {
      std::vector<int> xhat = build_concat_ids(input_ids, r.value_ids, cfg.len_concat_max);
      EncoderOutput hhat = encode_ids(pv, cfg, xhat, Role::input, "enc.", "emb.", drop_rng);
      int prefix_rows = hhat.n - out.enc.n;
      Tensor scaled_prefix = ad::scale(ad::slice_rows(hhat.states, 0, prefix_rows), lambda);
      Tensor scaled_x = ad::scale(ad::slice_rows(hhat.states, prefix_rows, out.enc.n), lambda);
      memory = ad::concat_rows({scaled_prefix, ad::add(scaled_x, h)});
    }
  }

  std::vector<int> dec_input{Vocab::kCls};
  dec_input.insert(dec_input.end(), target_ids.begin(), target_ids.end() - 1);
  out.logits = decode_logits(pv, cfg, memory, dec_input, "dec.", "emb.", drop_rng);
  out.loss = ad::cross_entropy_logits(out.logits, target_ids, Vocab::kPad);
  return out;
}

std::vector<int> greedy_decode(const ParamView& pv, const ModelConfig& cfg,
                               const std::vector<int>& input_ids,
                               const RetrievalTensors& r, int max_out_len,
                               double lambda) {
  util::require(max_out_len >= 1, "greedy_decode: max_out_len must be >= 1");
  EncoderOutput enc = encode_ids(pv, cfg, input_ids, Role::input);
  Tensor memory;
  if (lambda > 0.0 && !r.empty()) {
    // Inference drops the sum path and attends to the concatenation alone.
    std::vector<int> xhat = build_concat_ids(input_ids, r.value_ids, cfg.len_concat_max);
    memory = encode_ids(pv, cfg, xhat, Role::input).states;
  } else if (!r.empty()) {
    Tensor scores = ad::matmul_nt(enc.query(), r.keys);
    memory = integrate_sum(enc.states, ad::softmax_rows(scores), r.value_emb);
  } else {
    memory = enc.states;  // no-memory model
  }

  std::vector<int> emitted;
  std::vector<int> dec_input{Vocab::kCls};
  int limit = std::min(max_out_len, cfg.len_target);
  for (int step = 0; step < limit; ++step) {
    Tensor logits = decode_logits(pv, cfg, memory, dec_input);
    int t = logits.rows() - 1;
    auto row = logits.value().subspan(static_cast<size_t>(t) * cfg.vocab_size,
                                      cfg.vocab_size);
    int best = 0;
    for (int j = 1; j < cfg.vocab_size; ++j) {
      if (row[j] > row[best]) best = j;
    }
    if (best == Vocab::kEos) break;
    emitted.push_back(best);
    dec_input.push_back(best);
  }
  return emitted;
}

std::vector<double> query_embedding(const ParamView& pv, const ModelConfig& cfg,
                                    const std::vector<int>& input_ids,
                                    const std::string& enc_prefix,
                                    const std::string& emb_prefix) {
  EncoderOutput enc = encode_ids(pv, cfg, input_ids, Role::input, enc_prefix, emb_prefix);
  Tensor q = enc.query();
  return {q.value().begin(), q.value().end()};
}

mem::EmbedFn make_key_embedder(const ad::ParamStore& store, const ModelConfig& cfg,
                               const std::string& enc_prefix,
                               const std::string& emb_prefix) {
  return [&store, cfg, enc_prefix, emb_prefix](const text::TokenSeq& seq) {
    ParamView pv(store, BindMode::detached);
    EncoderOutput enc = encode_seq(pv, cfg, seq, Role::memory_key, enc_prefix, emb_prefix);
    Tensor c = enc.cls();
    return std::vector<double>(c.value().begin(), c.value().end());
  };
}

mem::EmbedFn make_value_embedder(const ad::ParamStore& store, const ModelConfig& cfg,
                                 const std::string& enc_prefix,
                                 const std::string& emb_prefix) {
  return [&store, cfg, enc_prefix, emb_prefix](const text::TokenSeq& seq) {
    ParamView pv(store, BindMode::detached);
    EncoderOutput enc =
        encode_seq(pv, cfg, seq, Role::memory_value, enc_prefix, emb_prefix);
    Tensor c = enc.cls();
    return std::vector<double>(c.value().begin(), c.value().end());
  };
}

std::vector<int> question_input_ids(const std::string& question, const text::Vocab& vocab,
                                    const ModelConfig& cfg) {
  text::TokenSeq seq = text::encode(question, vocab, cfg.len_input, Vocab::kMask);
  return seq.unpadded();
}

}  // namespace qamem::nn
