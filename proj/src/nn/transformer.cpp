#include "qamem/nn/transformer.hpp"

#include <cmath>

#include "qamem/util/status.hpp"

namespace qamem::nn {

using ad::Tensor;

ad::Tensor ParamView::operator()(const std::string& name) const {
  auto it = cache_.find(name);
  if (it != cache_.end()) return it->second;
  Tensor base = store_->get(name);
  Tensor bound;
  switch (mode_) {
    case BindMode::direct:
      bound = base;
      break;
    case BindMode::alias:
      bound = base.alias();
      break;
    case BindMode::detached:
      bound = base.detached();
      break;
  }
  cache_.emplace(name, bound);
  return bound;
}

void ParamView::collect_grads(ad::GradMap& out) const {
  for (const auto& [name, leaf] : cache_) {
    auto g = leaf.grad();
    if (g.empty()) continue;
    auto& acc = out[name];
    if (acc.empty()) {
      acc.assign(g.begin(), g.end());
    } else {
      for (size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
    }
  }
}

void ParamView::collect_direct_grads(const ad::ParamStore& store, ad::GradMap& out) {
  for (const auto& name : store.names()) {
    Tensor p = store.get(name);
    auto g = p.grad();
    if (g.empty()) continue;
    bool nonzero = false;
    for (double x : g) {
      if (x != 0.0) {
        nonzero = true;
        break;
      }
    }
    if (nonzero) {
      auto& acc = out[name];
      if (acc.empty()) {
        acc.assign(g.begin(), g.end());
      } else {
        for (size_t i = 0; i < g.size(); ++i) acc[i] += g[i];
      }
    }
    p.zero_grad();
  }
}

void init_model_params(ad::ParamStore& store, const ModelConfig& cfg, util::Rng& rng) {
  cfg.validate();
  const double sigma = 0.02;  // truncated normal init
  const int d = cfg.d, ff = 4 * cfg.d;

  store.create_trunc_normal("emb.tok", {cfg.vocab_size, d}, sigma, rng);
  store.create_trunc_normal("emb.pos_enc", {cfg.len_concat_max, d}, sigma, rng);
  store.create_trunc_normal("emb.pos_dec", {cfg.len_target + 1, d}, sigma, rng);

  auto make_ln = [&](const std::string& prefix) {
    store.create_constant(prefix + ".g", {d}, 1.0);
    store.create_constant(prefix + ".b", {d}, 0.0);
  };
  auto make_attn = [&](const std::string& prefix) {
    store.create_trunc_normal(prefix + ".wq", {d, d}, sigma, rng);
    store.create_trunc_normal(prefix + ".wk", {d, d}, sigma, rng);
    store.create_trunc_normal(prefix + ".wv", {d, d}, sigma, rng);
    store.create_trunc_normal(prefix + ".wo", {d, d}, sigma, rng);
  };
  auto make_mlp = [&](const std::string& prefix) {
    store.create_trunc_normal(prefix + ".w1", {d, ff}, sigma, rng);
    store.create_constant(prefix + ".b1", {ff}, 0.0);
    store.create_trunc_normal(prefix + ".w2", {ff, d}, sigma, rng);
    store.create_constant(prefix + ".b2", {d}, 0.0);
  };

  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = "enc.l" + std::to_string(l);
    make_ln(p + ".ln1");
    make_attn(p + ".attn");
    make_ln(p + ".ln2");
    make_mlp(p + ".mlp");
  }
  make_ln("enc.final_ln");

  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = "dec.l" + std::to_string(l);
    make_ln(p + ".ln1");
    make_attn(p + ".self");
    make_ln(p + ".ln2");
    make_attn(p + ".cross");
    make_ln(p + ".ln3");
    make_mlp(p + ".mlp");
  }
  make_ln("dec.final_ln");
  store.create_trunc_normal("dec.out", {d, cfg.vocab_size}, sigma, rng);
}

namespace {

Tensor multi_head_attention(const ParamView& pv, const ModelConfig& cfg,
                            const Tensor& queries_in, const Tensor& memory_in,
                            const std::string& prefix, const Tensor& mask) {
  const int dh = cfg.head_dim();
  const double inv_sqrt_dh = 1.0 / std::sqrt(static_cast<double>(dh));
  Tensor q = ad::matmul(queries_in, pv(prefix + ".wq"));
  Tensor k = ad::matmul(memory_in, pv(prefix + ".wk"));
  Tensor v = ad::matmul(memory_in, pv(prefix + ".wv"));
  std::vector<Tensor> heads;
  heads.reserve(cfg.heads);
  for (int h = 0; h < cfg.heads; ++h) {
    Tensor qh = ad::slice_cols(q, h * dh, dh);
    Tensor kh = ad::slice_cols(k, h * dh, dh);
    Tensor vh = ad::slice_cols(v, h * dh, dh);
    Tensor scores = ad::scale(ad::matmul_nt(qh, kh), inv_sqrt_dh);
    if (mask.defined()) scores = ad::add(scores, mask);
    Tensor attn = ad::softmax_rows(scores);
    heads.push_back(ad::matmul(attn, vh));
  }
  return ad::matmul(ad::concat_cols(heads), pv(prefix + ".wo"));
}

Tensor mlp_block(const ParamView& pv, const Tensor& x, const std::string& prefix) {
  Tensor h = ad::gelu(ad::add_rowwise(ad::matmul(x, pv(prefix + ".w1")), pv(prefix + ".b1")));
  return ad::add_rowwise(ad::matmul(h, pv(prefix + ".w2")), pv(prefix + ".b2"));
}

Tensor token_position_embed(const ParamView& pv, const std::vector<int>& ids,
                            const std::string& emb_prefix, const std::string& pos_table) {
  std::vector<int> positions(ids.size());
  for (size_t i = 0; i < positions.size(); ++i) positions[i] = static_cast<int>(i);
  Tensor tok = ad::embedding(pv(emb_prefix + "tok"), ids);
  Tensor pos = ad::gather_rows(pv(emb_prefix + pos_table), positions);
  return ad::add(tok, pos);
}

// Lower-triangular additive mask (0 keep, -1e30 drop) as a constant tensor.
Tensor causal_mask(int n) {
  std::vector<double> m(static_cast<size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) m[static_cast<size_t>(i) * n + j] = -1e30;
  }
  return Tensor::from({n, n}, std::move(m));
}

}  // namespace

EncoderOutput encode_ids(const ParamView& pv, const ModelConfig& cfg,
                         const std::vector<int>& ids, Role role,
                         const std::string& enc_prefix, const std::string& emb_prefix,
                         util::Rng* drop_rng) {
  util::require(!ids.empty(), "encode: empty sequence");
  util::require(static_cast<int>(ids.size()) <= cfg.len_concat_max,
                "encode: sequence exceeds encoder maximum (" +
                    std::to_string(ids.size()) + " > " +
                    std::to_string(cfg.len_concat_max) + ")");
  for (int id : ids) {
    util::require(id != text::Vocab::kPad, "encode: embedded [PAD] inside sequence");
    util::require(id >= 0 && id < cfg.vocab_size, "encode: token id out of range");
  }

  EncoderOutput out;
  out.n = static_cast<int>(ids.size());
  if (role == Role::input) {
    int mask_pos = -1;
    for (size_t i = 0; i < ids.size(); ++i) {
      if (text::Vocab::is_mask_id(ids[i])) {
        mask_pos = static_cast<int>(i);
        break;
      }
    }
    util::require(mask_pos >= 0,
                  "encode: input has no [MASK]; prepend a pseudo-mask for questions");
    out.query_pos = mask_pos;
    out.cls_pos = 0;
  } else {
    util::require(ids[0] == text::Vocab::kCls, "encode: memory sequence must start with [CLS]");
    out.query_pos = 0;
    out.cls_pos = 0;
  }

  auto drop = [&](Tensor t) {
    if (drop_rng && cfg.dropout > 0.0) return ad::dropout(t, cfg.dropout, *drop_rng, true);
    return t;
  };
  Tensor x = drop(token_position_embed(pv, ids, emb_prefix, "pos_enc"));
  Tensor no_mask;
  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = enc_prefix + "l" + std::to_string(l);
    Tensor h = ad::layer_norm(x, pv(p + ".ln1.g"), pv(p + ".ln1.b"));
    x = ad::add(x, drop(multi_head_attention(pv, cfg, h, h, p + ".attn", no_mask)));
    Tensor h2 = ad::layer_norm(x, pv(p + ".ln2.g"), pv(p + ".ln2.b"));
    x = ad::add(x, drop(mlp_block(pv, h2, p + ".mlp")));
  }
  out.states = ad::layer_norm(x, pv(enc_prefix + "final_ln.g"), pv(enc_prefix + "final_ln.b"));
  return out;
}

EncoderOutput encode_seq(const ParamView& pv, const ModelConfig& cfg,
                         const text::TokenSeq& seq, Role role,
                         const std::string& enc_prefix, const std::string& emb_prefix,
                         util::Rng* drop_rng) {
  int role_max = role == Role::input     ? cfg.len_input
                 : role == Role::memory_key ? cfg.len_key
                                            : cfg.len_value;
  util::require(seq.effective_len() <= role_max, "encode: sequence exceeds role maximum");
  return encode_ids(pv, cfg, seq.unpadded(), role, enc_prefix, emb_prefix, drop_rng);
}

ad::Tensor decode_logits(const ParamView& pv, const ModelConfig& cfg,
                         const ad::Tensor& memory, const std::vector<int>& dec_input_ids,
                         const std::string& dec_prefix, const std::string& emb_prefix,
                         util::Rng* drop_rng) {
  util::require(!dec_input_ids.empty(), "decode: empty input");
  util::require(static_cast<int>(dec_input_ids.size()) <= cfg.len_target + 1,
                "decode: target exceeds maximum length");
  int t = static_cast<int>(dec_input_ids.size());
  auto drop = [&](Tensor ten) {
    if (drop_rng && cfg.dropout > 0.0) return ad::dropout(ten, cfg.dropout, *drop_rng, true);
    return ten;
  };
  Tensor x = drop(token_position_embed(pv, dec_input_ids, emb_prefix, "pos_dec"));
  Tensor causal = causal_mask(t);
  Tensor no_mask;
  for (int l = 0; l < cfg.layers; ++l) {
    std::string p = dec_prefix + "l" + std::to_string(l);
    Tensor h = ad::layer_norm(x, pv(p + ".ln1.g"), pv(p + ".ln1.b"));
    x = ad::add(x, drop(multi_head_attention(pv, cfg, h, h, p + ".self", causal)));
    Tensor h2 = ad::layer_norm(x, pv(p + ".ln2.g"), pv(p + ".ln2.b"));
    x = ad::add(x, drop(multi_head_attention(pv, cfg, h2, memory, p + ".cross", no_mask)));
    Tensor h3 = ad::layer_norm(x, pv(p + ".ln3.g"), pv(p + ".ln3.b"));
    x = ad::add(x, drop(mlp_block(pv, h3, p + ".mlp")));
  }
  x = ad::layer_norm(x, pv(dec_prefix + "final_ln.g"), pv(dec_prefix + "final_ln.b"));
  return ad::matmul(x, pv(dec_prefix + "out"));
}

}  // namespace qamem::nn
