// Copyright 2026 sxl authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sxl/model.hpp"

#include <cmath>

namespace sxl {

void ModelConfig::validate() const {
  if (num_layers < 1 || num_heads < 1 || d_model < 1 || d_inner < 1 ||
      feat_dim < 1) {
    throw ConfigError("model config: all dimensions must be >= 1");
  }
  if (d_model % num_heads != 0) {
    throw ConfigError("model config: d_model " + std::to_string(d_model) +
                      " not divisible by num_heads " +
                      std::to_string(num_heads));
  }
  if (dropout_p < 0.0 || dropout_p >= 1.0) {
    throw ConfigError("model config: dropout must be in [0, 1)");
  }
  if (!(huber_delta > 0.0)) {
    throw ConfigError("model config: huber_delta must be positive");
  }
  if (num_classes < 0) {
    throw ConfigError("model config: num_classes must be >= 0");
  }
  if (pos_encoding != "sinusoidal") {
    throw ConfigError("model config: unknown pos_encoding \"" + pos_encoding +
                      "\"");
  }
}

ModelConfig toy_model_config() {
  ModelConfig cfg;
  cfg.num_layers = 4;
  cfg.num_heads = 4;
  cfg.d_model = 64;
  cfg.d_inner = 256;
  cfg.dropout_p = 0.1;
  cfg.huber_delta = 1.0;
  return cfg;
}

ModelConfig hybrid_model_config() {
  ModelConfig cfg;
  cfg.num_layers = 6;
  cfg.num_heads = 8;
  cfg.d_model = 512;
  cfg.d_inner = 2048;
  cfg.dropout_p = 0.1;
  cfg.huber_delta = 1.0;
  return cfg;
}

ModelConfig e2e_model_config() {
  ModelConfig cfg;
  cfg.num_layers = 12;
  cfg.num_heads = 4;
  cfg.d_model = 256;
  cfg.d_inner = 2048;
  cfg.dropout_p = 0.1;
  cfg.huber_delta = 1.0;
  cfg.feat_dim = 120;  // 40-dim features stacked by 3
  return cfg;
}

template <typename T>
void ParamSet<T>::add(const std::string& name, TensorPtr<T> t) {
  if (has(name)) throw InputError("duplicate parameter name: " + name);
  names.push_back(name);
  tensors.emplace(name, std::move(t));
}

template <typename T>
const TensorPtr<T>& ParamSet<T>::at(const std::string& name) const {
  const auto it = tensors.find(name);
  if (it == tensors.end()) throw InputError("unknown parameter: " + name);
  return it->second;
}

template <typename T>
std::int64_t ParamSet<T>::total_size() const {
  std::int64_t n = 0;
  for (const auto& name : names) n += at(name)->size();
  return n;
}

template <typename T>
void ParamSet<T>::zero_grads() {
  for (const auto& name : names) at(name)->zero_grad();
}

std::vector<std::pair<std::string, std::vector<int>>> param_shape_table(
    const ModelConfig& cfg) {
  std::vector<std::pair<std::string, std::vector<int>>> table;
  table.emplace_back("input_proj.weight",
                     std::vector<int>{cfg.feat_dim, cfg.d_model});
  table.emplace_back("input_proj.bias", std::vector<int>{cfg.d_model});
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::string p = "layer" + std::to_string(l) + ".";
    for (const char* w : {"attn.wq", "attn.wk", "attn.wv", "attn.wo"}) {
      table.emplace_back(p + w, std::vector<int>{cfg.d_model, cfg.d_model});
    }
    table.emplace_back(p + "ln1.gain", std::vector<int>{cfg.d_model});
    table.emplace_back(p + "ln1.bias", std::vector<int>{cfg.d_model});
    table.emplace_back(p + "ln2.gain", std::vector<int>{cfg.d_model});
    table.emplace_back(p + "ln2.bias", std::vector<int>{cfg.d_model});
    table.emplace_back(p + "ffn.w1",
                       std::vector<int>{cfg.d_model, cfg.d_inner});
    table.emplace_back(p + "ffn.b1", std::vector<int>{cfg.d_inner});
    table.emplace_back(p + "ffn.w2",
                       std::vector<int>{cfg.d_inner, cfg.d_model});
    table.emplace_back(p + "ffn.b2", std::vector<int>{cfg.d_model});
  }
  table.emplace_back("query_seed.w", std::vector<int>{cfg.d_model});
  table.emplace_back("regress_head.weight",
                     std::vector<int>{cfg.d_model, cfg.feat_dim});
  table.emplace_back("regress_head.bias", std::vector<int>{cfg.feat_dim});
  if (cfg.num_classes > 0) {
    table.emplace_back("cls_head.weight",
                       std::vector<int>{cfg.d_model, cfg.num_classes});
    table.emplace_back("cls_head.bias", std::vector<int>{cfg.num_classes});
  }
  return table;
}

namespace {

bool is_bias_like(const std::string& name) {
  return name.ends_with(".bias") || name.ends_with(".b1") ||
         name.ends_with(".b2");
}

bool is_ln_gain(const std::string& name) {
  return name.ends_with("ln1.gain") || name.ends_with("ln2.gain");
}

// Output heads start small so that an untrained model emits near-zero
// predictions and near-uniform class posteriors.
bool is_output_head(const std::string& name) {
  return name == "regress_head.weight" || name == "cls_head.weight";
}

}  // namespace

template <typename T>
ParamSet<T> init_params(const ModelConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  ParamSet<T> params;
  params.config = cfg;
  Rng rng(Rng::derive(seed, {0x1417u}));
  for (const auto& [name, shape] : param_shape_table(cfg)) {
    std::int64_t n = 1;
    for (const int d : shape) n *= d;
    std::vector<T> data(static_cast<std::size_t>(n), T(0));
    if (is_ln_gain(name)) {
      std::fill(data.begin(), data.end(), T(1));
    } else if (!is_bias_like(name)) {
      const int fan_in = shape.size() == 2 ? shape[0] : cfg.d_model;
      const int fan_out = shape.size() == 2 ? shape[1] : cfg.d_model;
      double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      if (is_output_head(name)) limit *= 0.1;
      for (auto& v : data) {
        v = static_cast<T>(rng.uniform(-limit, limit));
      }
    }
    params.add(name, Tensor<T>::from_data(shape, std::move(data), true));
  }
  return params;
}

template <typename T>
TensorPtr<T> sinusoidal_positions(int length, int d_model) {
  auto pos = Tensor<T>::zeros({length, d_model});
  auto& d = pos->data();
  for (int t = 0; t < length; ++t) {
    for (int i = 0; i < d_model; i += 2) {
      const double angle =
          static_cast<double>(t) /
          std::pow(10000.0, static_cast<double>(i) / d_model);
      d[static_cast<std::size_t>(t) * d_model + i] =
          static_cast<T>(std::sin(angle));
      if (i + 1 < d_model) {
        d[static_cast<std::size_t>(t) * d_model + i + 1] =
            static_cast<T>(std::cos(angle));
      }
    }
  }
  return pos;
}

namespace {

template <typename T>
struct LayerParams {
  TensorPtr<T> wq, wk, wv, wo;
  TensorPtr<T> ln1_gain, ln1_bias, ln2_gain, ln2_bias;
  TensorPtr<T> w1, b1, w2, b2;
};

template <typename T>
LayerParams<T> layer_params(const ParamSet<T>& p, int l) {
  const std::string pre = "layer" + std::to_string(l) + ".";
  return {p.at(pre + "attn.wq"),   p.at(pre + "attn.wk"),
          p.at(pre + "attn.wv"),   p.at(pre + "attn.wo"),
          p.at(pre + "ln1.gain"),  p.at(pre + "ln1.bias"),
          p.at(pre + "ln2.gain"),  p.at(pre + "ln2.bias"),
          p.at(pre + "ffn.w1"),    p.at(pre + "ffn.b1"),
          p.at(pre + "ffn.w2"),    p.at(pre + "ffn.b2")};
}

constexpr double kLayerNormEps = 1e-5;

/// Multi-head attention with per-head softmax under a visibility mask.
/// queries: T_q x d; keys/values: T_k x d (already projected inputs are not
/// expected here; projection happens inside so both streams share weights).
template <typename T>
struct AttentionOut {
  TensorPtr<T> context;                   // T_q x d
  std::vector<std::vector<T>> head_probs; // post-softmax copies for analysis
};

template <typename T>
AttentionOut<T> multi_head_attention(const LayerParams<T>& lp,
                                     const TensorPtr<T>& query_in,
                                     const TensorPtr<T>& kv_in,
                                     const BoolMatrix& mask, int num_heads) {
  const int d_model = query_in->cols();
  const int d_head = d_model / num_heads;
  auto q = ops::matmul(query_in, lp.wq);
  auto k = ops::matmul(kv_in, lp.wk);
  auto v = ops::matmul(kv_in, lp.wv);
  const T inv_sqrt = static_cast<T>(1.0 / std::sqrt(static_cast<double>(d_head)));
  std::vector<TensorPtr<T>> head_ctx;
  AttentionOut<T> out;
  head_ctx.reserve(static_cast<std::size_t>(num_heads));
  for (int h = 0; h < num_heads; ++h) {
    const int c0 = h * d_head, c1 = (h + 1) * d_head;
    auto qh = ops::slice_cols(q, c0, c1);
    auto kh = ops::slice_cols(k, c0, c1);
    auto vh = ops::slice_cols(v, c0, c1);
    auto scores = ops::scale(ops::matmul(qh, ops::transpose(kh)), inv_sqrt);
    auto probs = ops::masked_softmax(scores, mask);
    out.head_probs.push_back(probs->data());
    head_ctx.push_back(ops::matmul(probs, vh));
  }
  auto ctx = num_heads == 1 ? head_ctx[0] : ops::concat_cols(head_ctx);
  out.context = ops::matmul(ctx, lp.wo);
  return out;
}

template <typename T>
TensorPtr<T> feed_forward(const LayerParams<T>& lp, const TensorPtr<T>& x) {
  auto h = ops::relu(ops::add_rowvec(ops::matmul(x, lp.w1), lp.b1));
  return ops::add_rowvec(ops::matmul(h, lp.w2), lp.b2);
}

template <typename T>
TensorPtr<T> maybe_dropout(const TensorPtr<T>& x, double p, bool train,
                           Rng* rng) {
  if (!train || p <= 0.0) return x;
  if (!rng) throw InputError("train-mode forward needs a dropout rng");
  return ops::dropout(x, p, *rng, true);
}

}  // namespace

template <typename T>
ForwardResult<T> pretrain_forward(const ParamSet<T>& params,
                                  const TensorPtr<T>& frames,
                                  const AttentionMasks& masks, bool train,
                                  Rng* dropout_rng) {
  const ModelConfig& cfg = params.config;
  const int t_len = frames->rows();
  if (frames->cols() != cfg.feat_dim) {
    throw InputError("pretrain_forward: frames dim " +
                     std::to_string(frames->cols()) + " vs model feat_dim " +
                     std::to_string(cfg.feat_dim));
  }
  if (masks.content.rows() != t_len) {
    throw InputError("pretrain_forward: masks built for T=" +
                     std::to_string(masks.content.rows()) +
                     " but sequence has T=" + std::to_string(t_len));
  }
  auto pos = sinusoidal_positions<T>(t_len, cfg.d_model);
  auto h = ops::add(
      ops::add_rowvec(ops::matmul(frames, params.at("input_proj.weight")),
                      params.at("input_proj.bias")),
      pos);
  // Query stream starts from the shared seed vector plus position only; it
  // must not carry the frame content it will be asked to predict.
  auto g = ops::add_rowvec(pos, params.at("query_seed.w"));

  ForwardResult<T> result;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto lp = layer_params(params, l);
    LayerAttention<T> att;

    auto h_norm = ops::layer_norm(h, lp.ln1_gain, lp.ln1_bias,
                                  static_cast<T>(kLayerNormEps));
    auto h_att =
        multi_head_attention(lp, h_norm, h_norm, masks.content, cfg.num_heads);
    att.content_heads = std::move(h_att.head_probs);
    auto h_mid = ops::add(
        h, maybe_dropout(h_att.context, cfg.dropout_p, train, dropout_rng));
    auto h_ff = feed_forward(
        lp, ops::layer_norm(h_mid, lp.ln2_gain, lp.ln2_bias,
                            static_cast<T>(kLayerNormEps)));
    auto h_next = ops::add(
        h_mid, maybe_dropout(h_ff, cfg.dropout_p, train, dropout_rng));

    // Query stream: queries from G, keys/values from the content stream of
    // the previous layer, same weights.
    auto g_norm = ops::layer_norm(g, lp.ln1_gain, lp.ln1_bias,
                                  static_cast<T>(kLayerNormEps));
    auto g_att =
        multi_head_attention(lp, g_norm, h_norm, masks.query, cfg.num_heads);
    att.query_heads = std::move(g_att.head_probs);
    auto g_mid = ops::add(
        g, maybe_dropout(g_att.context, cfg.dropout_p, train, dropout_rng));
    auto g_ff = feed_forward(
        lp, ops::layer_norm(g_mid, lp.ln2_gain, lp.ln2_bias,
                            static_cast<T>(kLayerNormEps)));
    auto g_next = ops::add(
        g_mid, maybe_dropout(g_ff, cfg.dropout_p, train, dropout_rng));

    h = h_next;
    g = g_next;
    result.content_states.push_back(h);
    result.query_states.push_back(g);
    result.attention.push_back(std::move(att));
  }

  auto g_targets = ops::gather_rows(g, masks.targets);
  result.output =
      ops::add_rowvec(ops::matmul(g_targets, params.at("regress_head.weight")),
                      params.at("regress_head.bias"));
  return result;
}

template <typename T>
ForwardResult<T> finetune_forward(const ParamSet<T>& params,
                                  const TensorPtr<T>& frames, bool train,
                                  Rng* dropout_rng) {
  const ModelConfig& cfg = params.config;
  if (cfg.num_classes < 1) {
    throw InputError("finetune_forward: model has no classifier head");
  }
  if (frames->cols() != cfg.feat_dim) {
    throw InputError("finetune_forward: frames dim " +
                     std::to_string(frames->cols()) + " vs model feat_dim " +
                     std::to_string(cfg.feat_dim));
  }
  const int t_len = frames->rows();
  const BoolMatrix full(t_len, t_len, true);

  auto pos = sinusoidal_positions<T>(t_len, cfg.d_model);
  auto h = ops::add(
      ops::add_rowvec(ops::matmul(frames, params.at("input_proj.weight")),
                      params.at("input_proj.bias")),
      pos);

  ForwardResult<T> result;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto lp = layer_params(params, l);
    LayerAttention<T> att;
    auto h_norm = ops::layer_norm(h, lp.ln1_gain, lp.ln1_bias,
                                  static_cast<T>(kLayerNormEps));
    auto h_att = multi_head_attention(lp, h_norm, h_norm, full, cfg.num_heads);
    att.content_heads = std::move(h_att.head_probs);
    auto h_mid = ops::add(
        h, maybe_dropout(h_att.context, cfg.dropout_p, train, dropout_rng));
    auto h_ff = feed_forward(
        lp, ops::layer_norm(h_mid, lp.ln2_gain, lp.ln2_bias,
                            static_cast<T>(kLayerNormEps)));
    h = ops::add(h_mid,
                 maybe_dropout(h_ff, cfg.dropout_p, train, dropout_rng));
    result.content_states.push_back(h);
    result.attention.push_back(std::move(att));
  }

  result.output =
      ops::add_rowvec(ops::matmul(h, params.at("cls_head.weight")),
                      params.at("cls_head.bias"));
  return result;
}

template <typename T>
TensorPtr<T> frames_to_tensor(const std::vector<float>& frames, int t, int f,
                              bool requires_grad) {
  std::vector<T> data(frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i)
    data[i] = static_cast<T>(frames[i]);
  return Tensor<T>::from_data({t, f}, std::move(data), requires_grad);
}

#define SXL_INSTANTIATE_MODEL(T)                                             \
  template struct ParamSet<T>;                                               \
  template ParamSet<T> init_params<T>(const ModelConfig&, std::uint64_t);    \
  template TensorPtr<T> sinusoidal_positions<T>(int, int);                   \
  template ForwardResult<T> pretrain_forward<T>(                             \
      const ParamSet<T>&, const TensorPtr<T>&, const AttentionMasks&, bool,  \
      Rng*);                                                                 \
  template ForwardResult<T> finetune_forward<T>(const ParamSet<T>&,          \
                                                const TensorPtr<T>&, bool,   \
                                                Rng*);                       \
  template TensorPtr<T> frames_to_tensor<T>(const std::vector<float>&, int,  \
                                            int, bool);

SXL_INSTANTIATE_MODEL(float)
SXL_INSTANTIATE_MODEL(double)

#undef SXL_INSTANTIATE_MODEL

}  // namespace sxl
