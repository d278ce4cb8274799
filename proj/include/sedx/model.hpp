// Seasonal multi-encoder encoder-decoder network.
//
// Encoder 0 reads the most recent lags, encoder i reads the block of lags
// that precedes the point i periods back. The final states of the encoders
// (all layers) are concatenated into a context vector, projected into the
// decoder's initial state and optionally appended to every decoder input.
// Decoder step k reads the future exogenous row plus the lags synchronized
// with its target, and a shared affine head maps its top state to a scalar.
//
// A spec with seasonal_order == 0 yields the plain single-encoder variant.
#pragma once

#include "sedx/numeric.hpp"
#include "sedx/windowing.hpp"

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sedx {

struct ModelConfig {
  int hidden = 7;
  int layers = 1;
  bool feed_context = true;
  bool include_encoder0_context = true;

  bool operator==(const ModelConfig&) const = default;
};

template <typename Scalar>
struct SeasonalEncoderDecoder {
  SeasonalSpec spec;
  int exo_dim = 0;
  ModelConfig config;
  std::vector<GruStack<Scalar>> encoders;  // seasonal_order + 1 stacks
  GruStack<Scalar> decoder;
  Dense<Scalar> ctx_proj;  // context -> layers*hidden
  Dense<Scalar> head;      // hidden -> 1

  static SeasonalEncoderDecoder zeros(const SeasonalSpec& spec, int exo_dim, const ModelConfig& cfg) {
    spec.validate();
    detail::require(exo_dim >= 0, "exogenous dimension must be >= 0");
    detail::require(cfg.hidden >= 1 && cfg.layers >= 1, "hidden width and layer count must be >= 1");
    SeasonalEncoderDecoder m;
    m.spec = spec;
    m.exo_dim = exo_dim;
    m.config = cfg;
    for (int e = 0; e <= spec.seasonal_order; ++e)
      m.encoders.push_back(GruStack<Scalar>::zeros(exo_dim + 1, cfg.hidden, cfg.layers));
    m.decoder = GruStack<Scalar>::zeros(m.decoder_input_size(), cfg.hidden, cfg.layers);
    m.ctx_proj = Dense<Scalar>::zeros(m.context_size(), cfg.hidden * cfg.layers);
    m.head = Dense<Scalar>::zeros(cfg.hidden, 1);
    return m;
  }

  /// Glorot-uniform weights and zero biases from a seeded generator.
  static SeasonalEncoderDecoder random(const SeasonalSpec& spec, int exo_dim, const ModelConfig& cfg,
                                       std::uint64_t seed) {
    SeasonalEncoderDecoder m = zeros(spec, exo_dim, cfg);
    std::mt19937_64 rng(seed);
    for (auto& enc : m.encoders) enc = GruStack<Scalar>::random(exo_dim + 1, cfg.hidden, cfg.layers, rng);
    m.decoder = GruStack<Scalar>::random(m.decoder_input_size(), cfg.hidden, cfg.layers, rng);
    m.ctx_proj = Dense<Scalar>::random(m.context_size(), cfg.hidden * cfg.layers, rng);
    m.head = Dense<Scalar>::random(cfg.hidden, 1, rng);
    return m;
  }

  SeasonalEncoderDecoder zeros_like() const { return zeros(spec, exo_dim, config); }

  /// First encoder whose final states join the context.
  int first_context_encoder() const {
    return (config.include_encoder0_context || spec.seasonal_order == 0) ? 0 : 1;
  }

  Eigen::Index context_size() const {
    return static_cast<Eigen::Index>(spec.seasonal_order + 1 - first_context_encoder()) * config.layers *
           config.hidden;
  }

  Eigen::Index decoder_input_size() const {
    return decoder_input_dim(spec, exo_dim) + (config.feed_context ? context_size() : 0);
  }

  /// Flat views over every trainable tensor, in a fixed order.
  std::vector<std::span<Scalar>> tensors() {
    std::vector<std::span<Scalar>> out;
    for (auto& enc : encoders)
      for (auto t : enc.tensors()) out.push_back(t);
    for (auto t : decoder.tensors()) out.push_back(t);
    for (auto t : ctx_proj.tensors()) out.push_back(t);
    for (auto t : head.tensors()) out.push_back(t);
    return out;
  }

  std::size_t parameter_count() const {
    std::size_t n = 0;
    for (auto t : const_cast<SeasonalEncoderDecoder*>(this)->tensors()) n += t.size();
    return n;
  }

  void set_zero() {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), Scalar(0));
  }

  /// this += other, tensor by tensor.
  void accumulate(SeasonalEncoderDecoder& other) {
    auto dst = tensors();
    auto src = other.tensors();
    detail::require(dst.size() == src.size(), "accumulate: parameter layouts differ");
    for (std::size_t i = 0; i < dst.size(); ++i) {
      detail::require(dst[i].size() == src[i].size(), "accumulate: tensor size mismatch");
      for (std::size_t j = 0; j < dst[i].size(); ++j) dst[i][j] += src[i][j];
    }
  }
};

using SedxModel = SeasonalEncoderDecoder<double>;

/// Plain encoder-decoder: one encoder over the recent lags, decoder fed only
/// the future exogenous rows (and the context when configured).
template <typename Scalar = double>
SeasonalEncoderDecoder<Scalar> make_bedx(const SeasonalSpec& spec, int exo_dim, const ModelConfig& cfg,
                                         std::uint64_t seed) {
  return SeasonalEncoderDecoder<Scalar>::random(spec.without_seasonal(), exo_dim, cfg, seed);
}

template <typename Scalar>
struct ForwardPass {
  Vector<Scalar> preds;
  std::vector<StackTrace<Scalar>> encoder_traces;
  Vector<Scalar> context;
  Vector<Scalar> initial_state;  // ctx_proj(context), layers stacked
  std::vector<Vector<Scalar>> decoder_inputs;
  StackTrace<Scalar> decoder_trace;
};

template <typename Scalar>
void check_window_shape(const SeasonalEncoderDecoder<Scalar>& m, const WindowExample& w) {
  detail::require(w.encoder_inputs.size() == m.encoders.size(),
                  "window has " + std::to_string(w.encoder_inputs.size()) + " encoder sequences, model expects " +
                      std::to_string(m.encoders.size()));
  for (std::size_t e = 0; e < w.encoder_inputs.size(); ++e)
    for (const auto& v : w.encoder_inputs[e])
      detail::require(v.size() == m.exo_dim + 1, "encoder input width mismatch");
  detail::require(static_cast<int>(w.decoder_inputs.size()) == m.spec.horizon,
                  "window horizon " + std::to_string(w.decoder_inputs.size()) + " != model horizon " +
                      std::to_string(m.spec.horizon));
  for (const auto& v : w.decoder_inputs)
    detail::require(v.size() == decoder_input_dim(m.spec, m.exo_dim), "decoder input width mismatch");
}

template <typename Scalar>
ForwardPass<Scalar> forward(const SeasonalEncoderDecoder<Scalar>& m, const WindowExample& w) {
  check_window_shape(m, w);
  const Eigen::Index hidden = m.config.hidden;
  const int layers = m.config.layers;
  ForwardPass<Scalar> f;

  for (std::size_t e = 0; e < m.encoders.size(); ++e) {
    std::vector<Vector<Scalar>> in;
    in.reserve(w.encoder_inputs[e].size());
    for (const auto& v : w.encoder_inputs[e]) in.push_back(v.template cast<Scalar>());
    f.encoder_traces.push_back(stack_forward(m.encoders[e], in, zero_states(m.encoders[e])));
  }

  f.context.resize(m.context_size());
  Eigen::Index off = 0;
  for (std::size_t e = m.first_context_encoder(); e < m.encoders.size(); ++e)
    for (const auto& s : f.encoder_traces[e].final_states) {
      f.context.segment(off, hidden) = s;
      off += hidden;
    }

  f.initial_state = dense_forward(m.ctx_proj, f.context);
  std::vector<Vector<Scalar>> init;
  for (int l = 0; l < layers; ++l) init.push_back(f.initial_state.segment(l * hidden, hidden));

  const Eigen::Index base = decoder_input_dim(m.spec, m.exo_dim);
  for (const auto& v : w.decoder_inputs) {
    Vector<Scalar> in(m.decoder_input_size());
    in.head(base) = v.template cast<Scalar>();
    if (m.config.feed_context) in.tail(m.context_size()) = f.context;
    f.decoder_inputs.push_back(std::move(in));
  }
  f.decoder_trace = stack_forward(m.decoder, f.decoder_inputs, init);

  f.preds.resize(m.spec.horizon);
  for (int k = 0; k < m.spec.horizon; ++k) f.preds(k) = dense_forward(m.head, f.decoder_trace.output(k))(0);
  return f;
}

/// Accumulates d(loss)/d(params) into `grads` given d(loss)/d(preds).
template <typename Scalar>
void backward(const SeasonalEncoderDecoder<Scalar>& m, const ForwardPass<Scalar>& f, const Vector<Scalar>& d_preds,
              SeasonalEncoderDecoder<Scalar>& grads) {
  if (f.decoder_trace.steps.size() != static_cast<std::size_t>(m.spec.horizon))
    throw InternalError("backward called without a matching forward pass");
  detail::require(d_preds.size() == m.spec.horizon, "backward: gradient length != horizon");
  const Eigen::Index hidden = m.config.hidden;
  const int layers = m.config.layers;

  std::vector<Vector<Scalar>> d_top(m.spec.horizon);
  for (int k = 0; k < m.spec.horizon; ++k) {
    Vector<Scalar> d_out(1);
    d_out(0) = d_preds(k);
    d_top[k] = dense_backward(m.head, f.decoder_trace.output(k), d_out, grads.head);
  }

  const auto dec = stack_backward(m.decoder, f.decoder_trace, d_top, {}, grads.decoder);

  Vector<Scalar> d_context = Vector<Scalar>::Zero(m.context_size());
  if (m.config.feed_context)
    for (const auto& d_in : dec.d_inputs) d_context += d_in.tail(m.context_size());

  Vector<Scalar> d_init(layers * hidden);
  for (int l = 0; l < layers; ++l) d_init.segment(l * hidden, hidden) = dec.d_initial[l];
  d_context += dense_backward(m.ctx_proj, f.context, d_init, grads.ctx_proj);

  Eigen::Index off = 0;
  for (std::size_t e = m.first_context_encoder(); e < m.encoders.size(); ++e) {
    std::vector<Vector<Scalar>> d_final;
    for (int l = 0; l < layers; ++l) {
      d_final.push_back(d_context.segment(off, hidden));
      off += hidden;
    }
    stack_backward(m.encoders[e], f.encoder_traces[e], {}, d_final, grads.encoders[e]);
  }
}

/// One-shot multi-step forecast from anchor t. Future exogenous rows must be present.
template <typename Scalar>
Vector<Scalar> predict_multi_step(const SeasonalEncoderDecoder<Scalar>& m, const TimeSeries& ts, int t) {
  detail::require(ts.exo_dim() == m.exo_dim, "series exogenous dimension differs from the model's");
  return forward(m, assemble_forecast_window(ts, m.spec, t)).preds;
}

}  // namespace sedx
