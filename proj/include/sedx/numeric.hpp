// Dense numeric substrate: GRU cells and stacks with exact BPTT, affine
// layers, squared-error loss and RMSProp. Everything is templated on the
// scalar type; the rest of the library instantiates it with double.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sedx {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using MatrixXr = Matrix<double>;
using VectorXr = Vector<double>;

/// Raised when tensor shapes or model/window configurations disagree.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised for broken internal invariants (e.g. backward without a forward cache).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

template <typename Derived>
void glorot_uniform(Eigen::MatrixBase<Derived>& m, std::mt19937_64& rng) {
  using Scalar = typename Derived::Scalar;
  const double fan = static_cast<double>(m.rows() + m.cols());
  const double limit = fan > 0 ? std::sqrt(6.0 / fan) : 0.0;
  std::uniform_real_distribution<double> dist(-limit, limit);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<Scalar>(dist(rng));
}

template <typename Scalar>
std::span<Scalar> as_span(Matrix<Scalar>& m) {
  return {m.data(), static_cast<std::size_t>(m.size())};
}

template <typename Scalar>
std::span<Scalar> as_span(Vector<Scalar>& v) {
  return {v.data(), static_cast<std::size_t>(v.size())};
}

}  // namespace detail

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return x.unaryExpr([](Scalar v) { return Scalar(1) / (Scalar(1) + std::exp(-v)); });
}

// ---------------------------------------------------------------------------
// GRU cell

/// Weights of one GRU layer. Input maps are hidden x input, recurrent maps
/// hidden x hidden.
template <typename Scalar>
struct GruCell {
  Matrix<Scalar> Wz, Wr, W;
  Matrix<Scalar> Uz, Ur, U;
  Vector<Scalar> bz, br, b;

  static GruCell zeros(Eigen::Index input, Eigen::Index hidden) {
    GruCell c;
    for (auto* m : {&c.Wz, &c.Wr, &c.W}) *m = Matrix<Scalar>::Zero(hidden, input);
    for (auto* m : {&c.Uz, &c.Ur, &c.U}) *m = Matrix<Scalar>::Zero(hidden, hidden);
    for (auto* v : {&c.bz, &c.br, &c.b}) *v = Vector<Scalar>::Zero(hidden);
    return c;
  }

  /// Glorot-uniform weights, zero biases.
  static GruCell random(Eigen::Index input, Eigen::Index hidden, std::mt19937_64& rng) {
    GruCell c = zeros(input, hidden);
    for (auto* m : {&c.Wz, &c.Wr, &c.W, &c.Uz, &c.Ur, &c.U}) detail::glorot_uniform(*m, rng);
    return c;
  }

  Eigen::Index input_size() const { return Wz.cols(); }
  Eigen::Index hidden_size() const { return Wz.rows(); }

  void validate() const {
    const auto h = hidden_size();
    const auto in = input_size();
    detail::require(Wr.rows() == h && W.rows() == h && Wr.cols() == in && W.cols() == in,
                    "GRU input weights disagree on shape");
    for (const auto* m : {&Uz, &Ur, &U})
      detail::require(m->rows() == h && m->cols() == h, "GRU recurrent weights must be hidden x hidden");
    for (const auto* v : {&bz, &br, &b}) detail::require(v->size() == h, "GRU bias length != hidden");
  }

  std::vector<std::span<Scalar>> tensors() {
    return {detail::as_span(Wz), detail::as_span(Wr), detail::as_span(W),
            detail::as_span(Uz), detail::as_span(Ur), detail::as_span(U),
            detail::as_span(bz), detail::as_span(br), detail::as_span(b)};
  }
};

/// Everything one GRU step needs to be differentiated.
template <typename Scalar>
struct GruActivations {
  Vector<Scalar> u;       // input
  Vector<Scalar> h_prev;  // incoming state
  Vector<Scalar> z;       // update gate
  Vector<Scalar> r;       // reset gate
  Vector<Scalar> Uh;      // U * h_prev, before the reset gate is applied
  Vector<Scalar> cand;    // candidate state
  Vector<Scalar> h;       // outgoing state
};

/// One GRU step:
///   z = sigmoid(Wz u + Uz h + bz), r = sigmoid(Wr u + Ur h + br),
///   cand = tanh(r * (U h) + W u + b), h' = z * h + (1 - z) * cand.
template <typename Scalar>
GruActivations<Scalar> gru_step(const GruCell<Scalar>& p, const Vector<Scalar>& h_prev,
                                const Vector<Scalar>& u) {
  detail::require(h_prev.size() == p.hidden_size(), "gru_step: state size mismatch");
  detail::require(u.size() == p.input_size(), "gru_step: input size mismatch");
  GruActivations<Scalar> a;
  a.u = u;
  a.h_prev = h_prev;
  a.z = sigmoid((p.Wz * u + p.Uz * h_prev + p.bz).eval());
  a.r = sigmoid((p.Wr * u + p.Ur * h_prev + p.br).eval());
  a.Uh = p.U * h_prev;
  a.cand = (a.r.cwiseProduct(a.Uh) + p.W * u + p.b).array().tanh().matrix();
  a.h = a.z.cwiseProduct(h_prev) + (Vector<Scalar>::Ones(a.z.size()) - a.z).cwiseProduct(a.cand);
  return a;
}

template <typename Scalar>
struct GruStepGrad {
  Vector<Scalar> d_input;
  Vector<Scalar> d_h_prev;
};

/// Accumulates parameter gradients into `grads` and returns input/state gradients.
template <typename Scalar>
GruStepGrad<Scalar> gru_step_backward(const GruCell<Scalar>& p, const GruActivations<Scalar>& a,
                                      const Vector<Scalar>& d_h, GruCell<Scalar>& grads) {
  const auto ones = Vector<Scalar>::Ones(a.z.size());
  const Vector<Scalar> dz = d_h.cwiseProduct(a.h_prev - a.cand);
  const Vector<Scalar> dcand = d_h.cwiseProduct(ones - a.z);

  const Vector<Scalar> dcand_pre = dcand.cwiseProduct(ones - a.cand.cwiseAbs2());
  const Vector<Scalar> dr = dcand_pre.cwiseProduct(a.Uh);
  const Vector<Scalar> dUh = dcand_pre.cwiseProduct(a.r);
  const Vector<Scalar> dz_pre = dz.cwiseProduct(a.z.cwiseProduct(ones - a.z));
  const Vector<Scalar> dr_pre = dr.cwiseProduct(a.r.cwiseProduct(ones - a.r));

  grads.W.noalias() += dcand_pre * a.u.transpose();
  grads.U.noalias() += dUh * a.h_prev.transpose();
  grads.b += dcand_pre;
  grads.Wz.noalias() += dz_pre * a.u.transpose();
  grads.Uz.noalias() += dz_pre * a.h_prev.transpose();
  grads.bz += dz_pre;
  grads.Wr.noalias() += dr_pre * a.u.transpose();
  grads.Ur.noalias() += dr_pre * a.h_prev.transpose();
  grads.br += dr_pre;

  GruStepGrad<Scalar> out;
  out.d_input = p.W.transpose() * dcand_pre + p.Wz.transpose() * dz_pre + p.Wr.transpose() * dr_pre;
  out.d_h_prev = d_h.cwiseProduct(a.z) + p.U.transpose() * dUh + p.Uz.transpose() * dz_pre +
                 p.Ur.transpose() * dr_pre;
  return out;
}

// ---------------------------------------------------------------------------
// Stacked GRU over a sequence

/// Layers of GRU cells; layer l+1 consumes layer l's state at the same step.
template <typename Scalar>
struct GruStack {
  std::vector<GruCell<Scalar>> layers;

  static GruStack zeros(Eigen::Index input, Eigen::Index hidden, int depth) {
    GruStack s;
    for (int l = 0; l < depth; ++l) s.layers.push_back(GruCell<Scalar>::zeros(l == 0 ? input : hidden, hidden));
    return s;
  }

  static GruStack random(Eigen::Index input, Eigen::Index hidden, int depth, std::mt19937_64& rng) {
    GruStack s;
    for (int l = 0; l < depth; ++l)
      s.layers.push_back(GruCell<Scalar>::random(l == 0 ? input : hidden, hidden, rng));
    return s;
  }

  int depth() const { return static_cast<int>(layers.size()); }
  Eigen::Index input_size() const { return layers.front().input_size(); }
  Eigen::Index hidden_size() const { return layers.front().hidden_size(); }

  GruStack zeros_like() const {
    GruStack s;
    for (const auto& c : layers) s.layers.push_back(GruCell<Scalar>::zeros(c.input_size(), c.hidden_size()));
    return s;
  }

  std::vector<std::span<Scalar>> tensors() {
    std::vector<std::span<Scalar>> out;
    for (auto& c : layers)
      for (auto t : c.tensors()) out.push_back(t);
    return out;
  }
};

template <typename Scalar>
struct StackTrace {
  std::vector<std::vector<GruActivations<Scalar>>> steps;  // [time][layer]
  std::vector<Vector<Scalar>> final_states;                // [layer]

  const Vector<Scalar>& output(std::size_t t) const { return steps[t].back().h; }
};

/// Runs the stack over `inputs` starting from `initial` (one state per layer).
template <typename Scalar>
StackTrace<Scalar> stack_forward(const GruStack<Scalar>& stack, const std::vector<Vector<Scalar>>& inputs,
                                 const std::vector<Vector<Scalar>>& initial) {
  detail::require(static_cast<int>(initial.size()) == stack.depth(), "stack_forward: one initial state per layer");
  StackTrace<Scalar> trace;
  trace.final_states = initial;
  trace.steps.reserve(inputs.size());
  for (const auto& u : inputs) {
    std::vector<GruActivations<Scalar>> per_layer;
    per_layer.reserve(stack.layers.size());
    const Vector<Scalar>* in = &u;
    for (std::size_t l = 0; l < stack.layers.size(); ++l) {
      per_layer.push_back(gru_step(stack.layers[l], trace.final_states[l], *in));
      trace.final_states[l] = per_layer.back().h;
      in = &per_layer.back().h;
    }
    trace.steps.push_back(std::move(per_layer));
  }
  return trace;
}

template <typename Scalar>
std::vector<Vector<Scalar>> zero_states(const GruStack<Scalar>& stack) {
  return std::vector<Vector<Scalar>>(stack.layers.size(), Vector<Scalar>::Zero(stack.hidden_size()));
}

template <typename Scalar>
struct StackGrad {
  std::vector<Vector<Scalar>> d_inputs;   // [time]
  std::vector<Vector<Scalar>> d_initial;  // [layer]
};

/// BPTT through a stacked run. `d_outputs` holds gradients on the top-layer
/// state at each step (empty means zero); `d_final` holds gradients on the
/// final state of each layer (empty means zero).
template <typename Scalar>
StackGrad<Scalar> stack_backward(const GruStack<Scalar>& stack, const StackTrace<Scalar>& trace,
                                 const std::vector<Vector<Scalar>>& d_outputs,
                                 const std::vector<Vector<Scalar>>& d_final, GruStack<Scalar>& grads) {
  const auto depth = stack.layers.size();
  const auto hidden = stack.hidden_size();
  if (!trace.steps.empty() && trace.steps.front().size() != depth)
    throw InternalError("stack_backward: trace does not match stack depth");
  detail::require(d_outputs.empty() || d_outputs.size() == trace.steps.size(),
                  "stack_backward: one output gradient per step");
  detail::require(d_final.empty() || d_final.size() == depth, "stack_backward: one final gradient per layer");

  std::vector<Vector<Scalar>> d_state(depth, Vector<Scalar>::Zero(hidden));
  if (!d_final.empty()) d_state = d_final;

  StackGrad<Scalar> out;
  out.d_inputs.resize(trace.steps.size());
  for (std::size_t t = trace.steps.size(); t-- > 0;) {
    if (!d_outputs.empty()) d_state.back() += d_outputs[t];
    for (std::size_t l = depth; l-- > 0;) {
      auto g = gru_step_backward(stack.layers[l], trace.steps[t][l], d_state[l], grads.layers[l]);
      d_state[l] = std::move(g.d_h_prev);
      if (l > 0)
        d_state[l - 1] += g.d_input;
      else
        out.d_inputs[t] = std::move(g.d_input);
    }
  }
  out.d_initial = std::move(d_state);
  return out;
}

// ---------------------------------------------------------------------------
// Affine layer

template <typename Scalar>
struct Dense {
  Matrix<Scalar> W;  // out x in
  Vector<Scalar> b;

  static Dense zeros(Eigen::Index in, Eigen::Index out) {
    return {Matrix<Scalar>::Zero(out, in), Vector<Scalar>::Zero(out)};
  }

  static Dense random(Eigen::Index in, Eigen::Index out, std::mt19937_64& rng) {
    Dense d = zeros(in, out);
    detail::glorot_uniform(d.W, rng);
    return d;
  }

  Eigen::Index input_size() const { return W.cols(); }
  Eigen::Index output_size() const { return W.rows(); }

  std::vector<std::span<Scalar>> tensors() { return {detail::as_span(W), detail::as_span(b)}; }
};

template <typename Scalar>
Vector<Scalar> dense_forward(const Dense<Scalar>& p, const Vector<Scalar>& v) {
  detail::require(v.size() == p.input_size(), "dense_forward: input size mismatch");
  detail::require(p.b.size() == p.output_size(), "dense_forward: bias size mismatch");
  return p.W * v + p.b;
}

/// Accumulates into `grads`, returns the gradient on the input.
template <typename Scalar>
Vector<Scalar> dense_backward(const Dense<Scalar>& p, const Vector<Scalar>& v, const Vector<Scalar>& d_out,
                              Dense<Scalar>& grads) {
  grads.W.noalias() += d_out * v.transpose();
  grads.b += d_out;
  return p.W.transpose() * d_out;
}

// ---------------------------------------------------------------------------
// Loss and optimizer

template <typename Scalar>
struct LossAndGrad {
  Scalar loss;
  Vector<Scalar> grad;
};

/// Mean squared error and its gradient with respect to `preds`.
template <typename Scalar>
LossAndGrad<Scalar> mse_loss(const Vector<Scalar>& preds, const Vector<Scalar>& targets) {
  detail::require(preds.size() == targets.size() && preds.size() > 0, "mse_loss: length mismatch");
  const Vector<Scalar> diff = preds - targets;
  const Scalar n = static_cast<Scalar>(preds.size());
  return {diff.squaredNorm() / n, (Scalar(2) / n) * diff};
}

/// RMSProp: acc = rho*acc + (1-rho)*g^2; theta -= lr * g / sqrt(acc + eps).
template <typename Scalar>
class RmsProp {
 public:
  RmsProp(Scalar learning_rate, Scalar rho = Scalar(0.9), Scalar eps = Scalar(1e-8))
      : lr_(learning_rate), rho_(rho), eps_(eps) {
    detail::require(learning_rate >= 0, "RMSProp learning rate must be non-negative");
    detail::require(rho > 0 && rho < 1, "RMSProp decay must lie in (0,1)");
    detail::require(eps > 0, "RMSProp epsilon must be positive");
  }

  void step(const std::vector<std::span<Scalar>>& params, const std::vector<std::span<Scalar>>& grads) {
    detail::require(params.size() == grads.size(), "rmsprop: tensor count mismatch");
    if (acc_.empty())
      for (const auto& p : params) acc_.push_back(Eigen::Array<Scalar, Eigen::Dynamic, 1>::Zero(p.size()));
    detail::require(acc_.size() == params.size(), "rmsprop: tensor count changed between steps");
    for (std::size_t i = 0; i < params.size(); ++i) {
      detail::require(params[i].size() == grads[i].size() && params[i].size() == static_cast<std::size_t>(acc_[i].size()),
                      "rmsprop: shape mismatch in tensor " + std::to_string(i));
      Eigen::Map<Eigen::Array<Scalar, Eigen::Dynamic, 1>> theta(params[i].data(), params[i].size());
      Eigen::Map<const Eigen::Array<Scalar, Eigen::Dynamic, 1>> g(grads[i].data(), grads[i].size());
      acc_[i] = rho_ * acc_[i] + (Scalar(1) - rho_) * g.square();
      theta -= lr_ * g / (acc_[i] + eps_).sqrt();
    }
  }

  const std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>>& accumulators() const { return acc_; }
  Scalar learning_rate() const { return lr_; }

 private:
  Scalar lr_, rho_, eps_;
  std::vector<Eigen::Array<Scalar, Eigen::Dynamic, 1>> acc_;
};

}  // namespace sedx
