#include "tfcl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace tfcl {

namespace {

void check_layer_sizes(const std::vector<int>& sizes) {
  if (sizes.size() < 2) {
    throw std::invalid_argument("model needs at least an input and an output layer");
  }
  for (int s : sizes) {
    if (s <= 0) throw std::invalid_argument("layer sizes must be positive");
  }
}

}  // namespace

Model::Model(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  check_layer_sizes(sizes_);
  std::size_t off = 0;
  for (int l = 0; l < num_layers(); ++l) {
    const std::size_t in = static_cast<std::size_t>(sizes_[l]);
    const std::size_t out = static_cast<std::size_t>(sizes_[l + 1]);
    w_off_.push_back(off);
    off += in * out;
    b_off_.push_back(off);
    off += out;
  }
  params_.assign(off, 0.0);
}

Model Model::random_init(std::vector<int> layer_sizes, std::uint64_t seed) {
  Model m(std::move(layer_sizes));
  std::mt19937_64 rng(seed);
  for (int l = 0; l < m.num_layers(); ++l) {
    const int in = m.sizes_[l];
    const int out = m.sizes_[l + 1];
    const double a = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-a, a);
    double* w = m.params_.data() + m.w_off_[l];
    for (int i = 0; i < in * out; ++i) w[i] = dist(rng);
    // biases stay zero
  }
  return m;
}

void Model::unflatten(std::span<const double> flat) {
  if (flat.size() != params_.size()) {
    throw std::invalid_argument("flat parameter vector has wrong length");
  }
  std::copy(flat.begin(), flat.end(), params_.begin());
}

std::vector<double> forward(const Model& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  std::vector<double> act(x.begin(), x.end());
  std::vector<double> next;
  const int L = m.num_layers();
  for (int l = 0; l < L; ++l) {
    const int in = m.layer_sizes()[l];
    const int out = m.layer_sizes()[l + 1];
    const double* w = m.params().data() + m.weight_offset(l);
    const double* b = m.params().data() + m.bias_offset(l);
    next.assign(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * act[i];
      next[o] = (l < L - 1) ? std::max(0.0, z) : z;
    }
    act.swap(next);
  }
  return act;
}

void sgd_step(Model& m, std::span<const double> grad, double lr) {
  if (grad.size() != m.param_count()) {
    throw std::invalid_argument("gradient length does not match parameter count");
  }
  if (!(lr > 0.0)) {
    throw std::invalid_argument("learning rate must be positive");
  }
  double* p = m.params().data();
  for (std::size_t i = 0; i < grad.size(); ++i) p[i] -= lr * grad[i];
}

ForwardTrace forward_trace(const Model& m, std::span<const double> x) {
  if (static_cast<int>(x.size()) != m.input_dim()) {
    throw std::invalid_argument("input dimension mismatch");
  }
  const int L = m.num_layers();
  ForwardTrace t;
  t.acts.resize(L + 1);
  t.pre.resize(L);
  t.acts[0].assign(x.begin(), x.end());
  for (int l = 0; l < L; ++l) {
    const int in = m.layer_sizes()[l];
    const int out = m.layer_sizes()[l + 1];
    const double* w = m.params().data() + m.weight_offset(l);
    const double* b = m.params().data() + m.bias_offset(l);
    t.pre[l].assign(out, 0.0);
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* row = w + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += row[i] * t.acts[l][i];
      t.pre[l][o] = z;
    }
    t.acts[l + 1].resize(out);
    for (int o = 0; o < out; ++o) {
      t.acts[l + 1][o] = (l < L - 1) ? std::max(0.0, t.pre[l][o]) : t.pre[l][o];
    }
  }
  return t;
}

void backprop_output_seed(const Model& m, const ForwardTrace& trace,
                          std::span<const double> out_seed,
                          std::span<double> grad_accum) {
  const int L = m.num_layers();
  if (static_cast<int>(out_seed.size()) != m.output_dim()) {
    throw std::invalid_argument("output seed dimension mismatch");
  }
  if (grad_accum.size() != m.param_count()) {
    throw std::invalid_argument("gradient buffer has wrong length");
  }
  std::vector<double> delta(out_seed.begin(), out_seed.end());
  std::vector<double> prev;
  for (int l = L - 1; l >= 0; --l) {
    const int in = m.layer_sizes()[l];
    const int out = m.layer_sizes()[l + 1];
    const double* w = m.params().data() + m.weight_offset(l);
    double* gw = grad_accum.data() + m.weight_offset(l);
    double* gb = grad_accum.data() + m.bias_offset(l);
    const std::vector<double>& a = trace.acts[l];
    for (int o = 0; o < out; ++o) {
      double* grow = gw + static_cast<std::size_t>(o) * in;
      const double d = delta[o];
      for (int i = 0; i < in; ++i) grow[i] += d * a[i];
      gb[o] += d;
    }
    if (l > 0) {
      prev.assign(in, 0.0);
      for (int o = 0; o < out; ++o) {
        const double* row = w + static_cast<std::size_t>(o) * in;
        const double d = delta[o];
        for (int i = 0; i < in; ++i) prev[i] += row[i] * d;
      }
      // ReLU derivative of the hidden layer feeding this one
      const std::vector<double>& z = trace.pre[l - 1];
      for (int i = 0; i < in; ++i) {
        if (z[i] <= 0.0) prev[i] = 0.0;
      }
      delta.swap(prev);
    }
  }
}

namespace {

// Stable softmax cross-entropy pieces on the output activation.
double log_sum_exp(const std::vector<double>& z) {
  double m = z[0];
  for (double v : z) m = std::max(m, v);
  double s = 0.0;
  for (double v : z) s += std::exp(v - m);
  return m + std::log(s);
}

void check_label(const Model& m, int label) {
  if (label < 0 || label >= m.output_dim()) {
    throw std::invalid_argument("label " + std::to_string(label) +
                                " out of range for output dim " +
                                std::to_string(m.output_dim()));
  }
}

double squared_distance(const std::vector<double>& a,
                        const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

double sample_loss(const Model& m, const Sample& s, const LossSpec& spec) {
  if (spec.kind != LossKind::kCrossEntropy) {
    throw std::invalid_argument("sample loss requires the cross-entropy head");
  }
  check_label(m, s.label);
  std::vector<double> z = forward(m, s.x);
  return log_sum_exp(z) - z[s.label];
}

double triplet_loss(const Model& m, const Triplet& t, const LossSpec& spec) {
  if (spec.kind != LossKind::kTripletMargin) {
    throw std::invalid_argument("triplet loss requires the triplet-margin head");
  }
  if (!(spec.margin > 0.0)) {
    throw std::invalid_argument("triplet margin must be positive");
  }
  std::vector<double> ea = forward(m, t.anchor);
  std::vector<double> ep = forward(m, t.positive);
  std::vector<double> en = forward(m, t.negative);
  const double a = spec.margin + squared_distance(ea, ep) - squared_distance(ea, en);
  return std::max(0.0, a);
}

double sample_loss_grad(const Model& m, const Sample& s, const LossSpec& spec,
                        std::span<double> grad_accum) {
  if (spec.kind != LossKind::kCrossEntropy) {
    throw std::invalid_argument("sample loss requires the cross-entropy head");
  }
  check_label(m, s.label);
  ForwardTrace trace = forward_trace(m, s.x);
  const std::vector<double>& z = trace.acts.back();
  const double lse = log_sum_exp(z);
  std::vector<double> seed(z.size());
  for (std::size_t o = 0; o < z.size(); ++o) seed[o] = std::exp(z[o] - lse);
  seed[s.label] -= 1.0;
  backprop_output_seed(m, trace, seed, grad_accum);
  return lse - z[s.label];
}

double triplet_loss_grad(const Model& m, const Triplet& t,
                         const LossSpec& spec, std::span<double> grad_accum) {
  if (spec.kind != LossKind::kTripletMargin) {
    throw std::invalid_argument("triplet loss requires the triplet-margin head");
  }
  if (!(spec.margin > 0.0)) {
    throw std::invalid_argument("triplet margin must be positive");
  }
  ForwardTrace ta = forward_trace(m, t.anchor);
  ForwardTrace tp = forward_trace(m, t.positive);
  ForwardTrace tn = forward_trace(m, t.negative);
  const std::vector<double>& ea = ta.acts.back();
  const std::vector<double>& ep = tp.acts.back();
  const std::vector<double>& en = tn.acts.back();
  const double act = spec.margin + squared_distance(ea, ep) - squared_distance(ea, en);
  if (act <= 0.0) return 0.0;
  const std::size_t d = ea.size();
  std::vector<double> sa(d), sp(d), sn(d);
  for (std::size_t i = 0; i < d; ++i) {
    sa[i] = 2.0 * (en[i] - ep[i]);   // d/d ea of (||ea-ep||^2 - ||ea-en||^2)
    sp[i] = -2.0 * (ea[i] - ep[i]);
    sn[i] = 2.0 * (ea[i] - en[i]);
  }
  backprop_output_seed(m, ta, sa, grad_accum);
  backprop_output_seed(m, tp, sp, grad_accum);
  backprop_output_seed(m, tn, sn, grad_accum);
  return act;
}

void output_sensitivity_accum(const Model& m, std::span<const double> x,
                              std::span<double> accum) {
  ForwardTrace trace = forward_trace(m, x);
  std::vector<double> g(m.param_count(), 0.0);
  // d(0.5*||F||^2)/d z_out = F itself
  backprop_output_seed(m, trace, trace.acts.back(), g);
  for (std::size_t i = 0; i < g.size(); ++i) accum[i] += std::abs(g[i]);
}

double batch_data_loss(const Model& m, const Batch& batch,
                       const LossSpec& spec) {
  double total = 0.0;
  std::size_t n = 0;
  if (spec.kind == LossKind::kCrossEntropy) {
    for (const Sample& s : batch.samples) {
      total += sample_loss(m, s, spec);
      ++n;
    }
  } else {
    for (const Triplet& t : batch.triplets) {
      total += triplet_loss(m, t, spec);
      ++n;
    }
  }
  if (n == 0) throw std::invalid_argument("empty batch");
  return total / static_cast<double>(n);
}

std::vector<double> finite_diff_grad(const Model& m, const Batch& batch,
                                     const LossSpec& spec, double eps) {
  if (!(eps >= 1e-8 && eps <= 1e-3)) {
    throw std::invalid_argument("finite difference step outside [1e-8, 1e-3]");
  }
  Model probe = m;
  std::vector<double> grad(m.param_count(), 0.0);
  std::span<double> p = probe.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + eps;
    const double up = batch_data_loss(probe, batch, spec);
    p[i] = saved - eps;
    const double down = batch_data_loss(probe, batch, spec);
    p[i] = saved;
    grad[i] = (up - down) / (2.0 * eps);
  }
  return grad;
}

}  // namespace tfcl
