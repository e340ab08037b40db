#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tfcl {

enum class LossKind { kCrossEntropy, kTripletMargin };

struct LossSpec {
  LossKind kind = LossKind::kCrossEntropy;
  double margin = 0.2;  // triplet-margin head only, must be > 0
};

struct Sample {
  std::vector<double> x;
  int label = 0;
};

// A whole training triplet for the embedding head. anchor_id/negative_id
// are the identities of the two source tracks.
struct Triplet {
  std::vector<double> anchor;
  std::vector<double> positive;
  std::vector<double> negative;
  int anchor_id = -1;
  int negative_id = -1;
};

// One stream step worth of data. Exactly one of samples/triplets is
// populated, matching the loss head in use. segment_id is hidden
// bookkeeping for evaluation; the learning path never reads it.
struct Batch {
  std::vector<Sample> samples;
  std::vector<Triplet> triplets;
  int segment_id = -1;

  std::size_t size() const { return samples.size() + triplets.size(); }
  bool empty() const { return samples.empty() && triplets.empty(); }
};

// Fully connected net with ReLU hidden layers and a linear output layer
// (logits or raw embedding). All parameters live in a single flat vector:
// for each layer the out-by-in weight matrix (row-major) followed by the
// biases, layers in order. The flat view is the canonical parameter
// ordering shared with gradients, importance weights and anchors.
class Model {
 public:
  Model() = default;
  explicit Model(std::vector<int> layer_sizes);  // all parameters zero

  // Weights uniform in [-a, a] with a = sqrt(6 / (fan_in + fan_out)),
  // biases zero.
  static Model random_init(std::vector<int> layer_sizes, std::uint64_t seed);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int num_layers() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& layer_sizes() const { return sizes_; }

  std::size_t param_count() const { return params_.size(); }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  std::vector<double> flatten() const { return params_; }
  void unflatten(std::span<const double> flat);

  std::size_t weight_offset(int layer) const { return w_off_[layer]; }
  std::size_t bias_offset(int layer) const { return b_off_[layer]; }

 private:
  std::vector<int> sizes_;
  std::vector<std::size_t> w_off_, b_off_;
  std::vector<double> params_;
};

std::vector<double> forward(const Model& m, std::span<const double> x);

// In-place vanilla SGD: params -= lr * grad.
void sgd_step(Model& m, std::span<const double> grad, double lr);

// Cached forward pass for backprop. acts[0] is the input, acts[l+1] the
// activation of layer l; pre[l] the pre-activation of layer l.
struct ForwardTrace {
  std::vector<std::vector<double>> acts;
  std::vector<std::vector<double>> pre;
};

ForwardTrace forward_trace(const Model& m, std::span<const double> x);

// Backpropagates dL/d(output) through a cached forward pass, adding the
// parameter gradient into grad_accum (length = param_count).
void backprop_output_seed(const Model& m, const ForwardTrace& trace,
                          std::span<const double> out_seed,
                          std::span<double> grad_accum);

// Per-item loss evaluation (no gradient).
double sample_loss(const Model& m, const Sample& s, const LossSpec& spec);
double triplet_loss(const Model& m, const Triplet& t, const LossSpec& spec);

// Per-item loss + gradient; the gradient is added into grad_accum.
double sample_loss_grad(const Model& m, const Sample& s, const LossSpec& spec,
                        std::span<double> grad_accum);
double triplet_loss_grad(const Model& m, const Triplet& t,
                         const LossSpec& spec, std::span<double> grad_accum);

// Adds |d(0.5*||F(x)||^2)/d theta_i| into accum, one backward pass.
void output_sensitivity_accum(const Model& m, std::span<const double> x,
                              std::span<double> accum);

// Batch-mean data loss by a plain in-order loop. Shared by the finite
// difference oracle and the loss-window bookkeeping.
double batch_data_loss(const Model& m, const Batch& batch,
                       const LossSpec& spec);

// Central-difference gradient of the batch-mean loss. Test oracle; it
// only evaluates losses and never touches the backprop path.
std::vector<double> finite_diff_grad(const Model& m, const Batch& batch,
                                     const LossSpec& spec, double eps = 1e-5);

}  // namespace tfcl
