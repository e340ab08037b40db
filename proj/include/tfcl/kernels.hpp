#pragma once

#include <vector>

#include "tfcl/nn.hpp"

namespace tfcl::kernels {

struct LossGrad {
  double loss = 0.0;            // batch mean
  std::vector<double> grad;     // gradient of the mean, flat ordering
};

// Batch-level kernels, OpenMP-parallel over fixed-size item chunks.
// Each chunk accumulates serially into its own buffer and the chunk
// buffers are reduced in chunk order, so the summation order depends
// only on the batch size and never on the thread count. Results are
// therefore bit-identical across runs and thread settings.

LossGrad batch_loss_grad(const Model& m, const Batch& batch,
                         const LossSpec& spec);

// Per-item losses under the current model, in batch order.
std::vector<double> per_item_losses(const Model& m, const Batch& batch,
                                    const LossSpec& spec);

// Mean over inputs of |d(0.5*||F(x)||^2)/d theta| per parameter.
std::vector<double> mean_output_sensitivity(
    const Model& m, const std::vector<std::vector<double>>& inputs);

// Number of argmax-correct predictions over a labeled set.
std::size_t count_correct(const Model& m, const std::vector<Sample>& set);

// Plain in-order serial implementations, kept as the reference the
// parallel kernels are tested and benchmarked against.
namespace serial {

LossGrad batch_loss_grad(const Model& m, const Batch& batch,
                         const LossSpec& spec);

std::vector<double> mean_output_sensitivity(
    const Model& m, const std::vector<std::vector<double>>& inputs);

}  // namespace serial

}  // namespace tfcl::kernels
