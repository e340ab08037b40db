#include "tfcl/kernels.hpp"

#include <algorithm>
#include <cstddef>
#include <stdexcept>

namespace tfcl::kernels {

namespace {

constexpr std::size_t kChunkItems = 16;
// Chunk-buffer budget: keeps n_chunks * param_count bounded for large
// batches while leaving the grouping a function of the sizes alone.
constexpr std::size_t kMaxChunkDoubles = 8u << 20;

std::size_t item_count(const Batch& batch, const LossSpec& spec) {
  return spec.kind == LossKind::kCrossEntropy ? batch.samples.size()
                                              : batch.triplets.size();
}

double item_loss_grad(const Model& m, const Batch& batch, const LossSpec& spec,
                      std::size_t idx, std::span<double> grad) {
  return spec.kind == LossKind::kCrossEntropy
             ? sample_loss_grad(m, batch.samples[idx], spec, grad)
             : triplet_loss_grad(m, batch.triplets[idx], spec, grad);
}

std::size_t chunk_count(std::size_t n, std::size_t param_count) {
  std::size_t by_items = (n + kChunkItems - 1) / kChunkItems;
  std::size_t by_mem = std::max<std::size_t>(1, kMaxChunkDoubles / std::max<std::size_t>(1, param_count));
  return std::max<std::size_t>(1, std::min({by_items, by_mem, std::size_t{256}}));
}

}  // namespace

LossGrad batch_loss_grad(const Model& m, const Batch& batch,
                         const LossSpec& spec) {
  const std::size_t n = item_count(batch, spec);
  if (n == 0) throw std::invalid_argument("empty batch");
  const std::size_t P = m.param_count();
  const std::size_t nc = chunk_count(n, P);
  const std::size_t per = (n + nc - 1) / nc;

  std::vector<double> chunk_grad(nc * P, 0.0);
  std::vector<double> chunk_loss(nc, 0.0);

#pragma omp parallel for schedule(static)
  for (long c = 0; c < static_cast<long>(nc); ++c) {
    std::span<double> g(chunk_grad.data() + static_cast<std::size_t>(c) * P, P);
    const std::size_t lo = static_cast<std::size_t>(c) * per;
    const std::size_t hi = std::min(n, lo + per);
    double loss = 0.0;
    for (std::size_t i = lo; i < hi; ++i) {
      loss += item_loss_grad(m, batch, spec, i, g);
    }
    chunk_loss[static_cast<std::size_t>(c)] = loss;
  }

  LossGrad out;
  out.grad.assign(P, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    out.loss += chunk_loss[c];
    const double* g = chunk_grad.data() + c * P;
    for (std::size_t i = 0; i < P; ++i) out.grad[i] += g[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss *= inv;
  for (double& v : out.grad) v *= inv;
  return out;
}

std::vector<double> per_item_losses(const Model& m, const Batch& batch,
                                    const LossSpec& spec) {
  const std::size_t n = item_count(batch, spec);
  std::vector<double> losses(n, 0.0);
#pragma omp parallel for schedule(static)
  for (long i = 0; i < static_cast<long>(n); ++i) {
    const std::size_t k = static_cast<std::size_t>(i);
    losses[k] = spec.kind == LossKind::kCrossEntropy
                    ? sample_loss(m, batch.samples[k], spec)
                    : triplet_loss(m, batch.triplets[k], spec);
  }
  return losses;
}

std::vector<double> mean_output_sensitivity(
    const Model& m, const std::vector<std::vector<double>>& inputs) {
  const std::size_t n = inputs.size();
  if (n == 0) throw std::invalid_argument("empty sample set");
  const std::size_t P = m.param_count();
  const std::size_t nc = chunk_count(n, P);
  const std::size_t per = (n + nc - 1) / nc;

  std::vector<double> chunk_acc(nc * P, 0.0);

#pragma omp parallel for schedule(static)
  for (long c = 0; c < static_cast<long>(nc); ++c) {
    std::span<double> acc(chunk_acc.data() + static_cast<std::size_t>(c) * P, P);
    const std::size_t lo = static_cast<std::size_t>(c) * per;
    const std::size_t hi = std::min(n, lo + per);
    for (std::size_t i = lo; i < hi; ++i) {
      output_sensitivity_accum(m, inputs[i], acc);
    }
  }

  std::vector<double> mean(P, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    const double* acc = chunk_acc.data() + c * P;
    for (std::size_t i = 0; i < P; ++i) mean[i] += acc[i];
  }
  const double inv = 1.0 / static_cast<double>(n);
  for (double& v : mean) v *= inv;
  return mean;
}

std::size_t count_correct(const Model& m, const std::vector<Sample>& set) {
  long correct = 0;
#pragma omp parallel for schedule(static) reduction(+ : correct)
  for (long i = 0; i < static_cast<long>(set.size()); ++i) {
    const Sample& s = set[static_cast<std::size_t>(i)];
    const std::vector<double> z = forward(m, s.x);
    const int pred = static_cast<int>(
        std::max_element(z.begin(), z.end()) - z.begin());
    if (pred == s.label) ++correct;
  }
  return static_cast<std::size_t>(correct);
}

namespace serial {

LossGrad batch_loss_grad(const Model& m, const Batch& batch,
                         const LossSpec& spec) {
  const std::size_t n = item_count(batch, spec);
  if (n == 0) throw std::invalid_argument("empty batch");
  LossGrad out;
  out.grad.assign(m.param_count(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out.loss += item_loss_grad(m, batch, spec, i, out.grad);
  }
  const double inv = 1.0 / static_cast<double>(n);
  out.loss *= inv;
  for (double& v : out.grad) v *= inv;
  return out;
}

std::vector<double> mean_output_sensitivity(
    const Model& m, const std::vector<std::vector<double>>& inputs) {
  if (inputs.empty()) throw std::invalid_argument("empty sample set");
  std::vector<double> acc(m.param_count(), 0.0);
  for (const std::vector<double>& x : inputs) {
    output_sensitivity_accum(m, x, acc);
  }
  const double inv = 1.0 / static_cast<double>(inputs.size());
  for (double& v : acc) v *= inv;
  return acc;
}

}  // namespace serial

}  // namespace tfcl::kernels
