#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tfcl/nn.hpp"

namespace tfcl {

enum class OmegaMode { kCumulativeAverage, kDecaying };

// Per-parameter importance weights plus the anchor snapshot they protect.
// omega and anchor share the model's flat parameter ordering.
struct ImportanceState {
  std::vector<double> omega;
  std::vector<double> anchor;
  std::uint64_t update_count = 0;
  OmegaMode mode = OmegaMode::kCumulativeAverage;
  double lambda = 0.0;

  static ImportanceState init(const Model& m, OmegaMode mode, double lambda);
};

// |d(0.5*||F(x)||^2)/d theta_i| per parameter, one backward pass.
std::vector<double> output_sensitivity(const Model& m,
                                       std::span<const double> x);

// Component-wise mean of output_sensitivity over the given inputs.
// Throws on an empty sample set.
std::vector<double> estimate_raw_importance(
    const Model& m, const std::vector<std::vector<double>>& inputs);

// Folds a fresh raw estimate into the state and re-anchors at the current
// parameters. Cumulative mode keeps the running mean of all raw estimates;
// decaying mode halves toward the newest one. Returns false (and leaves
// the state untouched) when the sample set is empty.
bool consolidate(ImportanceState& state, const Model& m,
                 const std::vector<std::vector<double>>& inputs);

// (lambda/2) * sum_i omega_i * (theta_i - anchor_i)^2
double penalty(const ImportanceState& state, const Model& m);

// Adds lambda * omega_i * (theta_i - anchor_i) into grad, no backward pass.
void add_penalty_grad(const ImportanceState& state, const Model& m,
                      std::span<double> grad);

std::vector<double> penalty_grad(const ImportanceState& state, const Model& m);

}  // namespace tfcl
