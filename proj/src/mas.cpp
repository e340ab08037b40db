#include "tfcl/mas.hpp"

#include <stdexcept>

#include "tfcl/kernels.hpp"

namespace tfcl {

ImportanceState ImportanceState::init(const Model& m, OmegaMode mode,
                                      double lambda) {
  if (lambda < 0.0) throw std::invalid_argument("lambda must be nonnegative");
  ImportanceState s;
  s.omega.assign(m.param_count(), 0.0);
  s.anchor = m.flatten();
  s.mode = mode;
  s.lambda = lambda;
  return s;
}

std::vector<double> output_sensitivity(const Model& m,
                                       std::span<const double> x) {
  std::vector<double> sens(m.param_count(), 0.0);
  output_sensitivity_accum(m, x, sens);
  return sens;
}

std::vector<double> estimate_raw_importance(
    const Model& m, const std::vector<std::vector<double>>& inputs) {
  return kernels::mean_output_sensitivity(m, inputs);
}

bool consolidate(ImportanceState& state, const Model& m,
                 const std::vector<std::vector<double>>& inputs) {
  if (inputs.empty()) return false;
  if (state.omega.size() != m.param_count()) {
    throw std::invalid_argument("importance state does not match the model");
  }
  const std::vector<double> raw = estimate_raw_importance(m, inputs);
  state.update_count += 1;
  if (state.mode == OmegaMode::kCumulativeAverage) {
    const double n = static_cast<double>(state.update_count);
    for (std::size_t i = 0; i < raw.size(); ++i) {
      state.omega[i] += (raw[i] - state.omega[i]) / n;
    }
  } else {
    for (std::size_t i = 0; i < raw.size(); ++i) {
      state.omega[i] = 0.5 * (state.omega[i] + raw[i]);
    }
  }
  state.anchor = m.flatten();
  return true;
}

double penalty(const ImportanceState& state, const Model& m) {
  if (state.omega.size() != m.param_count()) {
    throw std::invalid_argument("importance state does not match the model");
  }
  const std::span<const double> p = m.params();
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = p[i] - state.anchor[i];
    s += state.omega[i] * d * d;
  }
  return 0.5 * state.lambda * s;
}

void add_penalty_grad(const ImportanceState& state, const Model& m,
                      std::span<double> grad) {
  if (state.omega.size() != m.param_count() ||
      grad.size() != m.param_count()) {
    throw std::invalid_argument("importance state does not match the model");
  }
  const std::span<const double> p = m.params();
  for (std::size_t i = 0; i < p.size(); ++i) {
    grad[i] += state.lambda * state.omega[i] * (p[i] - state.anchor[i]);
  }
}

std::vector<double> penalty_grad(const ImportanceState& state, const Model& m) {
  std::vector<double> g(m.param_count(), 0.0);
  add_penalty_grad(state, m, g);
  return g;
}

}  // namespace tfcl
