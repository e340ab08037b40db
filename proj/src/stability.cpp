#include "tfcl/stability.hpp"

#include <cmath>
#include <stdexcept>

namespace tfcl {

LossWindow::LossWindow(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw std::invalid_argument("window capacity must be positive");
}

void LossWindow::push(double loss) {
  entries_.push_back(loss);
  if (entries_.size() > static_cast<std::size_t>(capacity_)) {
    entries_.pop_front();
  }
}

double LossWindow::mean() const {
  // Incremental form: a window of k equal values reports exactly that
  // value, so a flat refill right after a consolidation never compares
  // as a peak through rounding noise alone.
  double m = 0.0;
  int k = 0;
  for (double v : entries_) m += (v - m) / ++k;
  return m;
}

double LossWindow::stddev() const {
  const std::size_t n = entries_.size();
  if (n < 2) return 0.0;
  const double mu = mean();
  double s = 0.0;
  for (double v : entries_) s += (v - mu) * (v - mu);
  return std::sqrt(s / static_cast<double>(n - 1));
}

StabilityController::StabilityController(int window_capacity, double delta_mu,
                                         double delta_sigma)
    : window_(window_capacity), delta_mu_(delta_mu), delta_sigma_(delta_sigma) {
  if (!(delta_mu > 0.0) || !(delta_sigma > 0.0)) {
    throw std::invalid_argument("plateau thresholds must be positive");
  }
}

void StabilityController::record_loss(double combined_loss) {
  if (!std::isfinite(combined_loss)) {
    throw std::runtime_error("non-finite loss recorded, stream fault");
  }
  window_.push(combined_loss);
}

bool StabilityController::should_consolidate() const {
  // Partial windows never fire.
  return !plateau_flag_ && window_.full() && window_.mean() < delta_mu_ &&
         window_.stddev() < delta_sigma_;
}

ConsolidationEvent StabilityController::on_consolidated(long step) {
  mu_old_ = window_.mean();
  sigma_old_ = window_.stddev();
  window_.clear();
  plateau_flag_ = true;
  return {step, mu_old_, sigma_old_};
}

bool StabilityController::check_peak() {
  if (window_.size() == 0) return false;
  if (window_.mean() > mu_old_ + sigma_old_) {
    const bool flipped = plateau_flag_;
    plateau_flag_ = false;
    return flipped;
  }
  return false;
}

}  // namespace tfcl
