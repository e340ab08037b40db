#pragma once

#include <deque>

namespace tfcl {

// FIFO window over recent per-step losses with mean / sample-std queries.
class LossWindow {
 public:
  explicit LossWindow(int capacity);

  void push(double loss);
  void clear() { entries_.clear(); }

  std::size_t size() const { return entries_.size(); }
  int capacity() const { return capacity_; }
  bool full() const { return entries_.size() == static_cast<std::size_t>(capacity_); }

  double mean() const;
  double stddev() const;  // (n-1) estimator, 0 for fewer than two entries

 private:
  int capacity_;
  std::deque<double> entries_;
};

struct ConsolidationEvent {
  long step = 0;
  double window_mean = 0.0;
  double window_std = 0.0;
};

// Decides when to consolidate: fires when the loss window has settled
// into a plateau (mean and std below their thresholds), then stays
// disarmed until the window mean climbs past the previous plateau's
// mean + std, which re-arms the detector. Consolidations and peaks
// therefore strictly alternate.
class StabilityController {
 public:
  StabilityController(int window_capacity, double delta_mu, double delta_sigma);

  // Appends the combined data loss of one step. Only the first inner
  // gradient step of a batch records. Throws on non-finite input.
  void record_loss(double combined_loss);

  bool should_consolidate() const;

  // Captures the plateau statistics, clears the window and disarms.
  // Call only after should_consolidate() returned true.
  ConsolidationEvent on_consolidated(long step);

  // Re-arms on a peak; returns true when the flag flipped this call.
  bool check_peak();

  bool plateau_flag() const { return plateau_flag_; }
  double mu_old() const { return mu_old_; }
  double sigma_old() const { return sigma_old_; }
  const LossWindow& window() const { return window_; }

 private:
  LossWindow window_;
  double delta_mu_;
  double delta_sigma_;
  bool plateau_flag_ = false;
  double mu_old_ = 0.0;
  double sigma_old_ = 0.0;
};

}  // namespace tfcl
