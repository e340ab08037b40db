// Times the OpenMP batch kernels against the serial reference and
// reports the largest result difference.
#include <omp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <vector>

#include "tfcl/kernels.hpp"
#include "tfcl/nn.hpp"

using Clock = std::chrono::steady_clock;

namespace {

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

tfcl::Batch make_batch(int n, int dim, int classes, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_int_distribution<int> lab(0, classes - 1);
  tfcl::Batch b;
  for (int i = 0; i < n; ++i) {
    tfcl::Sample s;
    s.x.resize(dim);
    for (double& v : s.x) v = nd(rng);
    s.label = lab(rng);
    b.samples.push_back(std::move(s));
  }
  return b;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace

int main() {
  std::printf("threads: %d\n", omp_get_max_threads());
  std::printf("%-28s %6s %12s %12s %9s %12s\n", "case", "batch", "serial_ms",
              "parallel_ms", "speedup", "max_diff");

  std::mt19937_64 rng(7);
  const tfcl::LossSpec spec{tfcl::LossKind::kCrossEntropy, 0.2};
  for (int n : {64, 512, 4096}) {
    const tfcl::Model m = tfcl::Model::random_init({16, 64, 64, 10}, 11);
    const tfcl::Batch b = make_batch(n, 16, 10, rng);
    const int iters = n >= 4096 ? 10 : 50;

    auto t0 = Clock::now();
    tfcl::kernels::LossGrad s{};
    for (int i = 0; i < iters; ++i) s = tfcl::kernels::serial::batch_loss_grad(m, b, spec);
    const double serial_ms = ms_since(t0) / iters;

    t0 = Clock::now();
    tfcl::kernels::LossGrad p{};
    for (int i = 0; i < iters; ++i) s = tfcl::kernels::batch_loss_grad(m, b, spec), p = s;
    const double par_ms = ms_since(t0) / iters;

    const tfcl::kernels::LossGrad again = tfcl::kernels::serial::batch_loss_grad(m, b, spec);
    double diff = max_abs_diff(again.grad, p.grad);
    diff = std::max(diff, std::fabs(again.loss - p.loss));
    std::printf("%-28s %6d %12.3f %12.3f %9.2f %12.3e\n", "batch_loss_grad",
                n, serial_ms, par_ms, serial_ms / par_ms, diff);
  }

  for (int n : {256, 2048}) {
    const tfcl::Model m = tfcl::Model::random_init({16, 64, 64, 10}, 11);
    std::vector<std::vector<double>> inputs;
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
      std::vector<double> x(16);
      for (double& v : x) v = nd(rng);
      inputs.push_back(std::move(x));
    }
    const int iters = 20;

    auto t0 = Clock::now();
    std::vector<double> s;
    for (int i = 0; i < iters; ++i) s = tfcl::kernels::serial::mean_output_sensitivity(m, inputs);
    const double serial_ms = ms_since(t0) / iters;

    t0 = Clock::now();
    std::vector<double> p;
    for (int i = 0; i < iters; ++i) p = tfcl::kernels::mean_output_sensitivity(m, inputs);
    const double par_ms = ms_since(t0) / iters;

    std::printf("%-28s %6d %12.3f %12.3f %9.2f %12.3e\n",
                "mean_output_sensitivity", n, serial_ms, par_ms,
                serial_ms / par_ms, max_abs_diff(s, p));
  }
  return 0;
}
