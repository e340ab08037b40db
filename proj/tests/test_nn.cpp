#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "support/oracles.hpp"
#include "tfcl/nn.hpp"

using namespace tfcl;

TEST_CASE("flat layout bookkeeping") {
  Model m({3, 5, 2});
  CHECK(m.param_count() == 3 * 5 + 5 + 5 * 2 + 2);
  CHECK(m.weight_offset(0) == 0);
  CHECK(m.bias_offset(0) == 15);
  CHECK(m.weight_offset(1) == 20);
  CHECK(m.bias_offset(1) == 30);

  std::vector<double> flat(m.param_count(), 0.5);
  m.unflatten(flat);
  CHECK(m.params()[7] == 0.5);
  CHECK(m.flatten() == flat);
  CHECK_THROWS_AS(m.unflatten(std::vector<double>(3)), std::invalid_argument);
}

TEST_CASE("bad layer sizes are rejected") {
  CHECK_THROWS_AS(Model({4}), std::invalid_argument);
  CHECK_THROWS_AS(Model({4, 0, 2}), std::invalid_argument);
  CHECK_THROWS_AS(Model({-1, 2}), std::invalid_argument);
}

TEST_CASE("zero model: zero logits, loss log C") {
  Model m({4, 8, 5});
  const std::vector<double> x{0.3, -0.2, 1.0, 0.4};
  for (double v : forward(m, x)) CHECK(v == 0.0);

  const LossSpec spec{LossKind::kCrossEntropy, 0.2};
  Sample s{x, 2};
  CHECK(sample_loss(m, s, spec) == doctest::Approx(std::log(5.0)).epsilon(1e-12));
}

TEST_CASE("glorot init: bounded weights, zero biases, seed-deterministic") {
  const Model a = Model::random_init({6, 10, 3}, 42);
  const Model b = Model::random_init({6, 10, 3}, 42);
  const Model c = Model::random_init({6, 10, 3}, 43);
  CHECK(a.flatten() == b.flatten());
  CHECK(a.flatten() != c.flatten());

  const double bound0 = std::sqrt(6.0 / (6 + 10));
  for (std::size_t i = 0; i < 60; ++i)
    CHECK(std::fabs(a.params()[i]) <= bound0);
  for (int o = 0; o < 10; ++o) CHECK(a.params()[a.bias_offset(0) + o] == 0.0);
  for (int o = 0; o < 3; ++o) CHECK(a.params()[a.bias_offset(1) + o] == 0.0);
}

TEST_CASE("forward matches the nested-loop oracle") {
  std::mt19937_64 rng(7);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Model m = Model::random_init({5, 9, 7, 4}, seed);
    for (int k = 0; k < 20; ++k) {
      const std::vector<double> x = oracles::random_vec(5, rng);
      const std::vector<double> got = forward(m, x);
      const std::vector<double> want = oracles::naive_forward(m, x);
      REQUIRE(got.size() == want.size());
      for (std::size_t i = 0; i < got.size(); ++i)
        CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("input dimension is validated") {
  const Model m = Model::random_init({4, 3}, 1);
  CHECK_THROWS_AS(forward(m, std::vector<double>{1.0, 2.0}), std::invalid_argument);
  CHECK_THROWS_AS(forward_trace(m, std::vector<double>(9, 0.0)), std::invalid_argument);
}

TEST_CASE("cross-entropy matches the naive formula and stays stable") {
  std::mt19937_64 rng(11);
  const Model m = Model::random_init({6, 12, 4}, 5);
  const LossSpec spec{LossKind::kCrossEntropy, 0.2};
  for (int k = 0; k < 25; ++k) {
    Sample s;
    s.x = oracles::random_vec(6, rng, 2.0);
    s.label = k % 4;
    const double want = oracles::naive_softmax_ce(forward(m, s.x), s.label);
    CHECK(sample_loss(m, s, spec) == doctest::Approx(want).epsilon(1e-12));
  }

  // Huge logits via huge biases: naive exp would overflow.
  Model big({2, 3});
  std::vector<double> p(big.param_count(), 0.0);
  p[big.bias_offset(0) + 0] = 1000.0;
  p[big.bias_offset(0) + 1] = 999.0;
  p[big.bias_offset(0) + 2] = -1000.0;
  big.unflatten(p);
  const double loss = sample_loss(big, {{0.0, 0.0}, 0}, spec);
  CHECK(std::isfinite(loss));
  CHECK(loss == doctest::Approx(std::log(1.0 + std::exp(-1.0))).epsilon(1e-9));
}

TEST_CASE("label range is validated") {
  const Model m = Model::random_init({4, 3}, 1);
  const LossSpec spec{LossKind::kCrossEntropy, 0.2};
  CHECK_THROWS_AS(sample_loss(m, {{1, 2, 3, 4}, 3}, spec), std::invalid_argument);
  CHECK_THROWS_AS(sample_loss(m, {{1, 2, 3, 4}, -1}, spec), std::invalid_argument);
  std::vector<double> g(m.param_count(), 0.0);
  CHECK_THROWS_AS(sample_loss_grad(m, {{1, 2, 3, 4}, 5}, spec, g),
                  std::invalid_argument);
}

TEST_CASE("loss heads reject the wrong spec kind") {
  const Model m = Model::random_init({4, 3}, 1);
  CHECK_THROWS_AS(sample_loss(m, {{1, 2, 3, 4}, 0}, {LossKind::kTripletMargin, 0.2}),
                  std::invalid_argument);
  Triplet t;
  t.anchor = t.positive = t.negative = {1, 2, 3, 4};
  CHECK_THROWS_AS(triplet_loss(m, t, {LossKind::kCrossEntropy, 0.2}),
                  std::invalid_argument);
  CHECK_THROWS_AS(triplet_loss(m, t, {LossKind::kTripletMargin, 0.0}),
                  std::invalid_argument);
}

TEST_CASE("triplet loss hand cases on an identity map") {
  // Single linear layer wired to the identity: embedding == input.
  Model m({3, 3});
  std::vector<double> p(m.param_count(), 0.0);
  for (int i = 0; i < 3; ++i) p[m.weight_offset(0) + i * 3 + i] = 1.0;
  m.unflatten(p);
  const LossSpec spec{LossKind::kTripletMargin, 0.2};

  Triplet t;
  t.anchor = {0.0, 0.0, 0.0};
  t.positive = {0.0, 0.0, 0.0};
  t.negative = {5.0, 0.0, 0.0};  // hinge far inactive
  CHECK(triplet_loss(m, t, spec) == 0.0);

  t.negative = {std::sqrt(0.1), 0.0, 0.0};  // 0.2 + 0 - 0.1 = 0.1
  CHECK(triplet_loss(m, t, spec) == doctest::Approx(0.1).epsilon(1e-12));

  std::mt19937_64 rng(3);
  for (int k = 0; k < 20; ++k) {
    Triplet r;
    r.anchor = oracles::random_vec(3, rng);
    r.positive = oracles::random_vec(3, rng);
    r.negative = oracles::random_vec(3, rng);
    const double want =
        oracles::naive_triplet(r.anchor, r.positive, r.negative, 0.2);
    CHECK(triplet_loss(m, r, spec) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("backprop agrees with central finite differences") {
  std::mt19937_64 rng(23);
  const LossSpec ce{LossKind::kCrossEntropy, 0.2};
  const LossSpec tr{LossKind::kTripletMargin, 0.35};
  for (int k = 0; k < 10; ++k) {
    const Model m = Model::random_init({4, 7, 6, 3}, 100 + k);

    Batch cb = oracles::random_class_batch(5, 4, 3, rng);
    std::vector<double> g(m.param_count(), 0.0);
    double loss = 0.0;
    for (const Sample& s : cb.samples) loss += sample_loss_grad(m, s, ce, g);
    loss /= cb.samples.size();
    for (double& v : g) v /= cb.samples.size();
    CHECK(loss == doctest::Approx(batch_data_loss(m, cb, ce)).epsilon(1e-12));
    CHECK(oracles::rel_err(g, finite_diff_grad(m, cb, ce)) < 1e-4);

    Batch tb = oracles::random_triplet_batch(4, 4, rng);
    std::vector<double> gt(m.param_count(), 0.0);
    for (const Triplet& t : tb.triplets) triplet_loss_grad(m, t, tr, gt);
    for (double& v : gt) v /= tb.triplets.size();
    CHECK(oracles::rel_err(gt, finite_diff_grad(m, tb, tr)) < 1e-4);
  }
}

TEST_CASE("dead ReLU units contribute no gradient") {
  // Force the first hidden unit's pre-activation negative for x >= 0.
  Model m({2, 2, 1});
  std::vector<double> p(m.param_count(), 0.0);
  p[m.weight_offset(0) + 0] = -1.0;  // unit 0 row
  p[m.weight_offset(0) + 1] = -1.0;
  p[m.bias_offset(0) + 0] = -0.5;
  p[m.weight_offset(0) + 2] = 1.0;  // unit 1 row keeps the net alive
  p[m.weight_offset(0) + 3] = 0.5;
  p[m.weight_offset(1) + 0] = 2.0;
  p[m.weight_offset(1) + 1] = 2.0;
  m.unflatten(p);

  const std::vector<double> x{0.7, 0.4};
  ForwardTrace tr = forward_trace(m, x);
  REQUIRE(tr.pre[0][0] < 0.0);
  std::vector<double> g(m.param_count(), 0.0);
  backprop_output_seed(m, tr, std::vector<double>{1.0}, g);
  CHECK(g[m.weight_offset(0) + 0] == 0.0);
  CHECK(g[m.weight_offset(0) + 1] == 0.0);
  CHECK(g[m.bias_offset(0) + 0] == 0.0);
  CHECK(g[m.weight_offset(0) + 2] != 0.0);
}

TEST_CASE("zero seed through zero landscape gives zero gradient") {
  Model m({3, 4, 2});
  ForwardTrace tr = forward_trace(m, std::vector<double>{0.0, 0.0, 0.0});
  std::vector<double> g(m.param_count(), 0.0);
  backprop_output_seed(m, tr, std::vector<double>{0.0, 0.0}, g);
  for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("sgd_step is plain params -= lr * grad") {
  Model m = Model::random_init({2, 2}, 9);
  const std::vector<double> before = m.flatten();
  std::vector<double> grad(m.param_count());
  for (std::size_t i = 0; i < grad.size(); ++i) grad[i] = 0.25 * (i + 1);
  sgd_step(m, grad, 0.1);
  for (std::size_t i = 0; i < grad.size(); ++i)
    CHECK(m.params()[i] == doctest::Approx(before[i] - 0.1 * grad[i]).epsilon(1e-15));
  CHECK_THROWS_AS(sgd_step(m, std::vector<double>(2, 0.0), 0.1), std::invalid_argument);
  CHECK_THROWS_AS(sgd_step(m, grad, 0.0), std::invalid_argument);
}

TEST_CASE("finite difference oracle validates its step size") {
  const Model m = Model::random_init({3, 2}, 4);
  std::mt19937_64 rng(5);
  const Batch b = oracles::random_class_batch(2, 3, 2, rng);
  const LossSpec spec{LossKind::kCrossEntropy, 0.2};
  CHECK_THROWS_AS(finite_diff_grad(m, b, spec, 1e-9), std::invalid_argument);
  CHECK_THROWS_AS(finite_diff_grad(m, b, spec, 1e-2), std::invalid_argument);
  CHECK_THROWS_AS(batch_data_loss(m, Batch{}, spec), std::invalid_argument);
}
