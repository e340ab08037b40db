#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "tfcl/config.hpp"
#include "tfcl/metrics.hpp"
#include "tfcl/trainer.hpp"

using namespace tfcl;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name) : path("/tmp/tfcl_harness_" + name) {}
  ~TempFile() { std::remove(path.c_str()); }
};

Model identity_model(int dim) {
  Model m({dim, dim});
  std::vector<double> p(m.param_count(), 0.0);
  for (int i = 0; i < dim; ++i) p[m.weight_offset(0) + i * dim + i] = 1.0;
  m.unflatten(p);
  return m;
}

RunConfig small_sphere_config(Variant v) {
  RunConfig cfg;
  cfg.variant = v;
  cfg.seed = 3;
  cfg.hidden = {8};
  cfg.lr = 0.05;
  cfg.lambda = 0.5;
  cfg.buffer_capacity = 10;
  cfg.window = 5;
  cfg.delta_mu = 0.6;
  cfg.delta_sigma = 0.15;
  cfg.inner_steps = 2;
  cfg.eval_every = 10;
  cfg.eval_per_segment = 40;
  cfg.stream.kind = StreamKind::kQuadrantSphere;
  cfg.stream.schedule.batch_size = 5;
  Segment s1;
  s1.duration_batches = 20;
  s1.params = SphereSegment{{1, 1, 1, 1}};
  Segment s2;
  s2.duration_batches = 20;
  s2.params = SphereSegment{{-1, 1, 1, 1}};
  cfg.stream.schedule.segments = {s1, s2};
  return cfg;
}

std::string csv_of(const MetricsLog& log) {
  std::ostringstream out;
  out << csv_header(log.segment_count) << "\n";
  append_csv(log, out);
  return out.str();
}

}  // namespace

TEST_CASE("predict_class is the argmax of the logits") {
  Model m({2, 3});
  std::vector<double> p(m.param_count(), 0.0);
  p[m.bias_offset(0) + 0] = 0.1;
  p[m.bias_offset(0) + 1] = 0.9;
  p[m.bias_offset(0) + 2] = 0.5;
  m.unflatten(p);
  CHECK(predict_class(m, {0.0, 0.0}) == 1);
}

TEST_CASE("classifier eval: constant predictor on a 90/10 split") {
  // Bias forces class 0 everywhere.
  Model m({2, 2});
  std::vector<double> p(m.param_count(), 0.0);
  p[m.bias_offset(0) + 0] = 10.0;
  m.unflatten(p);

  std::vector<Sample> testset;
  for (int i = 0; i < 90; ++i) testset.push_back({{0.1 * i, 0.0}, 0});
  for (int i = 0; i < 10; ++i) testset.push_back({{0.0, 0.1 * i}, 1});

  const ClassifierEval ev = evaluate_classifier(m, testset, 2);
  CHECK(ev.total == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(ev.per_class.at(0) == 1.0);
  CHECK(ev.per_class.at(1) == 0.0);
  CHECK(ev.weighted == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(ev.missing_classes.empty());

  // A wider label universe flags the classes the testset never shows.
  const ClassifierEval wide = evaluate_classifier(m, testset, 4);
  CHECK(wide.missing_classes == std::vector<int>{2, 3});

  CHECK_THROWS_AS(evaluate_classifier(m, {}, 2), std::invalid_argument);
}

TEST_CASE("template eval: separable clusters are read off exactly") {
  const Model m = identity_model(2);
  std::vector<Sample> templates = {
      {{0.0, 0.0}, 7}, {{0.1, 0.0}, 7}, {{5.0, 5.0}, 9}, {{5.1, 5.0}, 9}};
  std::vector<Sample> testset = {
      {{0.2, -0.1}, 7}, {{-0.1, 0.2}, 7}, {{4.9, 5.2}, 9}};
  const ClassifierEval ev = evaluate_templates(m, templates, testset, 1);
  CHECK(ev.total == 1.0);
  CHECK(ev.per_class.at(7) == 1.0);
  CHECK(ev.per_class.at(9) == 1.0);
}

TEST_CASE("template eval input validation") {
  const Model m = identity_model(2);
  std::vector<Sample> templates = {{{0.0, 0.0}, 1}, {{1.0, 1.0}, 2}};
  std::vector<Sample> testset = {{{0.0, 0.0}, 1}};
  CHECK_THROWS_AS(evaluate_templates(m, {}, testset, 1), std::invalid_argument);
  CHECK_THROWS_AS(evaluate_templates(m, templates, {}, 1), std::invalid_argument);

  std::vector<Sample> one_id = {{{0.0, 0.0}, 1}, {{1.0, 0.0}, 1}};
  CHECK_THROWS_AS(evaluate_templates(m, one_id, testset, 1), std::invalid_argument);

  std::vector<Sample> alien = {{{0.0, 0.0}, 5}};
  CHECK_THROWS_AS(evaluate_templates(m, templates, alien, 1), std::invalid_argument);
}

TEST_CASE("template eval: a constant map degrades to uniform guessing") {
  // Zero model embeds everything at the origin; every template ties.
  const Model m({2, 3});
  std::vector<Sample> templates = {
      {{0.0, 1.0}, 0}, {{2.0, 0.0}, 1}, {{0.0, 3.0}, 2}};
  std::vector<Sample> testset = {{{0.5, 0.5}, 0}};

  int hits = 0;
  const int trials = 600;
  for (int seed = 0; seed < trials; ++seed)
    hits += evaluate_templates(m, templates, testset, seed).total == 1.0;
  const double p = static_cast<double>(hits) / trials;
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / trials);
  CHECK(std::abs(p - 1.0 / 3.0) < 4.0 * sigma);

  // Same tie seed, same verdicts.
  CHECK(evaluate_templates(m, templates, testset, 17).total ==
        evaluate_templates(m, templates, testset, 17).total);
}

TEST_CASE("template eval agrees with a brute-force 1-NN oracle") {
  const Model m = Model::random_init({3, 6, 4}, 13);
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto vec = [&](int n) {
    std::vector<double> x(n);
    for (double& v : x) v = u(rng);
    return x;
  };

  std::vector<Sample> templates;
  for (int id = 0; id < 3; ++id)
    for (int t = 0; t < 4; ++t) templates.push_back({vec(3), id});
  std::vector<Sample> testset;
  for (int i = 0; i < 50; ++i) testset.push_back({vec(3), i % 3});

  std::size_t hits = 0;
  for (const Sample& s : testset) {
    const std::vector<double> e = forward(m, s.x);
    double best = 1e300;
    int best_label = -1;
    for (const Sample& t : templates) {
      const std::vector<double> te = forward(m, t.x);
      double d2 = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k)
        d2 += (e[k] - te[k]) * (e[k] - te[k]);
      if (d2 < best) {
        best = d2;
        best_label = t.label;
      }
    }
    hits += best_label == s.label;
  }
  const ClassifierEval ev = evaluate_templates(m, templates, testset, 5);
  CHECK(ev.total == static_cast<double>(hits) / testset.size());
}

TEST_CASE("format_g17 round-trips doubles exactly") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-17, 3.14159265358979312, 0.0, -1e300}) {
    const std::string s = format_g17(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("csv header and row layout") {
  CHECK(csv_header(1) ==
        "step,variant,seed,acc_seg0,acc_total,acc_weighted,forget_seg0,"
        "consolidation,window_mean,window_std");

  MetricsLog log;
  log.variant = "online-continual";
  log.seed = 42;
  log.segment_count = 2;
  EvalRecord r;
  r.step = 50;
  r.segment_acc = {0.75, 0.5};
  r.total_acc = 0.625;
  r.weighted_acc = 0.6;
  r.segment_forgetting = {0.05, 0.0};
  r.consolidation_since_last = true;
  r.window_mean = 0.31;
  r.window_std = 0.02;
  log.records.push_back(r);
  r.step = 100;
  r.consolidation_since_last = false;
  log.records.push_back(r);

  std::istringstream in(csv_of(log));
  const CsvTable table = parse_csv(in);
  REQUIRE(table.header.size() == 12);
  CHECK(table.header[4] == "acc_seg1");
  CHECK(table.header[8] == "forget_seg1");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[0][0] == "50");
  CHECK(table.rows[0][1] == "online-continual");
  CHECK(table.rows[0][2] == "42");
  CHECK(std::strtod(table.rows[0][3].c_str(), nullptr) == 0.75);
  CHECK(std::strtod(table.rows[0][4].c_str(), nullptr) == 0.5);
  CHECK(std::strtod(table.rows[0][5].c_str(), nullptr) == 0.625);
  CHECK(std::strtod(table.rows[0][7].c_str(), nullptr) == 0.05);
  CHECK(table.rows[0][9] == "1");  // consolidation flag
  CHECK(table.rows[1][9] == "0");
}

TEST_CASE("csv parser rejects ragged rows and empty input") {
  std::istringstream ragged("a,b,c\n1,2\n");
  CHECK_THROWS_AS(parse_csv(ragged), std::runtime_error);
  std::istringstream empty("");
  CHECK_THROWS_AS(parse_csv(empty), std::runtime_error);
}

TEST_CASE("export_csv writes a parseable file") {
  MetricsLog log;
  log.variant = "online-no-buffer";
  log.seed = 7;
  log.segment_count = 1;
  EvalRecord r;
  r.step = 10;
  r.segment_acc = {1.0};
  r.total_acc = 1.0;
  r.weighted_acc = 1.0;
  r.segment_forgetting = {0.0};
  log.records.push_back(r);

  TempFile file("log.csv");
  export_csv(log, file.path);
  const CsvTable table = parse_csv_file(file.path);
  CHECK(table.header.front() == "step");
  CHECK(table.rows.size() == 1);
  CHECK(table.rows[0][1] == "online-no-buffer");
}

TEST_CASE("key-value parsing: comments, precedence, errors") {
  const KeyValueConfig kv = KeyValueConfig::parse_string(
      "# leading comment\n"
      "lr = 0.5\n"
      "name = first\n"
      "\n"
      "name = second   # override wins\n"
      "hidden = 16 32 8\n"
      "flag = true\n");
  CHECK(kv.get_double("lr", 0.0) == 0.5);
  CHECK(kv.get_str("name") == "second");
  CHECK(kv.get_ints("hidden") == std::vector<int>{16, 32, 8});
  CHECK(kv.get_bool("flag", false));
  CHECK(kv.get_int("absent", 9) == 9);

  CHECK_THROWS_AS(KeyValueConfig::parse_string("lr 0.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(KeyValueConfig::parse_string("= 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(KeyValueConfig::parse_string("lr = 0.5x\n").get_double("lr", 0.0),
                  std::invalid_argument);
}

TEST_CASE("unread keys are reported") {
  const KeyValueConfig kv =
      KeyValueConfig::parse_string("lr = 0.5\nlaambda = 2\n");
  kv.get_double("lr", 0.0);
  try {
    kv.require_all_consumed();
    FAIL("expected a throw");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("laambda") != std::string::npos);
  }
}

TEST_CASE("profiles bundle the documented hyperparameters") {
  RunConfig cfg;
  apply_profile(cfg, "embedding");
  CHECK(cfg.lr == 1e-4);
  CHECK(cfg.lambda == 100.0);
  CHECK(cfg.buffer_capacity == 100);
  CHECK(cfg.inner_steps == 10);
  CHECK(cfg.margin == 0.2);

  apply_profile(cfg, "sphere");
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.buffer_capacity == 30);

  apply_profile(cfg, "classification");
  CHECK(cfg.buffer_capacity == 40);
  CHECK(cfg.window == 5);

  CHECK_THROWS_AS(apply_profile(cfg, "nope"), std::invalid_argument);
}

TEST_CASE("full run config file: gaussian stream with drift") {
  TempFile file("run.conf");
  {
    std::ofstream out(file.path);
    out << "profile = classification\n"
           "variant = online-continual\n"
           "seed = 11\n"
           "hidden = 12 12\n"
           "lambda = 0.25\n"
           "stream = drifting-gaussian\n"
           "batch_size = 8\n"
           "segment.0.duration = 30\n"
           "segment.0.class.0.mean = 0 0\n"
           "segment.0.class.0.cov = 0.5\n"
           "segment.0.class.0.prior = 0.4\n"
           "segment.0.class.1.mean = 3 3\n"
           "segment.0.class.1.cov = 0.5 0.7\n"
           "segment.0.class.1.prior = 0.6\n"
           "segment.1.duration = 20\n"
           "segment.1.transition = gradual 5\n"
           "segment.1.class.0.mean = 1 0\n"
           "segment.1.class.0.cov = 0.5\n"
           "segment.1.class.1.mean = 4 3\n"
           "segment.1.class.1.cov = 0.5 0.7\n";
  }
  const RunConfig cfg = run_config_from_file(file.path);
  CHECK(cfg.variant == Variant::kOnlineContinual);
  CHECK(cfg.seed == 11);
  CHECK(cfg.hidden == std::vector<int>{12, 12});
  CHECK(cfg.lambda == 0.25);
  CHECK(cfg.buffer_capacity == 40);  // from the profile
  CHECK(cfg.stream.kind == StreamKind::kDriftingGaussian);
  CHECK(cfg.stream.schedule.batch_size == 8);
  REQUIRE(cfg.stream.schedule.segments.size() == 2);
  const auto& g0 = std::get<GaussianSegment>(cfg.stream.schedule.segments[0].params);
  REQUIRE(g0.classes.size() == 2);
  CHECK(g0.classes[0].mean == std::vector<double>{0.0, 0.0});
  CHECK(g0.classes[1].cov == std::vector<double>{0.5, 0.7});
  CHECK(g0.classes[1].prior == 0.6);
  const Segment& s1 = cfg.stream.schedule.segments[1];
  CHECK(s1.transition.kind == TransitionKind::kGradual);
  CHECK(s1.transition.blend_batches == 5);
  CHECK_NOTHROW(validate(cfg));
}

TEST_CASE("sphere and identity stream config keys") {
  const KeyValueConfig kv = KeyValueConfig::parse_string(
      "stream = quadrant-sphere\n"
      "sphere_radius = 1.5\n"
      "segment.0.duration = 10\n"
      "segment.0.orthant = +-+-\n"
      "segment.1.duration = 5\n"
      "segment.1.orthant = ----\n");
  const StreamSpec spec = stream_spec_from_kv(kv);
  CHECK(spec.kind == StreamKind::kQuadrantSphere);
  CHECK(spec.sphere_radius == 1.5);
  const auto& s0 = std::get<SphereSegment>(spec.schedule.segments[0].params);
  CHECK(s0.signs == std::array<int, 4>{1, -1, 1, -1});
  const auto& s1 = std::get<SphereSegment>(spec.schedule.segments[1].params);
  CHECK(s1.signs == std::array<int, 4>{-1, -1, -1, -1});

  const KeyValueConfig ikv = KeyValueConfig::parse_string(
      "stream = identity-track\n"
      "identity_dim = 6\n"
      "identity_sigma = 0.3\n"
      "identity_spread = 2.0\n"
      "identity_templates = 4\n"
      "segment.0.duration = 10\n"
      "segment.0.identities = 0 1 2\n"
      "segment.0.priors = 0.5 0.25 0.25\n");
  const StreamSpec ispec = stream_spec_from_kv(ikv);
  CHECK(ispec.kind == StreamKind::kIdentityTrack);
  CHECK(ispec.identity.input_dim == 6);
  CHECK(ispec.identity.cluster_sigma == 0.3);
  CHECK(ispec.identity.placement_range == 2.0);
  CHECK(ispec.identity.templates_per_identity == 4);
  const auto& i0 = std::get<IdentitySegment>(ispec.schedule.segments[0].params);
  CHECK(i0.identities == std::vector<int>{0, 1, 2});
  CHECK(i0.priors == std::vector<double>{0.5, 0.25, 0.25});

  const KeyValueConfig none = KeyValueConfig::parse_string("stream = quadrant-sphere\n");
  CHECK_THROWS_AS(stream_spec_from_kv(none), std::invalid_argument);
}

TEST_CASE("run config validation") {
  RunConfig cfg = small_sphere_config(Variant::kOnlineContinual);
  CHECK_NOTHROW(validate(cfg));

  RunConfig bad = cfg;
  bad.lr = 0.0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.window = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.inner_steps = 0;
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.buffer_capacity = 0;  // continual needs replay data
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.stream.schedule.segments.clear();
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = cfg;
  bad.record_path = "/tmp/a.bin";
  bad.replay_path = "/tmp/b.bin";
  CHECK_THROWS_AS(validate(bad), std::invalid_argument);
  bad = small_sphere_config(Variant::kOnlineNoBuffer);
  bad.buffer_capacity = 0;  // fine without a buffer
  CHECK_NOTHROW(validate(bad));
}

TEST_CASE("name round trips") {
  for (Variant v :
       {Variant::kOnlineNoBuffer, Variant::kOnlineBaseline, Variant::kOnlineContinual,
        Variant::kOnlineJoint, Variant::kOfflineJoint})
    CHECK(parse_variant(to_string(v)) == v);
  CHECK(to_string(Variant::kOnlineContinual) == "online-continual");
  CHECK_THROWS_AS(parse_variant("online"), std::invalid_argument);

  for (OmegaMode m : {OmegaMode::kCumulativeAverage, OmegaMode::kDecaying})
    CHECK(parse_omega_mode(to_string(m)) == m);
  for (StreamKind k : {StreamKind::kQuadrantSphere, StreamKind::kDriftingGaussian,
                       StreamKind::kIdentityTrack})
    CHECK(parse_stream_kind(to_string(k)) == k);
}

TEST_CASE("every variant trains end to end on a small sphere stream") {
  for (Variant v :
       {Variant::kOnlineNoBuffer, Variant::kOnlineBaseline, Variant::kOnlineContinual,
        Variant::kOnlineJoint, Variant::kOfflineJoint}) {
    RunConfig cfg = small_sphere_config(v);
    cfg.epochs = 2;
    const MetricsLog log = train_online(cfg);
    CHECK(log.variant == to_string(v));
    CHECK(log.aborted_step == -1);
    REQUIRE(!log.records.empty());
    const long expected_final =
        v == Variant::kOfflineJoint ? 2 * 40 : 40;
    CHECK(log.records.back().step == expected_final);
    for (const EvalRecord& r : log.records) {
      REQUIRE(r.segment_acc.size() == 2);
      REQUIRE(r.segment_forgetting.size() == 2);
      for (double a : r.segment_acc) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
      }
      for (double f : r.segment_forgetting) CHECK(f >= -1e-15);
      CHECK(std::isfinite(r.window_mean));
    }
    if (v != Variant::kOnlineContinual) {
      CHECK(log.events.empty());
      CHECK(log.omega_updates == 0);
    } else {
      CHECK(log.events.size() == log.omega_updates);
      bool any_flag = false;
      for (const EvalRecord& r : log.records) any_flag |= r.consolidation_since_last;
      CHECK(any_flag == !log.events.empty());
    }
  }
}

TEST_CASE("segment boundaries always get an eval record") {
  RunConfig cfg = small_sphere_config(Variant::kOnlineBaseline);
  cfg.eval_every = 7;  // misaligned with the boundary at step 20
  const MetricsLog log = train_online(cfg);
  bool saw_boundary = false;
  for (const EvalRecord& r : log.records) saw_boundary |= r.step == 20;
  CHECK(saw_boundary);
}

TEST_CASE("runs are bit-for-bit reproducible") {
  const RunConfig cfg = small_sphere_config(Variant::kOnlineContinual);
  const MetricsLog a = train_online(cfg);
  const MetricsLog b = train_online(cfg);
  CHECK(csv_of(a) == csv_of(b));

  RunConfig other = cfg;
  other.seed = 4;
  const MetricsLog c = train_online(other);
  CHECK(csv_of(a) != csv_of(c));
}

TEST_CASE("lambda = 0 reduces the continual variant to plain replay") {
  RunConfig continual = small_sphere_config(Variant::kOnlineContinual);
  continual.lambda = 0.0;
  RunConfig baseline = small_sphere_config(Variant::kOnlineBaseline);

  std::vector<double> pc, pb;
  TrainHooks hc;
  hc.after_step = [&](long, const Model& m) { pc = m.flatten(); };
  TrainHooks hb;
  hb.after_step = [&](long, const Model& m) { pb = m.flatten(); };
  const MetricsLog lc = train_online(continual, hc);
  const MetricsLog lb = train_online(baseline, hb);
  REQUIRE(!pc.empty());
  CHECK(pc == pb);  // exact: the penalty path is skipped entirely
  REQUIRE(lc.records.size() == lb.records.size());
  for (std::size_t i = 0; i < lc.records.size(); ++i)
    CHECK(lc.records[i].total_acc == lb.records[i].total_acc);
}

TEST_CASE("recording a run and replaying it gives the same run") {
  TempFile dump("dump.bin");
  RunConfig rec = small_sphere_config(Variant::kOnlineContinual);
  rec.record_path = dump.path;

  std::vector<double> p1, p2;
  TrainHooks h1;
  h1.after_step = [&](long, const Model& m) { p1 = m.flatten(); };
  const MetricsLog a = train_online(rec, h1);

  RunConfig rep = small_sphere_config(Variant::kOnlineContinual);
  rep.replay_path = dump.path;
  TrainHooks h2;
  h2.after_step = [&](long, const Model& m) { p2 = m.flatten(); };
  const MetricsLog b = train_online(rep, h2);

  CHECK(p1 == p2);
  CHECK(csv_of(a) == csv_of(b));

  // A recording from a different schedule is refused.
  RunConfig wrong = small_sphere_config(Variant::kOnlineContinual);
  wrong.replay_path = dump.path;
  wrong.stream.schedule.segments.pop_back();
  CHECK_THROWS_AS(train_online(wrong), std::invalid_argument);
}

TEST_CASE("triplet head trains on the identity stream") {
  RunConfig cfg;
  cfg.variant = Variant::kOnlineBaseline;
  cfg.seed = 6;
  cfg.hidden = {12};
  cfg.embed_dim = 4;
  cfg.lr = 1e-3;
  cfg.margin = 0.2;
  cfg.buffer_capacity = 12;
  cfg.window = 4;
  cfg.delta_mu = 0.3;
  cfg.delta_sigma = 0.1;
  cfg.inner_steps = 2;
  cfg.eval_every = 8;
  cfg.eval_per_segment = 30;
  cfg.stream.kind = StreamKind::kIdentityTrack;
  cfg.stream.schedule.batch_size = 3;
  Segment s;
  s.duration_batches = 16;
  s.params = IdentitySegment{{0, 1, 2}, {}};
  cfg.stream.schedule.segments = {s};

  const MetricsLog log = train_online(cfg);
  CHECK(log.aborted_step == -1);
  REQUIRE(!log.records.empty());
  CHECK(log.records.back().step == 16);
  for (const EvalRecord& r : log.records) {
    CHECK(r.total_acc >= 0.0);
    CHECK(r.total_acc <= 1.0);
  }
}

TEST_CASE("diverging runs abort with a diagnostic instead of NaN output") {
  RunConfig cfg = small_sphere_config(Variant::kOnlineNoBuffer);
  // Saturating softmax and dying ReLUs stall most runaway rates at huge
  // but finite losses; a step this size overflows the logits directly.
  cfg.lr = 1e308;
  const MetricsLog log = train_online(cfg);
  CHECK(log.aborted_step >= 0);
  CHECK(!log.fault.empty());
  CHECK(log.fault.find("non-finite") != std::string::npos);
}
