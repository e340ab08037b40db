#include "tfcl/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <stdexcept>

#include "tfcl/kernels.hpp"

namespace tfcl {
namespace {

constexpr std::uint64_t kEvalSalt = 0x8f14e45fceea167aull;
constexpr std::uint64_t kShuffleSalt = 0x243f6a8885a308d3ull;
constexpr std::uint64_t kTieSalt = 0x13198a2e03707344ull;

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  a ^= b + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2);
  return a;
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::kOnlineNoBuffer: return "online-no-buffer";
    case Variant::kOnlineBaseline: return "online-baseline";
    case Variant::kOnlineContinual: return "online-continual";
    case Variant::kOnlineJoint: return "online-joint";
    case Variant::kOfflineJoint: return "offline-joint";
  }
  return "?";
}

Variant parse_variant(const std::string& name) {
  if (name == "online-no-buffer") return Variant::kOnlineNoBuffer;
  if (name == "online-baseline") return Variant::kOnlineBaseline;
  if (name == "online-continual") return Variant::kOnlineContinual;
  if (name == "online-joint") return Variant::kOnlineJoint;
  if (name == "offline-joint") return Variant::kOfflineJoint;
  throw std::invalid_argument("unknown variant: " + name);
}

std::string to_string(OmegaMode m) {
  return m == OmegaMode::kCumulativeAverage ? "cumulative" : "decaying";
}

OmegaMode parse_omega_mode(const std::string& name) {
  if (name == "cumulative") return OmegaMode::kCumulativeAverage;
  if (name == "decaying") return OmegaMode::kDecaying;
  throw std::invalid_argument("unknown omega mode: " + name);
}

std::string to_string(StreamKind k) {
  switch (k) {
    case StreamKind::kQuadrantSphere: return "quadrant-sphere";
    case StreamKind::kDriftingGaussian: return "drifting-gaussian";
    case StreamKind::kIdentityTrack: return "identity-track";
  }
  return "?";
}

StreamKind parse_stream_kind(const std::string& name) {
  if (name == "quadrant-sphere") return StreamKind::kQuadrantSphere;
  if (name == "drifting-gaussian") return StreamKind::kDriftingGaussian;
  if (name == "identity-track") return StreamKind::kIdentityTrack;
  throw std::invalid_argument("unknown stream kind: " + name);
}

void validate(const RunConfig& cfg) {
  if (!(cfg.lr > 0.0)) throw std::invalid_argument("lr must be positive");
  if (cfg.lambda < 0.0) throw std::invalid_argument("lambda must be >= 0");
  if (cfg.inner_steps < 1) throw std::invalid_argument("inner_steps must be >= 1");
  if (cfg.window < 1) throw std::invalid_argument("window must be >= 1");
  if (!(cfg.delta_mu > 0.0)) throw std::invalid_argument("delta_mu must be positive");
  if (!(cfg.delta_sigma > 0.0)) throw std::invalid_argument("delta_sigma must be positive");
  if (cfg.buffer_capacity < 0) throw std::invalid_argument("buffer capacity must be >= 0");
  if (cfg.eval_every < 1) throw std::invalid_argument("eval_every must be >= 1");
  if (cfg.eval_per_segment < 1) throw std::invalid_argument("eval_per_segment must be >= 1");
  if (cfg.variant == Variant::kOfflineJoint && cfg.epochs < 1)
    throw std::invalid_argument("offline-joint needs epochs >= 1");
  for (int h : cfg.hidden)
    if (h < 1) throw std::invalid_argument("hidden layer widths must be >= 1");
  if (cfg.stream.kind == StreamKind::kIdentityTrack) {
    if (cfg.embed_dim < 1) throw std::invalid_argument("embed_dim must be >= 1");
    if (!(cfg.margin > 0.0)) throw std::invalid_argument("margin must be positive");
  }
  if (cfg.stream.schedule.segments.empty())
    throw std::invalid_argument("stream schedule has no segments");
  if (cfg.stream.schedule.batch_size < 1)
    throw std::invalid_argument("batch_size must be >= 1");
  if (!cfg.replay_path.empty() && !cfg.record_path.empty())
    throw std::invalid_argument("record_path and replay_path are mutually exclusive");
  if ((cfg.variant == Variant::kOnlineBaseline ||
       cfg.variant == Variant::kOnlineContinual) &&
      cfg.buffer_capacity == 0)
    throw std::invalid_argument("buffer variants need buffer_capacity > 0");
}

int predict_class(const Model& m, const std::vector<double>& x) {
  const std::vector<double> logits = forward(m, x);
  return static_cast<int>(std::max_element(logits.begin(), logits.end()) -
                          logits.begin());
}

ClassifierEval evaluate_classifier(const Model& m,
                                   const std::vector<Sample>& testset,
                                   int num_classes) {
  if (testset.empty()) throw std::invalid_argument("testset is empty");
  std::map<int, int> seen, correct;
  std::size_t hits = 0;
  for (const Sample& s : testset) {
    ++seen[s.label];
    if (predict_class(m, s.x) == s.label) {
      ++correct[s.label];
      ++hits;
    }
  }
  ClassifierEval ev;
  ev.total = static_cast<double>(hits) / testset.size();
  double sum = 0.0;
  for (const auto& [label, n] : seen) {
    ev.per_class[label] = static_cast<double>(correct[label]) / n;
    sum += ev.per_class[label];
  }
  ev.weighted = sum / static_cast<double>(seen.size());
  for (int c = 0; c < num_classes; ++c)
    if (seen.count(c) == 0) ev.missing_classes.push_back(c);
  return ev;
}

ClassifierEval evaluate_templates(const Model& m,
                                  const std::vector<Sample>& templates,
                                  const std::vector<Sample>& testset,
                                  std::uint64_t tie_seed) {
  if (testset.empty()) throw std::invalid_argument("testset is empty");
  if (templates.empty()) throw std::invalid_argument("no templates given");
  std::set<int> template_ids;
  for (const Sample& t : templates) template_ids.insert(t.label);
  if (template_ids.size() < 2)
    throw std::invalid_argument("template evaluation needs >= 2 identities");
  for (const Sample& s : testset)
    if (template_ids.count(s.label) == 0)
      throw std::invalid_argument("test identity " + std::to_string(s.label) +
                                  " has no templates");

  std::vector<std::vector<double>> emb;
  emb.reserve(templates.size());
  for (const Sample& t : templates) emb.push_back(forward(m, t.x));

  std::mt19937_64 rng(tie_seed);
  std::map<int, int> seen, correct;
  std::size_t hits = 0;
  for (const Sample& s : testset) {
    const std::vector<double> e = forward(m, s.x);
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> ties;
    for (std::size_t i = 0; i < emb.size(); ++i) {
      double d2 = 0.0;
      for (std::size_t k = 0; k < e.size(); ++k) {
        const double diff = e[k] - emb[i][k];
        d2 += diff * diff;
      }
      if (d2 < best) {
        best = d2;
        ties.assign(1, i);
      } else if (d2 == best) {
        ties.push_back(i);
      }
    }
    std::size_t pick = ties.front();
    if (ties.size() > 1) {
      std::uniform_int_distribution<std::size_t> u(0, ties.size() - 1);
      pick = ties[u(rng)];
    }
    const int predicted = templates[pick].label;
    ++seen[s.label];
    if (predicted == s.label) {
      ++correct[s.label];
      ++hits;
    }
  }
  ClassifierEval ev;
  ev.total = static_cast<double>(hits) / testset.size();
  double sum = 0.0;
  for (const auto& [label, n] : seen) {
    ev.per_class[label] = static_cast<double>(correct[label]) / n;
    sum += ev.per_class[label];
  }
  ev.weighted = sum / static_cast<double>(seen.size());
  return ev;
}

MetricsLog train_online(const RunConfig& cfg) { return train_online(cfg, {}); }

MetricsLog train_online(const RunConfig& cfg, const TrainHooks& hooks) {
  validate(cfg);

  // The schedule stream also serves eval data when training from a dump.
  std::unique_ptr<StreamSource> sched = make_stream(cfg.stream, cfg.seed);
  std::unique_ptr<StreamSource> replay;
  StreamSource* src = sched.get();

  if (!cfg.record_path.empty()) {
    // Dump first, then train from the dump: the file provably holds the
    // exact batches this run consumed.
    auto fresh = make_stream(cfg.stream, cfg.seed);
    record_stream(*fresh, cfg.record_path);
    replay = std::make_unique<ReplayStream>(cfg.record_path);
  } else if (!cfg.replay_path.empty()) {
    replay = std::make_unique<ReplayStream>(cfg.replay_path);
  }
  if (replay) {
    if (replay->loss_kind() != sched->loss_kind() ||
        replay->input_dim() != sched->input_dim() ||
        replay->num_classes() != sched->num_classes() ||
        replay->total_batches() != sched->total_batches())
      throw std::invalid_argument("recording does not match the configured stream");
    src = replay.get();
  }

  const LossKind kind = sched->loss_kind();
  const LossSpec spec{kind, cfg.margin};
  const int out_dim =
      kind == LossKind::kCrossEntropy ? sched->num_classes() : cfg.embed_dim;
  std::vector<int> sizes;
  sizes.push_back(sched->input_dim());
  for (int h : cfg.hidden) sizes.push_back(h);
  sizes.push_back(out_dim);
  Model model = Model::random_init(sizes, cfg.seed);

  const bool use_mas = cfg.variant == Variant::kOnlineContinual;
  const bool use_buffer = cfg.variant == Variant::kOnlineBaseline ||
                          cfg.variant == Variant::kOnlineContinual;
  const bool joint = cfg.variant == Variant::kOnlineJoint ||
                     cfg.variant == Variant::kOfflineJoint;
  const int epochs = cfg.variant == Variant::kOfflineJoint ? cfg.epochs : 1;

  ImportanceState imp = ImportanceState::init(model, cfg.omega_mode, cfg.lambda);
  StabilityController ctrl(cfg.window, cfg.delta_mu, cfg.delta_sigma);
  HardBuffer buffer(use_buffer ? cfg.buffer_capacity : 0, cfg.buffer_normalize);

  const std::vector<EvalSet> eval_sets =
      sched->eval_sets(cfg.eval_per_segment, cfg.seed ^ kEvalSalt);
  const std::vector<Sample> templates = sched->templates();
  std::vector<Sample> combined;
  for (const EvalSet& es : eval_sets)
    combined.insert(combined.end(), es.samples.begin(), es.samples.end());

  MetricsLog log;
  log.variant = to_string(cfg.variant);
  log.seed = cfg.seed;
  log.segment_count = sched->segment_count();

  // Segment ends; the harness evaluates there (the learner never knows).
  std::set<long> boundary_steps;
  if (!joint) {
    long acc = 0;
    for (const Segment& s : cfg.stream.schedule.segments) {
      acc += s.duration_batches;
      boundary_steps.insert(acc);
    }
  }

  long step = 0;
  bool consolidated_since_eval = false;
  std::vector<double> best_acc(log.segment_count, 0.0);

  auto do_eval = [&]() {
    EvalRecord r;
    r.step = step;
    ClassifierEval all;
    if (kind == LossKind::kCrossEntropy) {
      for (const EvalSet& es : eval_sets)
        r.segment_acc.push_back(evaluate_classifier(model, es.samples).total);
      all = evaluate_classifier(model, combined, out_dim);
    } else {
      for (const EvalSet& es : eval_sets)
        r.segment_acc.push_back(
            evaluate_templates(model, templates, es.samples,
                               mix(cfg.seed ^ kTieSalt,
                                   static_cast<std::uint64_t>(step) * 131 +
                                       es.segment_id))
                .total);
      all = evaluate_templates(model, templates, combined,
                               mix(cfg.seed ^ kTieSalt,
                                   static_cast<std::uint64_t>(step) * 131 + 97));
    }
    r.total_acc = all.total;
    r.weighted_acc = all.weighted;
    r.missing_classes = all.missing_classes;
    for (int s = 0; s < log.segment_count; ++s) {
      best_acc[s] = std::max(best_acc[s], r.segment_acc[s]);
      r.segment_forgetting.push_back(best_acc[s] - r.segment_acc[s]);
    }
    r.consolidation_since_last = consolidated_since_eval;
    consolidated_since_eval = false;
    r.window_mean = ctrl.window().mean();
    r.window_std = ctrl.window().stddev();
    for (const auto& [cls, n] : buffer.class_counts())
      r.buffer_class_counts.emplace_back(cls, n);
    log.records.push_back(std::move(r));
  };

  // One Algorithm-1 step: N inner updates on recent + buffer (+ penalty),
  // window bookkeeping, consolidation test, then the buffer update.
  auto run_batch = [&](const Batch& batch) -> bool {
    ++step;
    Batch replayed;
    const bool have_buffer = use_buffer && !buffer.empty();
    if (have_buffer) replayed = buffer.as_batch(kind);

    for (int n = 1; n <= cfg.inner_steps; ++n) {
      kernels::LossGrad lg = kernels::batch_loss_grad(model, batch, spec);
      double data_loss = lg.loss;
      if (have_buffer) {
        const kernels::LossGrad bg = kernels::batch_loss_grad(model, replayed, spec);
        data_loss += bg.loss;
        for (std::size_t i = 0; i < lg.grad.size(); ++i) lg.grad[i] += bg.grad[i];
      }
      if (!std::isfinite(data_loss)) {
        log.aborted_step = step;
        log.fault = "non-finite loss at step " + std::to_string(step);
        return false;
      }
      if (use_mas && cfg.lambda > 0.0) add_penalty_grad(imp, model, lg.grad);
      sgd_step(model, lg.grad, cfg.lr);
      if (n == 1) ctrl.record_loss(data_loss);
    }

    if (use_mas) {
      if (ctrl.should_consolidate() && !buffer.empty() &&
          consolidate(imp, model, buffer.inputs())) {
        log.events.push_back(ctrl.on_consolidated(step));
        consolidated_since_eval = true;
      }
      ctrl.check_peak();
    }
    if (use_buffer) buffer.update(model, batch, spec);
    if (hooks.after_step) hooks.after_step(step, model);
    return true;
  };

  const long stream_total = src->total_batches();
  bool aborted = false;

  if (joint) {
    // Materialize the whole stream, then train on i.i.d. reshuffles.
    std::vector<Batch> materialized;
    for (long i = 0; i < stream_total; ++i) materialized.push_back(src->next_batch());
    std::vector<Sample> flat_samples;
    std::vector<Triplet> flat_triplets;
    for (const Batch& b : materialized) {
      flat_samples.insert(flat_samples.end(), b.samples.begin(), b.samples.end());
      flat_triplets.insert(flat_triplets.end(), b.triplets.begin(), b.triplets.end());
    }
    const std::size_t k = static_cast<std::size_t>(cfg.stream.schedule.batch_size);
    std::mt19937_64 shuffle_rng(cfg.seed ^ kShuffleSalt);
    for (int e = 0; e < epochs && !aborted; ++e) {
      std::shuffle(flat_samples.begin(), flat_samples.end(), shuffle_rng);
      std::shuffle(flat_triplets.begin(), flat_triplets.end(), shuffle_rng);
      const std::size_t items =
          kind == LossKind::kCrossEntropy ? flat_samples.size() : flat_triplets.size();
      for (std::size_t at = 0; at < items && !aborted; at += k) {
        const std::size_t end = std::min(items, at + k);
        Batch b;
        if (kind == LossKind::kCrossEntropy)
          b.samples.assign(flat_samples.begin() + at, flat_samples.begin() + end);
        else
          b.triplets.assign(flat_triplets.begin() + at, flat_triplets.begin() + end);
        if (!run_batch(b)) aborted = true;
        else if (step % cfg.eval_every == 0) do_eval();
      }
    }
  } else {
    for (long i = 0; i < stream_total && !aborted; ++i) {
      if (!run_batch(src->next_batch())) aborted = true;
      else if (step % cfg.eval_every == 0 || boundary_steps.count(step) != 0)
        do_eval();
    }
  }

  if (!aborted && (log.records.empty() || log.records.back().step != step))
    do_eval();
  log.omega_updates = imp.update_count;
  return log;
}

}  // namespace tfcl
