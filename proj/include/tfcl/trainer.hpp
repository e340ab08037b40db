#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "tfcl/hard_buffer.hpp"
#include "tfcl/mas.hpp"
#include "tfcl/metrics.hpp"
#include "tfcl/nn.hpp"
#include "tfcl/stability.hpp"
#include "tfcl/streams.hpp"

namespace tfcl {

enum class Variant {
  kOnlineNoBuffer,   // plain online SGD on the incoming batch
  kOnlineBaseline,   // + hard buffer replay
  kOnlineContinual,  // + importance penalty and consolidation
  kOnlineJoint,      // one pass over the shuffled full stream
  kOfflineJoint,     // several epochs over the shuffled full stream
};

std::string to_string(Variant v);
Variant parse_variant(const std::string& name);
std::string to_string(OmegaMode m);
OmegaMode parse_omega_mode(const std::string& name);
std::string to_string(StreamKind k);
StreamKind parse_stream_kind(const std::string& name);

struct RunConfig {
  Variant variant = Variant::kOnlineContinual;
  std::uint64_t seed = 1;
  std::vector<int> hidden{16, 16};
  int embed_dim = 8;  // output width for the triplet head
  double lr = 0.01;
  double lambda = 0.5;
  double margin = 0.2;
  int buffer_capacity = 30;
  bool buffer_normalize = false;
  int window = 5;
  double delta_mu = 0.5;
  double delta_sigma = 0.1;
  int inner_steps = 3;
  OmegaMode omega_mode = OmegaMode::kCumulativeAverage;
  int eval_every = 50;
  int eval_per_segment = 400;
  int epochs = 5;  // offline-joint only
  StreamSpec stream;
  std::string replay_path;  // train from this recording
  std::string record_path;  // dump the stream here, then train from the dump
};

// Throws std::invalid_argument on inconsistent settings.
void validate(const RunConfig& cfg);

struct TrainHooks {
  // Called after each completed stream step (all inner updates done).
  std::function<void(long step, const Model& m)> after_step;
};

MetricsLog train_online(const RunConfig& cfg);
MetricsLog train_online(const RunConfig& cfg, const TrainHooks& hooks);

struct ClassifierEval {
  double total = 0.0;
  std::map<int, double> per_class;
  double weighted = 0.0;  // mean over classes present in the testset
  std::vector<int> missing_classes;
};

int predict_class(const Model& m, const std::vector<double>& x);

// Argmax accuracy; `num_classes` bounds the label universe that the
// missing-class flag is checked against (0 = classes seen in testset).
ClassifierEval evaluate_classifier(const Model& m,
                                   const std::vector<Sample>& testset,
                                   int num_classes = 0);

// Nearest-template identity assignment in embedding space. Exact
// distance ties are broken uniformly at random from tie_seed.
ClassifierEval evaluate_templates(const Model& m,
                                  const std::vector<Sample>& templates,
                                  const std::vector<Sample>& testset,
                                  std::uint64_t tie_seed);

}  // namespace tfcl
