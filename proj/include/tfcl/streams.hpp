#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <variant>
#include <vector>

#include "tfcl/nn.hpp"

namespace tfcl {

enum class StreamKind { kQuadrantSphere, kDriftingGaussian, kIdentityTrack };

enum class TransitionKind { kSudden, kGradual };

struct Transition {
  TransitionKind kind = TransitionKind::kSudden;
  int blend_batches = 0;  // gradual only
};

// One orthant of 4D space, a sign per coordinate.
struct SphereSegment {
  std::array<int, 4> signs{1, 1, 1, 1};
};

struct GaussianClassSpec {
  std::vector<double> mean;
  // 1 value: isotropic variance; dim values: diagonal; dim*dim: full
  // covariance, row-major. Must be positive definite.
  std::vector<double> cov;
  double prior = 1.0;
};

struct GaussianSegment {
  std::vector<GaussianClassSpec> classes;
};

struct IdentitySegment {
  std::vector<int> identities;
  std::vector<double> priors;  // empty = uniform
};

struct Segment {
  int duration_batches = 0;
  Transition transition;  // how this segment is entered
  std::variant<SphereSegment, GaussianSegment, IdentitySegment> params;
};

// Boundaries are internal bookkeeping; the learner never sees them.
struct SegmentSchedule {
  std::vector<Segment> segments;
  int batch_size = 10;

  long total_batches() const;
  int segment_at(long batch_index) const;
};

struct IdentityStreamConfig {
  int input_dim = 4;
  double cluster_sigma = 0.5;
  double placement_range = 3.0;  // cluster means uniform in [-range, range]^dim
  int templates_per_identity = 5;
};

struct StreamSpec {
  StreamKind kind = StreamKind::kQuadrantSphere;
  SegmentSchedule schedule;
  double sphere_radius = 1.3;  // radial sampling range, must exceed 1
  IdentityStreamConfig identity;
};

struct EvalSet {
  int segment_id = -1;
  std::vector<Sample> samples;
};

// Seeded batch generator. Same seed and schedule reproduce the stream
// bit for bit. Everything beyond next_batch() is harness-side
// bookkeeping, invisible to the learner.
class StreamSource {
 public:
  virtual ~StreamSource() = default;

  virtual Batch next_batch() = 0;

  virtual long total_batches() const = 0;
  virtual int segment_count() const = 0;
  virtual int input_dim() const = 0;
  virtual int num_classes() const = 0;  // 0 for the triplet head
  virtual LossKind loss_kind() const = 0;

  // Held-out labeled data per segment, disjoint from the stream.
  virtual std::vector<EvalSet> eval_sets(int per_segment,
                                         std::uint64_t seed) const = 0;

  // Identity stream only: held-out template samples, label = identity.
  virtual std::vector<Sample> templates() const { return {}; }
};

std::unique_ptr<StreamSource> quadrant_sphere_stream(std::uint64_t seed,
                                                     const SegmentSchedule& schedule,
                                                     double radius = 1.3);
std::unique_ptr<StreamSource> drifting_gaussian_stream(std::uint64_t seed,
                                                       const SegmentSchedule& schedule);
std::unique_ptr<StreamSource> identity_track_stream(std::uint64_t seed,
                                                    const SegmentSchedule& schedule,
                                                    const IdentityStreamConfig& cfg = {});

std::unique_ptr<StreamSource> make_stream(const StreamSpec& spec,
                                          std::uint64_t seed);

// Raw sphere-task draws, exposed for the distribution checks.
std::vector<double> orthant_box_sample(std::mt19937_64& rng,
                                       const std::array<int, 4>& signs,
                                       double radius);
std::vector<double> orthant_radius_sample(std::mt19937_64& rng,
                                          const std::array<int, 4>& signs,
                                          double radius);

// Record/replay: flat binary stream dumps (little-endian 64-bit floats,
// length-prefixed records) for exact re-runs.
void record_stream(StreamSource& source, const std::string& path);

class ReplayStream final : public StreamSource {
 public:
  explicit ReplayStream(const std::string& path);

  Batch next_batch() override;
  long total_batches() const override { return static_cast<long>(batches_.size()); }
  int segment_count() const override { return segment_count_; }
  int input_dim() const override { return input_dim_; }
  int num_classes() const override { return num_classes_; }
  LossKind loss_kind() const override { return kind_; }
  std::vector<EvalSet> eval_sets(int, std::uint64_t) const override;

 private:
  LossKind kind_ = LossKind::kCrossEntropy;
  int input_dim_ = 0;
  int segment_count_ = 0;
  int num_classes_ = 0;
  std::vector<Batch> batches_;
  std::size_t cursor_ = 0;
};

}  // namespace tfcl
