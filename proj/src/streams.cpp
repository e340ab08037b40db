#include "tfcl/streams.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <set>
#include <stdexcept>

namespace tfcl {
namespace {

constexpr std::uint64_t kPlacementSalt = 0x9e3779b97f4a7c15ull;
constexpr std::uint64_t kTemplateSalt = 0x517cc1b727220a95ull;
constexpr std::uint64_t kEvalSalt = 0xd1b54a32d192ed03ull;

double draw_normal(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  return nd(rng);
}

void check_schedule_common(const SegmentSchedule& schedule) {
  if (schedule.segments.empty())
    throw std::invalid_argument("schedule has no segments");
  if (schedule.batch_size < 1)
    throw std::invalid_argument("batch_size must be >= 1");
  for (const Segment& s : schedule.segments) {
    if (s.duration_batches < 1)
      throw std::invalid_argument("segment duration must be >= 1");
  }
  if (schedule.segments.front().transition.kind != TransitionKind::kSudden)
    throw std::invalid_argument("first segment cannot be entered gradually");
}

void require_sudden(const SegmentSchedule& schedule, const char* what) {
  for (const Segment& s : schedule.segments) {
    if (s.transition.kind != TransitionKind::kSudden)
      throw std::invalid_argument(std::string(what) +
                                  " supports sudden transitions only");
  }
}

// --- binary record/replay helpers ------------------------------------

void put_u64(std::ofstream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i)
    b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ofstream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(out, bits);
}

bool get_u64(std::ifstream& in, std::uint64_t& v) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

bool get_f64(std::ifstream& in, double& v) {
  std::uint64_t bits;
  if (!get_u64(in, bits)) return false;
  std::memcpy(&v, &bits, sizeof v);
  return true;
}

void put_record(std::ofstream& out, const std::vector<double>& values) {
  put_u64(out, values.size());
  for (double v : values) put_f64(out, v);
}

}  // namespace

long SegmentSchedule::total_batches() const {
  long total = 0;
  for (const Segment& s : segments) total += s.duration_batches;
  return total;
}

int SegmentSchedule::segment_at(long batch_index) const {
  long acc = 0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    acc += segments[i].duration_batches;
    if (batch_index < acc) return static_cast<int>(i);
  }
  throw std::out_of_range("batch index past end of schedule");
}

std::vector<double> orthant_box_sample(std::mt19937_64& rng,
                                       const std::array<int, 4>& signs,
                                       double radius) {
  std::uniform_real_distribution<double> u(0.0, radius);
  std::vector<double> x(4);
  for (int i = 0; i < 4; ++i) x[i] = signs[i] * u(rng);
  return x;
}

std::vector<double> orthant_radius_sample(std::mt19937_64& rng,
                                          const std::array<int, 4>& signs,
                                          double radius) {
  std::vector<double> dir(4);
  double norm = 0.0;
  do {
    norm = 0.0;
    for (int i = 0; i < 4; ++i) {
      dir[i] = std::fabs(draw_normal(rng));
      norm += dir[i] * dir[i];
    }
    norm = std::sqrt(norm);
  } while (norm < 1e-12);
  std::uniform_real_distribution<double> ur(0.0, radius);
  const double r = ur(rng);
  std::vector<double> x(4);
  for (int i = 0; i < 4; ++i) x[i] = signs[i] * r * dir[i] / norm;
  return x;
}

namespace {

// --- quadrant sphere --------------------------------------------------
//
// Binary task: is |x| < 1? Inputs live in one orthant at a time, radius
// drawn uniform in [0, radius] so both labels stay reachable. Batches
// are rebalanced to an even label split by rejection.
class SphereStream final : public StreamSource {
 public:
  SphereStream(std::uint64_t seed, const SegmentSchedule& schedule, double radius)
      : schedule_(schedule), radius_(radius), rng_(seed), seed_(seed) {
    check_schedule_common(schedule_);
    require_sudden(schedule_, "quadrant sphere stream");
    if (!(radius_ > 1.0))
      throw std::invalid_argument("sphere radius must exceed 1");
    for (const Segment& s : schedule_.segments) {
      const auto* sphere = std::get_if<SphereSegment>(&s.params);
      if (sphere == nullptr)
        throw std::invalid_argument("sphere schedule needs orthant segments");
      for (int sign : sphere->signs) {
        if (sign != 1 && sign != -1)
          throw std::invalid_argument("orthant signs must be +1 or -1");
      }
    }
  }

  Batch next_batch() override {
    const int seg = schedule_.segment_at(cursor_++);
    const auto& signs = std::get<SphereSegment>(schedule_.segments[seg].params).signs;
    Batch b;
    b.segment_id = seg;
    fill_balanced(rng_, signs, schedule_.batch_size, b.samples);
    return b;
  }

  long total_batches() const override { return schedule_.total_batches(); }
  int segment_count() const override { return static_cast<int>(schedule_.segments.size()); }
  int input_dim() const override { return 4; }
  int num_classes() const override { return 2; }
  LossKind loss_kind() const override { return LossKind::kCrossEntropy; }

  std::vector<EvalSet> eval_sets(int per_segment, std::uint64_t seed) const override {
    std::vector<EvalSet> sets;
    for (int seg = 0; seg < segment_count(); ++seg) {
      std::mt19937_64 rng(seed + kEvalSalt * (seg + 1));
      const auto& signs = std::get<SphereSegment>(schedule_.segments[seg].params).signs;
      EvalSet set;
      set.segment_id = seg;
      fill_balanced(rng, signs, per_segment, set.samples);
      sets.push_back(std::move(set));
    }
    return sets;
  }

 private:
  void fill_balanced(std::mt19937_64& rng, const std::array<int, 4>& signs,
                     int n, std::vector<Sample>& out) const {
    int want_in = (n + 1) / 2;
    int want_out = n - want_in;
    long attempts = 0;
    while (want_in + want_out > 0) {
      if (++attempts > 200000)
        throw std::runtime_error("sphere rejection sampling stalled");
      std::vector<double> x = orthant_radius_sample(rng, signs, radius_);
      double norm2 = 0.0;
      for (double v : x) norm2 += v * v;
      const bool inside = norm2 < 1.0;
      int& quota = inside ? want_in : want_out;
      if (quota == 0) continue;
      --quota;
      Sample s;
      s.x = std::move(x);
      s.label = inside ? 1 : 0;
      out.push_back(std::move(s));
    }
  }

  SegmentSchedule schedule_;
  double radius_;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  long cursor_ = 0;
};

// --- drifting gaussian ------------------------------------------------

std::vector<double> cholesky_lower(int d, const std::vector<double>& a) {
  std::vector<double> L(static_cast<std::size_t>(d) * d, 0.0);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = a[static_cast<std::size_t>(i) * d + j];
      for (int k = 0; k < j; ++k)
        s -= L[static_cast<std::size_t>(i) * d + k] * L[static_cast<std::size_t>(j) * d + k];
      if (i == j) {
        if (s <= 0.0) return {};
        L[static_cast<std::size_t>(i) * d + i] = std::sqrt(s);
      } else {
        L[static_cast<std::size_t>(i) * d + j] = s / L[static_cast<std::size_t>(j) * d + j];
      }
    }
  }
  return L;
}

struct ClassSampler {
  std::vector<double> mean;
  std::vector<double> chol;  // dim x dim lower triangular
};

class GaussianStream final : public StreamSource {
 public:
  GaussianStream(std::uint64_t seed, const SegmentSchedule& schedule)
      : schedule_(schedule), rng_(seed) {
    check_schedule_common(schedule_);
    for (std::size_t i = 0; i < schedule_.segments.size(); ++i) {
      const Segment& s = schedule_.segments[i];
      const auto* g = std::get_if<GaussianSegment>(&s.params);
      if (g == nullptr)
        throw std::invalid_argument("gaussian schedule needs class-mixture segments");
      if (g->classes.empty())
        throw std::invalid_argument("gaussian segment has no classes");
      if (s.transition.kind == TransitionKind::kGradual) {
        if (s.transition.blend_batches < 1 ||
            s.transition.blend_batches > s.duration_batches)
          throw std::invalid_argument("blend length must be in [1, duration]");
        const auto& prev = std::get<GaussianSegment>(schedule_.segments[i - 1].params);
        if (prev.classes.size() != g->classes.size())
          throw std::invalid_argument(
              "gradual transition needs matching class counts");
      }
      double prior_sum = 0.0;
      std::vector<ClassSampler> samplers;
      std::vector<double> priors;
      for (const GaussianClassSpec& c : g->classes) {
        if (c.mean.empty())
          throw std::invalid_argument("gaussian class mean is empty");
        if (dim_ == 0) dim_ = static_cast<int>(c.mean.size());
        if (static_cast<int>(c.mean.size()) != dim_)
          throw std::invalid_argument("gaussian class means disagree on dimension");
        if (c.prior < 0.0)
          throw std::invalid_argument("class prior must be >= 0");
        prior_sum += c.prior;
        samplers.push_back({c.mean, make_chol(c.cov)});
        priors.push_back(c.prior);
      }
      if (prior_sum <= 0.0)
        throw std::invalid_argument("class priors sum to zero");
      num_classes_ = std::max(num_classes_, static_cast<int>(g->classes.size()));
      samplers_.push_back(std::move(samplers));
      priors_.push_back(std::move(priors));
    }
  }

  Batch next_batch() override {
    const long idx = cursor_++;
    const int seg = schedule_.segment_at(idx);
    long seg_start = 0;
    for (int i = 0; i < seg; ++i) seg_start += schedule_.segments[i].duration_batches;
    const Segment& s = schedule_.segments[seg];

    // Gradual entry: class means slide linearly from the previous
    // segment's over the blend window; covariances and priors switch
    // at the boundary.
    double alpha = 1.0;
    if (seg > 0 && s.transition.kind == TransitionKind::kGradual) {
      const long local = idx - seg_start;
      if (local < s.transition.blend_batches)
        alpha = static_cast<double>(local + 1) / s.transition.blend_batches;
    }

    Batch b;
    b.segment_id = seg;
    std::discrete_distribution<int> pick(priors_[seg].begin(), priors_[seg].end());
    for (int k = 0; k < schedule_.batch_size; ++k) {
      const int c = pick(rng_);
      Sample sample;
      sample.label = c;
      sample.x = draw(seg, c, alpha, rng_);
      b.samples.push_back(std::move(sample));
    }
    return b;
  }

  long total_batches() const override { return schedule_.total_batches(); }
  int segment_count() const override { return static_cast<int>(schedule_.segments.size()); }
  int input_dim() const override { return dim_; }
  int num_classes() const override { return num_classes_; }
  LossKind loss_kind() const override { return LossKind::kCrossEntropy; }

  std::vector<EvalSet> eval_sets(int per_segment, std::uint64_t seed) const override {
    std::vector<EvalSet> sets;
    for (int seg = 0; seg < segment_count(); ++seg) {
      std::mt19937_64 rng(seed + kEvalSalt * (seg + 1));
      std::discrete_distribution<int> pick(priors_[seg].begin(), priors_[seg].end());
      EvalSet set;
      set.segment_id = seg;
      for (int k = 0; k < per_segment; ++k) {
        const int c = pick(rng);
        Sample sample;
        sample.label = c;
        sample.x = draw(seg, c, 1.0, rng);
        set.samples.push_back(std::move(sample));
      }
      sets.push_back(std::move(set));
    }
    return sets;
  }

 private:
  std::vector<double> make_chol(const std::vector<double>& cov) const {
    const std::size_t d = static_cast<std::size_t>(dim_);
    std::vector<double> full(d * d, 0.0);
    if (cov.size() == 1) {
      for (std::size_t i = 0; i < d; ++i) full[i * d + i] = cov[0];
    } else if (cov.size() == d) {
      for (std::size_t i = 0; i < d; ++i) full[i * d + i] = cov[i];
    } else if (cov.size() == d * d) {
      full = cov;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < i; ++j)
          if (std::fabs(full[i * d + j] - full[j * d + i]) > 1e-9)
            throw std::invalid_argument("covariance is not symmetric");
    } else {
      throw std::invalid_argument("covariance needs 1, dim, or dim^2 entries");
    }
    std::vector<double> L = cholesky_lower(dim_, full);
    if (L.empty())
      throw std::invalid_argument("covariance is not positive definite");
    return L;
  }

  std::vector<double> draw(int seg, int c, double alpha, std::mt19937_64& rng) const {
    const ClassSampler& cs = samplers_[seg][c];
    std::vector<double> mean = cs.mean;
    if (alpha < 1.0) {
      const ClassSampler& prev = samplers_[seg - 1][c];
      for (int i = 0; i < dim_; ++i)
        mean[i] = (1.0 - alpha) * prev.mean[i] + alpha * mean[i];
    }
    std::vector<double> z(dim_);
    for (int i = 0; i < dim_; ++i) z[i] = draw_normal(rng);
    std::vector<double> x = mean;
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j <= i; ++j)
        x[i] += cs.chol[static_cast<std::size_t>(i) * dim_ + j] * z[j];
    return x;
  }

  SegmentSchedule schedule_;
  std::vector<std::vector<ClassSampler>> samplers_;
  std::vector<std::vector<double>> priors_;
  int dim_ = 0;
  int num_classes_ = 0;
  std::mt19937_64 rng_;
  long cursor_ = 0;
};

// --- identity track ---------------------------------------------------
//
// Two "actors" move per batch: K+1 observations of identity A and K of
// identity B. Triplet j = (a_j, a_j+1, b_j), so anchor/positive are
// adjacent sightings of the same identity.
class IdentityStream final : public StreamSource {
 public:
  IdentityStream(std::uint64_t seed, const SegmentSchedule& schedule,
                 const IdentityStreamConfig& cfg)
      : schedule_(schedule), cfg_(cfg), rng_(seed), seed_(seed) {
    check_schedule_common(schedule_);
    require_sudden(schedule_, "identity track stream");
    if (cfg_.input_dim < 1) throw std::invalid_argument("input_dim must be >= 1");
    if (!(cfg_.cluster_sigma > 0.0))
      throw std::invalid_argument("cluster_sigma must be positive");
    if (cfg_.templates_per_identity < 1)
      throw std::invalid_argument("templates_per_identity must be >= 1");

    int max_id = -1;
    for (const Segment& s : schedule_.segments) {
      const auto* seg = std::get_if<IdentitySegment>(&s.params);
      if (seg == nullptr)
        throw std::invalid_argument("identity schedule needs identity segments");
      std::set<int> distinct(seg->identities.begin(), seg->identities.end());
      if (distinct.size() < 2)
        throw std::invalid_argument("identity segment needs >= 2 distinct identities");
      if (distinct.size() != seg->identities.size())
        throw std::invalid_argument("identity segment repeats an identity");
      for (int id : seg->identities) {
        if (id < 0) throw std::invalid_argument("identity indices must be >= 0");
        max_id = std::max(max_id, id);
        universe_.insert(id);
      }
      if (!seg->priors.empty()) {
        if (seg->priors.size() != seg->identities.size())
          throw std::invalid_argument("priors must match identity list length");
        double sum = 0.0;
        for (double p : seg->priors) {
          if (p < 0.0) throw std::invalid_argument("identity prior must be >= 0");
          sum += p;
        }
        if (sum <= 0.0) throw std::invalid_argument("identity priors sum to zero");
      }
    }

    // Cluster means depend only on (seed, identity index), so the same
    // identity lands in the same place under any schedule.
    std::mt19937_64 place(seed ^ kPlacementSalt);
    std::uniform_real_distribution<double> u(-cfg_.placement_range,
                                             cfg_.placement_range);
    means_.resize(max_id + 1);
    for (int id = 0; id <= max_id; ++id) {
      means_[id].resize(cfg_.input_dim);
      for (int i = 0; i < cfg_.input_dim; ++i) means_[id][i] = u(place);
    }

    std::mt19937_64 tmpl(seed ^ kTemplateSalt);
    templates_.reserve(universe_.size() * cfg_.templates_per_identity);
    for (int id = 0; id <= max_id; ++id) {
      for (int t = 0; t < cfg_.templates_per_identity; ++t) {
        Sample s;
        s.x = cluster_draw(id, tmpl);
        s.label = id;
        if (universe_.count(id) != 0) templates_.push_back(std::move(s));
      }
    }
  }

  Batch next_batch() override {
    const int seg = schedule_.segment_at(cursor_++);
    const auto& spec = std::get<IdentitySegment>(schedule_.segments[seg].params);
    const std::vector<int>& ids = spec.identities;
    std::vector<double> weights = spec.priors;
    if (weights.empty()) weights.assign(ids.size(), 1.0);

    std::discrete_distribution<int> pick_a(weights.begin(), weights.end());
    const int ia = pick_a(rng_);
    std::vector<double> wb = weights;
    wb[ia] = 0.0;
    std::discrete_distribution<int> pick_b(wb.begin(), wb.end());
    const int ib = pick_b(rng_);

    const int id_a = ids[ia];
    const int id_b = ids[ib];
    const int k = schedule_.batch_size;
    std::vector<std::vector<double>> track_a;
    for (int j = 0; j < k + 1; ++j) track_a.push_back(cluster_draw(id_a, rng_));
    std::vector<std::vector<double>> track_b;
    for (int j = 0; j < k; ++j) track_b.push_back(cluster_draw(id_b, rng_));

    Batch b;
    b.segment_id = seg;
    for (int j = 0; j < k; ++j) {
      Triplet t;
      t.anchor = track_a[j];
      t.positive = track_a[j + 1];
      t.negative = track_b[j];
      t.anchor_id = id_a;
      t.negative_id = id_b;
      b.triplets.push_back(std::move(t));
    }
    return b;
  }

  long total_batches() const override { return schedule_.total_batches(); }
  int segment_count() const override { return static_cast<int>(schedule_.segments.size()); }
  int input_dim() const override { return cfg_.input_dim; }
  int num_classes() const override { return 0; }
  LossKind loss_kind() const override { return LossKind::kTripletMargin; }

  std::vector<EvalSet> eval_sets(int per_segment, std::uint64_t seed) const override {
    std::vector<EvalSet> sets;
    for (int seg = 0; seg < segment_count(); ++seg) {
      std::mt19937_64 rng(seed + kEvalSalt * (seg + 1));
      const auto& spec = std::get<IdentitySegment>(schedule_.segments[seg].params);
      EvalSet set;
      set.segment_id = seg;
      const int n_ids = static_cast<int>(spec.identities.size());
      for (int k = 0; k < per_segment; ++k) {
        const int id = spec.identities[k % n_ids];
        Sample s;
        s.x = cluster_draw(id, rng);
        s.label = id;
        set.samples.push_back(std::move(s));
      }
      sets.push_back(std::move(set));
    }
    return sets;
  }

  std::vector<Sample> templates() const override { return templates_; }

 private:
  std::vector<double> cluster_draw(int id, std::mt19937_64& rng) const {
    std::vector<double> x = means_[id];
    for (int i = 0; i < cfg_.input_dim; ++i)
      x[i] += cfg_.cluster_sigma * draw_normal(rng);
    return x;
  }

  SegmentSchedule schedule_;
  IdentityStreamConfig cfg_;
  std::set<int> universe_;
  std::vector<std::vector<double>> means_;
  std::vector<Sample> templates_;
  std::mt19937_64 rng_;
  std::uint64_t seed_;
  long cursor_ = 0;
};

}  // namespace

std::unique_ptr<StreamSource> quadrant_sphere_stream(std::uint64_t seed,
                                                     const SegmentSchedule& schedule,
                                                     double radius) {
  return std::make_unique<SphereStream>(seed, schedule, radius);
}

std::unique_ptr<StreamSource> drifting_gaussian_stream(std::uint64_t seed,
                                                       const SegmentSchedule& schedule) {
  return std::make_unique<GaussianStream>(seed, schedule);
}

std::unique_ptr<StreamSource> identity_track_stream(std::uint64_t seed,
                                                    const SegmentSchedule& schedule,
                                                    const IdentityStreamConfig& cfg) {
  return std::make_unique<IdentityStream>(seed, schedule, cfg);
}

std::unique_ptr<StreamSource> make_stream(const StreamSpec& spec, std::uint64_t seed) {
  switch (spec.kind) {
    case StreamKind::kQuadrantSphere:
      return quadrant_sphere_stream(seed, spec.schedule, spec.sphere_radius);
    case StreamKind::kDriftingGaussian:
      return drifting_gaussian_stream(seed, spec.schedule);
    case StreamKind::kIdentityTrack:
      return identity_track_stream(seed, spec.schedule, spec.identity);
  }
  throw std::invalid_argument("unknown stream kind");
}

// Dump format: length-prefixed records of 64-bit little-endian floats.
// Record 0 is metadata [kind, input_dim, segment_count, num_classes,
// batch_size]; each further record is one batch. Consumes the source.
void record_stream(StreamSource& source, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);

  const bool triplet = source.loss_kind() == LossKind::kTripletMargin;
  put_record(out, {triplet ? 1.0 : 0.0, static_cast<double>(source.input_dim()),
                   static_cast<double>(source.segment_count()),
                   static_cast<double>(source.num_classes()), 0.0});

  const long total = source.total_batches();
  for (long i = 0; i < total; ++i) {
    Batch b = source.next_batch();
    std::vector<double> rec;
    rec.push_back(static_cast<double>(b.segment_id));
    rec.push_back(static_cast<double>(b.size()));
    if (triplet) {
      for (const Triplet& t : b.triplets) {
        rec.push_back(static_cast<double>(t.anchor_id));
        rec.push_back(static_cast<double>(t.negative_id));
        rec.insert(rec.end(), t.anchor.begin(), t.anchor.end());
        rec.insert(rec.end(), t.positive.begin(), t.positive.end());
        rec.insert(rec.end(), t.negative.begin(), t.negative.end());
      }
    } else {
      for (const Sample& s : b.samples) {
        rec.push_back(static_cast<double>(s.label));
        rec.insert(rec.end(), s.x.begin(), s.x.end());
      }
    }
    put_record(out, rec);
  }
  if (!out) throw std::runtime_error("short write to " + path);
}

ReplayStream::ReplayStream(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open recording: " + path);

  std::uint64_t len = 0;
  if (!get_u64(in, len) || len != 5)
    throw std::runtime_error("recording has no metadata record");
  double meta[5];
  for (double& m : meta)
    if (!get_f64(in, m)) throw std::runtime_error("truncated metadata record");
  if (meta[0] != 0.0 && meta[0] != 1.0)
    throw std::runtime_error("recording has unknown loss kind");
  kind_ = meta[0] == 1.0 ? LossKind::kTripletMargin : LossKind::kCrossEntropy;
  input_dim_ = static_cast<int>(meta[1]);
  segment_count_ = static_cast<int>(meta[2]);
  num_classes_ = static_cast<int>(meta[3]);
  if (input_dim_ < 1) throw std::runtime_error("recording has bad input_dim");

  const std::size_t d = static_cast<std::size_t>(input_dim_);
  while (get_u64(in, len)) {
    std::vector<double> rec(len);
    for (double& v : rec)
      if (!get_f64(in, v)) throw std::runtime_error("truncated batch record");
    if (rec.size() < 2) throw std::runtime_error("malformed batch record");
    Batch b;
    b.segment_id = static_cast<int>(rec[0]);
    const std::size_t n = static_cast<std::size_t>(rec[1]);
    const std::size_t stride =
        kind_ == LossKind::kTripletMargin ? 2 + 3 * d : 1 + d;
    if (rec.size() != 2 + n * stride)
      throw std::runtime_error("batch record length mismatch");
    std::size_t at = 2;
    for (std::size_t k = 0; k < n; ++k) {
      if (kind_ == LossKind::kTripletMargin) {
        Triplet t;
        t.anchor_id = static_cast<int>(rec[at++]);
        t.negative_id = static_cast<int>(rec[at++]);
        t.anchor.assign(rec.begin() + at, rec.begin() + at + d);
        at += d;
        t.positive.assign(rec.begin() + at, rec.begin() + at + d);
        at += d;
        t.negative.assign(rec.begin() + at, rec.begin() + at + d);
        at += d;
        b.triplets.push_back(std::move(t));
      } else {
        Sample s;
        s.label = static_cast<int>(rec[at++]);
        s.x.assign(rec.begin() + at, rec.begin() + at + d);
        at += d;
        b.samples.push_back(std::move(s));
      }
    }
    batches_.push_back(std::move(b));
  }
}

Batch ReplayStream::next_batch() {
  if (cursor_ >= batches_.size())
    throw std::out_of_range("replay stream exhausted");
  return batches_[cursor_++];
}

std::vector<EvalSet> ReplayStream::eval_sets(int, std::uint64_t) const {
  throw std::logic_error("replay streams carry no eval data");
}

}  // namespace tfcl
