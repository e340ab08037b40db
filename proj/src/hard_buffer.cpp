#include "tfcl/hard_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <tuple>

namespace tfcl {

namespace {

int content_compare(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return a.size() < b.size() ? -1 : 1;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? -1 : 1;
  }
  return 0;
}

int content_compare(const BufferItem& a, const BufferItem& b) {
  if (a.payload.index() != b.payload.index()) {
    return a.payload.index() < b.payload.index() ? -1 : 1;
  }
  if (std::holds_alternative<Sample>(a.payload)) {
    const Sample& sa = std::get<Sample>(a.payload);
    const Sample& sb = std::get<Sample>(b.payload);
    if (int c = content_compare(sa.x, sb.x)) return c;
    if (sa.label != sb.label) return sa.label < sb.label ? -1 : 1;
    return 0;
  }
  const Triplet& ta = std::get<Triplet>(a.payload);
  const Triplet& tb = std::get<Triplet>(b.payload);
  if (int c = content_compare(ta.anchor, tb.anchor)) return c;
  if (int c = content_compare(ta.positive, tb.positive)) return c;
  if (int c = content_compare(ta.negative, tb.negative)) return c;
  if (ta.anchor_id != tb.anchor_id) return ta.anchor_id < tb.anchor_id ? -1 : 1;
  if (ta.negative_id != tb.negative_id) return ta.negative_id < tb.negative_id ? -1 : 1;
  return 0;
}

double item_loss(const Model& m, const BufferItem& item, const LossSpec& spec) {
  if (std::holds_alternative<Sample>(item.payload)) {
    return sample_loss(m, std::get<Sample>(item.payload), spec);
  }
  return triplet_loss(m, std::get<Triplet>(item.payload), spec);
}

}  // namespace

int buffer_item_class(const BufferItem& item) {
  if (std::holds_alternative<Sample>(item.payload)) {
    return std::get<Sample>(item.payload).label;
  }
  return std::get<Triplet>(item.payload).anchor_id;
}

bool buffer_rank_before(const BufferItem& a, const BufferItem& b) {
  if (a.loss != b.loss) return a.loss > b.loss;
  if (a.seq != b.seq) return a.seq > b.seq;
  return content_compare(a, b) > 0;
}

HardBuffer::HardBuffer(int capacity, bool normalize_classes)
    : capacity_(capacity), normalize_(normalize_classes) {
  if (capacity < 0) throw std::invalid_argument("buffer capacity must be nonnegative");
}

void HardBuffer::update(const Model& m, const Batch& fresh,
                        const LossSpec& spec) {
  if (capacity_ == 0) return;
  ++update_seq_;

  std::vector<BufferItem> pool;
  pool.reserve(items_.size() + fresh.size());

  // Held items keep their seq but are re-scored under the current model.
  for (BufferItem item : items_) {
    item.loss = item_loss(m, item, spec);
    if (!std::isfinite(item.loss)) {
      ++faults_;
      continue;
    }
    pool.push_back(std::move(item));
  }
  auto offer = [&](std::variant<Sample, Triplet> payload) {
    BufferItem item{std::move(payload), 0.0, update_seq_};
    item.loss = item_loss(m, item, spec);
    if (!std::isfinite(item.loss)) {
      ++faults_;
      return;
    }
    pool.push_back(std::move(item));
  };
  if (spec.kind == LossKind::kCrossEntropy) {
    for (const Sample& s : fresh.samples) offer(s);
  } else {
    for (const Triplet& t : fresh.triplets) offer(t);
  }

  std::sort(pool.begin(), pool.end(), buffer_rank_before);

  const std::size_t cap = static_cast<std::size_t>(capacity_);
  if (!normalize_ || pool.size() <= cap) {
    if (pool.size() > cap) pool.resize(cap);
    items_ = std::move(pool);
    return;
  }

  // Even split over observed classes; the remainder goes to the hardest
  // overflow, at most one extra slot per class. Classes short of
  // candidates leave their slots to the globally hardest leftovers.
  std::map<int, std::size_t> taken;
  for (const BufferItem& it : pool) taken.emplace(buffer_item_class(it), 0);
  const std::size_t n_classes = taken.size();
  const std::size_t base = cap / n_classes;
  std::size_t extras_left = cap % n_classes;

  std::vector<char> keep(pool.size(), 0);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < pool.size() && kept < cap; ++i) {
    std::size_t& cnt = taken[buffer_item_class(pool[i])];
    if (cnt < base) {
      keep[i] = 1;
      ++cnt;
      ++kept;
    } else if (cnt == base && extras_left > 0) {
      keep[i] = 1;
      ++cnt;
      --extras_left;
      ++kept;
    }
  }
  for (std::size_t i = 0; i < pool.size() && kept < cap; ++i) {
    if (!keep[i]) {
      keep[i] = 1;
      ++kept;
    }
  }

  std::vector<BufferItem> next;
  next.reserve(kept);
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (keep[i]) next.push_back(std::move(pool[i]));
  }
  items_ = std::move(next);
}

Batch HardBuffer::as_batch(LossKind kind) const {
  Batch b;
  for (const BufferItem& item : items_) {
    if (kind == LossKind::kCrossEntropy) {
      b.samples.push_back(std::get<Sample>(item.payload));
    } else {
      b.triplets.push_back(std::get<Triplet>(item.payload));
    }
  }
  return b;
}

std::vector<std::vector<double>> HardBuffer::inputs() const {
  std::vector<std::vector<double>> xs;
  for (const BufferItem& item : items_) {
    if (std::holds_alternative<Sample>(item.payload)) {
      xs.push_back(std::get<Sample>(item.payload).x);
    } else {
      const Triplet& t = std::get<Triplet>(item.payload);
      xs.push_back(t.anchor);
      xs.push_back(t.positive);
      xs.push_back(t.negative);
    }
  }
  return xs;
}

std::map<int, int> HardBuffer::class_counts() const {
  std::map<int, int> counts;
  for (const BufferItem& item : items_) counts[buffer_item_class(item)]++;
  return counts;
}

}  // namespace tfcl
