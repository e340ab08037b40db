#pragma once

#include <cstdint>
#include <map>
#include <variant>
#include <vector>

#include "tfcl/nn.hpp"

namespace tfcl {

struct BufferItem {
  std::variant<Sample, Triplet> payload;
  double loss = 0.0;      // last evaluated loss under the current model
  std::uint64_t seq = 0;  // update-call index that offered this item
};

// Class slot for normalization: the label for samples, the anchor
// identity for triplets.
int buffer_item_class(const BufferItem& item);

// Capacity-bounded store of the hardest items seen so far. Every update
// recomputes the losses of the held items under the current model, pools
// them with the fresh batch and keeps the top-capacity by loss. Ties
// prefer the newer update call, then an arbitrary fixed content order so
// the outcome is insensitive to arrival order within one call.
//
// With normalization on, the capacity is split evenly over the classes
// observed in the pool (remainder slots go to the classes holding the
// globally hardest overflow, at most one extra each); slots a class
// cannot fill fall back to the globally hardest leftovers.
class HardBuffer {
 public:
  HardBuffer(int capacity, bool normalize_classes);

  void update(const Model& m, const Batch& fresh, const LossSpec& spec);

  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }
  int capacity() const { return capacity_; }
  bool normalize_classes() const { return normalize_; }

  const std::vector<BufferItem>& items() const { return items_; }

  // Replay view of the whole buffer.
  Batch as_batch(LossKind kind) const;

  // Inputs for importance estimation; a triplet contributes all three
  // of its members.
  std::vector<std::vector<double>> inputs() const;

  std::map<int, int> class_counts() const;

  // Items dropped because their loss came out non-finite.
  std::uint64_t fault_count() const { return faults_; }

 private:
  int capacity_;
  bool normalize_;
  std::vector<BufferItem> items_;
  std::uint64_t update_seq_ = 0;
  std::uint64_t faults_ = 0;
};

// Ranking order shared with the brute-force test oracle: loss descending,
// then newer update call, then fixed content order.
bool buffer_rank_before(const BufferItem& a, const BufferItem& b);

}  // namespace tfcl
