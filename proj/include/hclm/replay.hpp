#pragma once

#include <vector>

#include "hclm/rng.hpp"
#include "hclm/types.hpp"

namespace hclm {

struct ReplayConfig {
  int capacity = 5000;
  double alpha = 0.6;
  double beta = 0.4;  // annealed toward 1.0 by the trainer
  double eps_priority = 1e-3;
};

struct Sample {
  int index = 0;
  const Transition* transition = nullptr;
  double is_weight = 1.0;
};

/// Proportional prioritized replay over a transition ring. Leaf priorities
/// are (|td| + eps)^alpha; a sum tree keeps O(log n) sampling and a parallel
/// max tree supplies the priority given to new entries.
class PrioritizedBuffer {
 public:
  explicit PrioritizedBuffer(const ReplayConfig& cfg);

  /// Appends (overwriting the oldest at capacity) with the current max
  /// priority, or 1 for the first entry.
  void push_transition(const Transition& t);

  /// Draws `batch` indices proportional to priority (with replacement).
  /// Importance weights (N*P(i))^-beta are normalized by the batch max.
  std::vector<Sample> sample(int batch, Rng& rng);

  /// Re-prioritizes from a new |td| magnitude. Stale indices (already
  /// evicted and overwritten) are fine; the slot simply gets the value.
  void update_priority(int index, double abs_td);

  /// Raw leaf priority (tests and diagnostics).
  void set_priority(int index, double priority);
  double priority(int index) const;

  void set_beta(double beta) { cfg_.beta = beta; }
  double beta() const { return cfg_.beta; }
  int size() const { return size_; }
  int capacity() const { return cfg_.capacity; }
  double total_priority() const;
  const Transition& at(int index) const { return entries_[index]; }

  /// Recomputed-from-leaves root, for consistency checks.
  double recompute_total() const;

  /// Line-delimited dump of buffer contents (debugging interface).
  std::string dump() const;

 private:
  void tree_set(int index, double value);
  int tree_find(double mass) const;

  ReplayConfig cfg_;
  std::vector<Transition> entries_;
  std::vector<double> sum_tree_;  // 1-based heap layout, leaves at [cap, 2cap)
  std::vector<double> max_tree_;
  int next_ = 0;
  int size_ = 0;
};

}  // namespace hclm
