#include "hclm/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hclm {

PrioritizedBuffer::PrioritizedBuffer(const ReplayConfig& cfg) : cfg_(cfg) {
  if (cfg.capacity <= 0)
    throw std::invalid_argument("PrioritizedBuffer: capacity <= 0");
  entries_.resize(cfg.capacity);
  sum_tree_.assign(static_cast<size_t>(2) * cfg.capacity, 0.0);
  max_tree_.assign(static_cast<size_t>(2) * cfg.capacity, 0.0);
}

void PrioritizedBuffer::tree_set(int index, double value) {
  size_t i = static_cast<size_t>(cfg_.capacity) + index;
  sum_tree_[i] = value;
  max_tree_[i] = value;
  for (i /= 2; i >= 1; i /= 2) {
    sum_tree_[i] = sum_tree_[2 * i] + sum_tree_[2 * i + 1];
    max_tree_[i] = std::max(max_tree_[2 * i], max_tree_[2 * i + 1]);
  }
}

int PrioritizedBuffer::tree_find(double mass) const {
  size_t i = 1;
  while (i < static_cast<size_t>(cfg_.capacity)) {
    const double left = sum_tree_[2 * i];
    if (mass < left) {
      i = 2 * i;
    } else {
      mass -= left;
      i = 2 * i + 1;
    }
  }
  return static_cast<int>(i - cfg_.capacity);
}

void PrioritizedBuffer::push_transition(const Transition& t) {
  const double p = size_ == 0 ? 1.0 : max_tree_[1];
  entries_[next_] = t;
  tree_set(next_, p);
  next_ = (next_ + 1) % cfg_.capacity;
  size_ = std::min(size_ + 1, cfg_.capacity);
}

std::vector<Sample> PrioritizedBuffer::sample(int batch, Rng& rng) {
  if (size_ == 0) throw std::logic_error("PrioritizedBuffer: sample on empty");
  if (batch <= 0) throw std::invalid_argument("sample: batch <= 0");

  const double total = sum_tree_[1];
  std::vector<Sample> out(batch);
  double max_w = 0.0;
  for (int b = 0; b < batch; ++b) {
    const double mass = rng.next_double() * total;
    int idx = tree_find(mass);
    // Guard the edge where rounding walks past the last live leaf.
    idx = std::min(idx, size_ - 1);
    const double p = sum_tree_[static_cast<size_t>(cfg_.capacity) + idx] / total;
    const double w = std::pow(size_ * p, -cfg_.beta);
    out[b] = {idx, &entries_[idx], w};
    max_w = std::max(max_w, w);
  }
  for (auto& s : out) s.is_weight /= max_w;
  return out;
}

void PrioritizedBuffer::update_priority(int index, double abs_td) {
  if (index < 0 || index >= size_) return;  // stale index past eviction
  set_priority(index, std::pow(std::abs(abs_td) + cfg_.eps_priority, cfg_.alpha));
}

void PrioritizedBuffer::set_priority(int index, double priority) {
  if (index < 0 || index >= size_) return;
  tree_set(index, priority);
}

double PrioritizedBuffer::priority(int index) const {
  return sum_tree_[static_cast<size_t>(cfg_.capacity) + index];
}

double PrioritizedBuffer::total_priority() const { return sum_tree_[1]; }

double PrioritizedBuffer::recompute_total() const {
  double sum = 0.0;
  for (int i = 0; i < size_; ++i)
    sum += sum_tree_[static_cast<size_t>(cfg_.capacity) + i];
  return sum;
}

std::string PrioritizedBuffer::dump() const {
  std::string out;
  for (int i = 0; i < size_; ++i) {
    out += to_line(entries_[i]);
    out += '\n';
  }
  return out;
}

}  // namespace hclm
