#pragma once

#include <cstdint>
#include <string_view>

namespace hclm {

/// Counter-based splittable PRNG. The stream is a pure function of
/// (key, counter), so child streams derived by split() are unaffected by
/// how many draws the parent has made, and the same (seed, label) always
/// yields the same child.
class Rng {
 public:
  Rng() = default;
  explicit Rng(uint64_t seed) : key_(seed) {}

  /// Child stream for a named purpose ("env", "explore", ...).
  Rng split(std::string_view label) const;
  /// Child stream for an indexed purpose (episode i, worker i, ...).
  Rng split(uint64_t index) const;

  uint64_t next_u64();
  /// Uniform in [0, 1), 53-bit resolution.
  double next_double();
  /// Uniform in [0, n). Requires n > 0.
  int uniform_int(int n);
  double uniform(double lo, double hi);
  bool bernoulli(double p);

  uint64_t key() const { return key_; }

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace hclm
