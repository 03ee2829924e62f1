#include "hclm/rng.hpp"

#include <stdexcept>

namespace hclm {

namespace {

constexpr uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer.
uint64_t mix(uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

Rng Rng::split(std::string_view label) const {
  if (label.empty()) throw std::invalid_argument("Rng::split: empty label");
  return Rng(mix(key_ ^ mix(fnv1a(label))));
}

Rng Rng::split(uint64_t index) const {
  return Rng(mix(key_ ^ mix(index * kGolden + 0xD1B54A32D192ED03ULL)));
}

uint64_t Rng::next_u64() {
  counter_ += 1;
  return mix(key_ + counter_ * kGolden);
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

int Rng::uniform_int(int n) {
  if (n <= 0) throw std::invalid_argument("Rng::uniform_int: n <= 0");
  // Lemire's multiply-shift; bias is < 2^-32 for toy-scale n.
  return static_cast<int>(
      (static_cast<__uint128_t>(next_u64()) * static_cast<uint64_t>(n)) >> 64);
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

bool Rng::bernoulli(double p) { return next_double() < p; }

}  // namespace hclm
