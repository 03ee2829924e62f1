#pragma once

#include <array>
#include <vector>

#include "hclm/types.hpp"

namespace hclm {

/// Spatially extended push-update parameters: the anisotropic Gaussian
/// scales, the region extent behind/beside the push start, the discount,
/// and the adjacent-angle degradation factor.
struct SeqConfig {
  double sigma_x = 1.5;
  double sigma_y = 0.75;
  int k_x = 3;  // region reaches k_x cells behind the start
  int k_y = 1;  // half-width beside the stroke
  double gamma = 0.9;
  double kappa = 0.5;
};

/// High-level update gating: epoch threshold tau and the shared discount.
struct TsusConfig {
  int tau = 0;
  double gamma = 0.9;
};

/// Stepwise task-progression reward: negative progress deltas pass through;
/// otherwise a successful push earns 0.75 and a successful pick&place 1.
double stp_reward(HighAction high, double progress_delta, bool push_success,
                  bool pickplace_success);

/// Unnormalized anisotropic Gaussian over push-frame offsets
/// {(x, y) : -k_x <= x <= 0, |y| <= k_y}; +x is the push direction.
struct GaussianFilter {
  int k_x = 0;
  int k_y = 0;
  std::vector<double> values;  // (x + k_x) * (2*k_y + 1) + (y + k_y)

  double at(int x, int y) const {
    return values[(x + k_x) * (2 * k_y + 1) + (y + k_y)];
  }
  int size() const { return static_cast<int>(values.size()); }
};

GaussianFilter gaussian_filter(const SeqConfig& cfg);

/// Region target map: Y(x,y) = reward * Filter(x,y) + gamma * eta * max_q_next,
/// with eta = 1 iff reward > 0. Same region indexing as the filter. The
/// caller supplies max over the next push map (0 at episode end).
struct RegionTarget {
  int k_x = 0;
  int k_y = 0;
  std::vector<double> values;
  double at(int x, int y) const {
    return values[(x + k_x) * (2 * k_y + 1) + (y + k_y)];
  }
};

RegionTarget seq_target(const SeqConfig& cfg, double reward,
                        double max_q_next_push);

/// One nonzero entry of the sparse TD-error map.
struct SeqErrorEntry {
  int x = 0;
  int y = 0;
  int theta = 0;      // angle slice
  double q = 0.0;     // current estimate
  double target = 0.0;
  double error = 0.0;  // q - target
};

/// Rotates the region into grid coordinates at the push action and emits
/// TD errors on the three angle slices theta-1, theta, theta+1 (cyclic);
/// adjacent slices use the degraded target kappa * Y. Offsets rotated off
/// the grid are dropped; every other pixel carries zero error. q_push is
/// indexed (y * width + x) * k_push + theta.
std::vector<SeqErrorEntry> seq_td_error(const SeqConfig& cfg,
                                        const RegionTarget& target,
                                        const std::vector<double>& q_push,
                                        int width, int height, int k_push,
                                        int ax, int ay, int atheta);

/// Region offsets mapped to grid offsets by direction index theta
/// (rotation by theta * 2*pi/k, rounded half-away-from-zero per component).
/// Colliding offsets keep the one with the larger filter value; ties keep
/// the earlier offset in scan order (x ascending, then y ascending).
struct RegionCell {
  int region_x = 0;
  int region_y = 0;
  int grid_dx = 0;
  int grid_dy = 0;
};

std::vector<RegionCell> rotated_region(const SeqConfig& cfg, int theta,
                                       int k_push);

/// Scalar high-level target: reward + gamma * eta * max_q_next_high.
double tsus_target(const TsusConfig& cfg, double reward,
                   double max_q_next_high);

/// Update weight for the high-level loss: pick&place transitions always
/// train; push transitions train only when rewarded before epoch tau, and
/// additionally whenever non-exploratory from epoch tau on.
double tsus_gate(const TsusConfig& cfg, HighAction high, double reward,
                 bool exploratory, int epoch);

struct HuberResult {
  double loss = 0.0;
  double derivative = 0.0;
};

HuberResult huber(double error, double delta = 1.0);

/// Cross-entropy of the flattened softmax over all (x, y, theta) cells
/// against the one-hot expert label; gradient is softmax - onehot.
struct BcLossResult {
  double loss = 0.0;
  std::vector<double> grad;  // same layout as q_map
};

BcLossResult bc_loss(const std::vector<double>& q_map, int width, int height,
                     int k, int ex, int ey, int etheta);

}  // namespace hclm
