#include "hclm/updates.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hclm {

double stp_reward(HighAction high, double progress_delta, bool push_success,
                  bool pickplace_success) {
  if (progress_delta < 0.0) return progress_delta;
  if (high == HighAction::Push) return push_success ? 0.75 : 0.0;
  return pickplace_success ? 1.0 : 0.0;
}

GaussianFilter gaussian_filter(const SeqConfig& cfg) {
  if (cfg.sigma_x <= 0.0 || cfg.sigma_y <= 0.0)
    throw std::invalid_argument("gaussian_filter: sigma must be positive");
  GaussianFilter f;
  f.k_x = cfg.k_x;
  f.k_y = cfg.k_y;
  f.values.resize((cfg.k_x + 1) * (2 * cfg.k_y + 1));
  const double norm = 1.0 / (2.0 * M_PI * cfg.sigma_x * cfg.sigma_y);
  for (int x = -cfg.k_x; x <= 0; ++x) {
    for (int y = -cfg.k_y; y <= cfg.k_y; ++y) {
      const double v =
          norm * std::exp(-(x * x) / (2.0 * cfg.sigma_x * cfg.sigma_x) -
                          (y * y) / (2.0 * cfg.sigma_y * cfg.sigma_y));
      f.values[(x + cfg.k_x) * (2 * cfg.k_y + 1) + (y + cfg.k_y)] = v;
    }
  }
  return f;
}

RegionTarget seq_target(const SeqConfig& cfg, double reward,
                        double max_q_next_push) {
  const GaussianFilter f = gaussian_filter(cfg);
  const double eta = reward > 0.0 ? 1.0 : 0.0;
  const double bootstrap = cfg.gamma * eta * max_q_next_push;
  RegionTarget t;
  t.k_x = f.k_x;
  t.k_y = f.k_y;
  t.values.resize(f.values.size());
  for (size_t i = 0; i < f.values.size(); ++i)
    t.values[i] = reward * f.values[i] + bootstrap;
  return t;
}

std::vector<RegionCell> rotated_region(const SeqConfig& cfg, int theta,
                                       int k_push) {
  const GaussianFilter f = gaussian_filter(cfg);
  const double angle = 2.0 * M_PI * theta / k_push;
  const double c = std::cos(angle);
  const double s = std::sin(angle);

  std::vector<RegionCell> cells;
  cells.reserve(f.values.size());
  for (int x = -cfg.k_x; x <= 0; ++x) {
    for (int y = -cfg.k_y; y <= cfg.k_y; ++y) {
      const int gx = static_cast<int>(std::round(c * x - s * y));
      const int gy = static_cast<int>(std::round(s * x + c * y));
      // Nearest-cell rotation can collide; keep the larger filter value.
      bool taken = false;
      for (auto& existing : cells) {
        if (existing.grid_dx == gx && existing.grid_dy == gy) {
          if (f.at(x, y) > f.at(existing.region_x, existing.region_y)) {
            existing.region_x = x;
            existing.region_y = y;
          }
          taken = true;
          break;
        }
      }
      if (!taken) cells.push_back({x, y, gx, gy});
    }
  }
  return cells;
}

std::vector<SeqErrorEntry> seq_td_error(const SeqConfig& cfg,
                                        const RegionTarget& target,
                                        const std::vector<double>& q_push,
                                        int width, int height, int k_push,
                                        int ax, int ay, int atheta) {
  if (ax < 0 || ax >= width || ay < 0 || ay >= height)
    throw std::invalid_argument("seq_td_error: action out of bounds");
  if (atheta < 0 || atheta >= k_push)
    throw std::invalid_argument("seq_td_error: theta out of range");

  const std::vector<RegionCell> region = rotated_region(cfg, atheta, k_push);
  const int prev = (atheta + k_push - 1) % k_push;
  const int next = (atheta + 1) % k_push;
  const std::array<int, 3> slices = {prev, atheta, next};

  std::vector<SeqErrorEntry> entries;
  entries.reserve(region.size() * 3);
  for (const RegionCell& rc : region) {
    const int gx = ax + rc.grid_dx;
    const int gy = ay + rc.grid_dy;
    if (gx < 0 || gx >= width || gy < 0 || gy >= height) continue;
    const double y_val = target.at(rc.region_x, rc.region_y);
    for (int si = 0; si < 3; ++si) {
      const int slice = slices[si];
      const double t = (si == 1) ? y_val : cfg.kappa * y_val;
      SeqErrorEntry e;
      e.x = gx;
      e.y = gy;
      e.theta = slice;
      e.q = q_push[(gy * width + gx) * k_push + slice];
      e.target = t;
      e.error = e.q - t;
      entries.push_back(e);
    }
  }
  return entries;
}

double tsus_target(const TsusConfig& cfg, double reward,
                   double max_q_next_high) {
  const double eta = reward > 0.0 ? 1.0 : 0.0;
  return reward + cfg.gamma * eta * max_q_next_high;
}

double tsus_gate(const TsusConfig& cfg, HighAction high, double reward,
                 bool exploratory, int epoch) {
  if (high == HighAction::PickPlace) return 1.0;
  const bool rewarded = reward > 0.0;
  if (epoch < cfg.tau) return rewarded ? 1.0 : 0.0;
  return (rewarded || !exploratory) ? 1.0 : 0.0;
}

HuberResult huber(double error, double delta) {
  const double a = std::abs(error);
  if (a <= delta) return {0.5 * error * error, error};
  return {delta * (a - 0.5 * delta), std::clamp(error, -delta, delta)};
}

BcLossResult bc_loss(const std::vector<double>& q_map, int width, int height,
                     int k, int ex, int ey, int etheta) {
  const size_t n = static_cast<size_t>(width) * height * k;
  if (q_map.size() != n)
    throw std::invalid_argument("bc_loss: map size mismatch");
  if (ex < 0 || ex >= width || ey < 0 || ey >= height || etheta < 0 ||
      etheta >= k)
    throw std::invalid_argument("bc_loss: expert label out of bounds");

  double max_q = q_map[0];
  for (double v : q_map) max_q = std::max(max_q, v);
  double sum = 0.0;
  BcLossResult r;
  r.grad.resize(n);
  for (size_t i = 0; i < n; ++i) {
    r.grad[i] = std::exp(q_map[i] - max_q);
    sum += r.grad[i];
  }
  const size_t expert = (static_cast<size_t>(ey) * width + ex) * k + etheta;
  r.loss = -(q_map[expert] - max_q - std::log(sum));
  for (size_t i = 0; i < n; ++i) r.grad[i] /= sum;
  r.grad[expert] -= 1.0;
  return r;
}

}  // namespace hclm
