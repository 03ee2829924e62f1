#pragma once

// Central finite-difference checks for the scorer heads. The loss is a
// fixed random contraction of the outputs; coordinates whose perturbation
// flips a rectifier are redrawn (the difference quotient is invalid across
// the kink, not a gradient bug).

#include <cmath>
#include <vector>

#include "hclm/rng.hpp"
#include "hclm/scorer.hpp"

namespace grad_check {

using namespace hclm;

struct Result {
  double max_rel_err = 0.0;
  int checked = 0;
  int kinks_skipped = 0;
};

enum class DualHead { Push, High };
enum class MapHead { Pick, Place };

inline std::vector<std::vector<double>*> dual_tensor_list(DualScorer& s) {
  std::vector<std::vector<double>*> out;
  visit_dual_tensors(s.p, [&](const char*, std::vector<double>& v) {
    out.push_back(&v);
  });
  return out;
}

inline std::vector<std::vector<double>*> map_tensor_list(PickPlaceScorer& s,
                                                         MapHead head) {
  MapHeadTensors& t = head == MapHead::Pick ? s.p.pick : s.p.place;
  return {&t.trunk.w_color, &t.trunk.b_color, &t.trunk.w_height,
          &t.trunk.b_height, &t.w_head, &t.b_head};
}

inline double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

inline Result check_dual(const DualScorer& base, const GridObservation& obs,
                         DualHead head, int n_coords, double h, Rng& rng) {
  const FeatureMap feat = featurize(obs, base.cfg);
  const int n = obs.width * obs.height;
  const int k = base.cfg.k_push;

  std::vector<double> c_push(static_cast<size_t>(n) * k, 0.0);
  std::array<double, 2> c_high{0.0, 0.0};
  if (head == DualHead::Push)
    for (double& v : c_push) v = rng.uniform(-1.0, 1.0);
  else
    for (double& v : c_high) v = rng.uniform(-1.0, 1.0);

  auto loss = [&](const DualScorer& s, std::vector<uint8_t>* mask) {
    const DualOut out = forward_dual_ref(s, feat);
    if (mask) *mask = out.active;
    double l = 0.0;
    for (size_t i = 0; i < c_push.size(); ++i) l += c_push[i] * out.q_push[i];
    l += c_high[0] * out.q_high[0] + c_high[1] * out.q_high[1];
    return l;
  };

  DualScorer s = base;
  const DualOut out = forward_dual_ref(s, feat);
  DualTensors grad = zero_grad_dual(s.cfg);
  backward_dual(s, feat, out, c_push, c_high, grad);

  std::vector<std::vector<double>*> params = dual_tensor_list(s);
  DualScorer grad_holder = base;
  grad_holder.p = grad;
  std::vector<std::vector<double>*> grads = dual_tensor_list(grad_holder);

  size_t total = 0;
  for (auto* p : params) total += p->size();

  Result res;
  int attempts = 0;
  while (res.checked < n_coords && attempts < 20 * n_coords) {
    ++attempts;
    size_t flat = static_cast<size_t>(rng.next_double() * total);
    if (flat >= total) flat = total - 1;
    size_t ti = 0;
    while (flat >= params[ti]->size()) {
      flat -= params[ti]->size();
      ++ti;
    }
    double& coord = (*params[ti])[flat];
    const double saved = coord;

    std::vector<uint8_t> mask_hi, mask_lo;
    coord = saved + h;
    const double hi = loss(s, &mask_hi);
    coord = saved - h;
    const double lo = loss(s, &mask_lo);
    coord = saved;

    if (mask_hi != mask_lo) {
      ++res.kinks_skipped;
      continue;
    }
    const double fd = (hi - lo) / (2.0 * h);
    const double an = (*grads[ti])[flat];
    res.max_rel_err = std::max(res.max_rel_err, rel_err(fd, an));
    ++res.checked;
  }
  return res;
}

inline Result check_map(const PickPlaceScorer& base, const GridObservation& obs,
                        MapHead head, int n_coords, double h, Rng& rng) {
  const FeatureMap feat = featurize(obs, base.cfg);
  const int n = obs.width * obs.height;
  const int k = head == MapHead::Pick ? base.cfg.k_pick : base.cfg.k_place;

  std::vector<double> c(static_cast<size_t>(n) * k);
  for (double& v : c) v = rng.uniform(-1.0, 1.0);

  auto head_of = [&](PickPlaceScorer& s) -> MapHeadTensors& {
    return head == MapHead::Pick ? s.p.pick : s.p.place;
  };

  auto loss = [&](PickPlaceScorer& s, std::vector<uint8_t>* mask) {
    const MapOut out = forward_map_ref(s.cfg, head_of(s), k, feat);
    if (mask) *mask = out.active;
    double l = 0.0;
    for (size_t i = 0; i < c.size(); ++i) l += c[i] * out.q[i];
    return l;
  };

  PickPlaceScorer s = base;
  const MapOut out = forward_map_ref(s.cfg, head_of(s), k, feat);
  MapHeadTensors grad = zero_grad_map(s.cfg, k);
  backward_map(s.cfg, head_of(s), k, feat, out, c, grad);

  std::vector<std::vector<double>*> params = map_tensor_list(s, head);
  std::vector<std::vector<double>*> grads = {&grad.trunk.w_color,
                                             &grad.trunk.b_color,
                                             &grad.trunk.w_height,
                                             &grad.trunk.b_height,
                                             &grad.w_head,
                                             &grad.b_head};

  size_t total = 0;
  for (auto* p : params) total += p->size();

  Result res;
  int attempts = 0;
  while (res.checked < n_coords && attempts < 20 * n_coords) {
    ++attempts;
    size_t flat = static_cast<size_t>(rng.next_double() * total);
    if (flat >= total) flat = total - 1;
    size_t ti = 0;
    while (flat >= params[ti]->size()) {
      flat -= params[ti]->size();
      ++ti;
    }
    double& coord = (*params[ti])[flat];
    const double saved = coord;

    std::vector<uint8_t> mask_hi, mask_lo;
    coord = saved + h;
    const double hi = loss(s, &mask_hi);
    coord = saved - h;
    const double lo = loss(s, &mask_lo);
    coord = saved;

    if (mask_hi != mask_lo) {
      ++res.kinks_skipped;
      continue;
    }
    const double fd = (hi - lo) / (2.0 * h);
    const double an = (*grads[ti])[flat];
    res.max_rel_err = std::max(res.max_rel_err, rel_err(fd, an));
    ++res.checked;
  }
  return res;
}

inline GridObservation random_scene_obs(Rng& rng, int w = 10, int h = 10,
                                        int n_colors = 13) {
  GridObservation o;
  o.width = w;
  o.height = h;
  o.heights.assign(w * h, 0);
  o.top_color.assign(w * h, 0);
  for (int i = 0; i < w * h; ++i) {
    const double roll = rng.next_double();
    if (roll < 0.25) {
      o.heights[i] = 1 + rng.uniform_int(4);
      o.top_color[i] = 1 + rng.uniform_int(n_colors - 1);
    } else if (roll < 0.32) {
      o.top_color[i] = 2 + rng.uniform_int(n_colors - 2);  // fixture
    }
  }
  if (rng.uniform_int(2) == 1) o.held = 1 + rng.uniform_int(n_colors - 1);
  return o;
}

}  // namespace grad_check
