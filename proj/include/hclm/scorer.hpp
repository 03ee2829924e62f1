#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hclm/rng.hpp"
#include "hclm/types.hpp"

namespace hclm {

/// Shared scorer hyperparameters. Feature channels per cell: scaled height,
/// one-hot top color, goal-fixture mask, held-color broadcast, and a global
/// visible-color histogram broadcast.
struct ScorerConfig {
  int patch = 5;  // odd window side
  int hidden = 32;
  int k_push = 8;
  int k_pick = 1;
  int k_place = 1;
  int n_colors = 13;  // color ids 0 .. n_colors-1
  int max_stack = 4;  // height scale

  int color_in() const {
    return patch * patch * n_colors + (n_colors - 1) + n_colors;
  }
  int height_in() const { return patch * patch; }
  int fused() const { return 2 * hidden; }
  bool operator==(const ScorerConfig&) const = default;
};

/// Sparse per-cell feature windows; broadcast inputs (held color, global
/// histogram) enter each cell's list once.
struct FeatureMap {
  int width = 0;
  int height = 0;
  std::vector<std::vector<std::pair<int, double>>> color;
  std::vector<std::vector<std::pair<int, double>>> elevation;
};

FeatureMap featurize(const GridObservation& obs, const ScorerConfig& cfg);

/// Two-stream trunk: a color-stream and a height-stream affine + rectifier,
/// fused by concatenation. Weights are input-major ([input][hidden]).
struct TrunkTensors {
  std::vector<double> w_color, b_color;
  std::vector<double> w_height, b_height;
};

struct DualTensors {
  TrunkTensors trunk;
  std::vector<double> w_push, b_push;  // [k_push][fused], [k_push]
  std::vector<double> w_high, b_high;  // [2][fused], [2]
};

struct MapHeadTensors {
  TrunkTensors trunk;
  std::vector<double> w_head, b_head;  // [k][fused], [k]
};

struct PickPlaceTensors {
  MapHeadTensors pick;
  MapHeadTensors place;
};

/// Dual-branch scorer: dense per-cell push Q map plus a 2-vector of
/// high-level action values from mean-pooled trunk features.
struct DualScorer {
  ScorerConfig cfg;
  DualTensors p;
};

/// Independent pick and place scorers (parameters disjoint from the dual
/// scorer so they can be frozen separately). The place trunk sees the held
/// color through the broadcast channel.
struct PickPlaceScorer {
  ScorerConfig cfg;
  PickPlaceTensors p;
};

DualScorer make_dual_scorer(const ScorerConfig& cfg, Rng& init_rng);
PickPlaceScorer make_pickplace_scorer(const ScorerConfig& cfg, Rng& init_rng);
DualScorer make_zero_dual_scorer(const ScorerConfig& cfg);

/// Forward caches kept for backward.
struct DualOut {
  int width = 0, height = 0, k_push = 0;
  std::vector<double> q_push;  // (y*w + x)*k_push + theta
  std::array<double, 2> q_high{0.0, 0.0};
  std::vector<double> fused;    // (y*w + x)*F + j, post-rectifier
  std::vector<uint8_t> active;  // rectifier mask, same layout
  std::vector<double> pooled;   // F
};

struct MapOut {
  int width = 0, height = 0, k = 0;
  std::vector<double> q;  // (y*w + x)*k + theta
  std::vector<double> fused;
  std::vector<uint8_t> active;
};

// Row-parallel OpenMP kernels and their serial references. Both follow the
// same reduction order (per-row partials combined in row order), so results
// are bit-identical for any thread count.
DualOut forward_dual(const DualScorer& s, const FeatureMap& f);
DualOut forward_dual_ref(const DualScorer& s, const FeatureMap& f);

MapOut forward_map(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                   const FeatureMap& f);
MapOut forward_map_ref(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                       const FeatureMap& f);

/// Exact gradient of (upstream . outputs) w.r.t. all parameters, accumulated
/// into `grad` (caller zeroes). Serial; training parallelizes across batch
/// items instead.
void backward_dual(const DualScorer& s, const FeatureMap& f, const DualOut& out,
                   const std::vector<double>& g_q_push,
                   const std::array<double, 2>& g_q_high, DualTensors& grad);

void backward_map(const ScorerConfig& cfg, const MapHeadTensors& t, int k,
                  const FeatureMap& f, const MapOut& out,
                  const std::vector<double>& g_q, MapHeadTensors& grad);

/// Argmax with ties broken by smallest (theta, y, x).
LowAction select_push(const std::vector<double>& q, int width, int height,
                      int k);
/// Argmax over the 2-vector; tie prefers PickPlace.
HighAction select_high(const std::array<double, 2>& q_high);

DualTensors zero_grad_dual(const ScorerConfig& cfg);
MapHeadTensors zero_grad_map(const ScorerConfig& cfg, int k);

void accumulate(DualTensors& into, const DualTensors& from);
void accumulate(MapHeadTensors& into, const MapHeadTensors& from);

/// params <- params - lr * grad, with global L2 gradient-norm clipping
/// (clip <= 0 disables). Throws on non-finite gradients.
void sgd_step(DualTensors& params, const DualTensors& grad, double lr,
              double clip);
void sgd_step(MapHeadTensors& params, const MapHeadTensors& grad, double lr,
              double clip);

// Named-tensor visitation in fixed order (checkpoints, init, tests).
template <typename T, typename F>
void visit_dual_tensors(T& t, F&& f) {
  f("trunk.w_color", t.trunk.w_color);
  f("trunk.b_color", t.trunk.b_color);
  f("trunk.w_height", t.trunk.w_height);
  f("trunk.b_height", t.trunk.b_height);
  f("push.w", t.w_push);
  f("push.b", t.b_push);
  f("high.w", t.w_high);
  f("high.b", t.b_high);
}

template <typename T, typename F>
void visit_pickplace_tensors(T& t, F&& f) {
  f("pick.trunk.w_color", t.pick.trunk.w_color);
  f("pick.trunk.b_color", t.pick.trunk.b_color);
  f("pick.trunk.w_height", t.pick.trunk.w_height);
  f("pick.trunk.b_height", t.pick.trunk.b_height);
  f("pick.head.w", t.pick.w_head);
  f("pick.head.b", t.pick.b_head);
  f("place.trunk.w_color", t.place.trunk.w_color);
  f("place.trunk.b_color", t.place.trunk.b_color);
  f("place.trunk.w_height", t.place.trunk.w_height);
  f("place.trunk.b_height", t.place.trunk.b_height);
  f("place.head.w", t.place.w_head);
  f("place.head.b", t.place.b_head);
}

// Versioned binary checkpoints: magic, config block, named little-endian
// f64 tensors, trailing checksum.
std::string dual_checkpoint_bytes(const DualScorer& s);
std::string pickplace_checkpoint_bytes(const PickPlaceScorer& s);
void save_dual_checkpoint(const DualScorer& s, const std::string& path);
void save_pickplace_checkpoint(const PickPlaceScorer& s,
                               const std::string& path);
DualScorer load_dual_checkpoint(const std::string& path);
PickPlaceScorer load_pickplace_checkpoint(const std::string& path);

/// Checksum of a scorer's full parameter state (freeze checks).
uint64_t param_hash(const DualScorer& s);
uint64_t param_hash(const PickPlaceScorer& s);

}  // namespace hclm
