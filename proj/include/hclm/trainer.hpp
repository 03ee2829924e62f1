#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hclm/replay.hpp"
#include "hclm/rollout.hpp"
#include "hclm/scorer.hpp"
#include "hclm/tasks.hpp"
#include "hclm/updates.hpp"

namespace hclm {

struct EpsilonSchedule {
  double start = 0.5;
  double end = 0.1;
  int total = 1;
};

/// Linear interpolation; reaches `end` exactly at n == total.
double epsilon(const EpsilonSchedule& s, int n);

struct TrainConfig {
  // Imitation phase (pick & place heads).
  int bc_epochs = 100;
  double bc_lr = 1e-2;
  int demo_count = 100;
  int bc_val_demos = 20;

  // Q-learning phase (dual scorer).
  int hrl_epochs = 200;
  int episodes_per_epoch = 10;
  double hrl_lr = 1e-3;
  // The pooled high head sees features scaled by 1/(H*W); its weights need
  // a matching learning-rate boost to reach a useful magnitude.
  double high_lr_scale = 64.0;
  double eps_high = 1.0;  // high-level exploration stays fully random
  double eps_push_start = 0.5;
  double eps_push_end = 0.1;
  int tau = -1;  // update-changing threshold; <0 means hrl_epochs / 2
  int batch = 16;
  int updates_per_episode = 20;
  double grad_clip = 10.0;
  double huber_delta = 1.0;
  int validation_episodes = 100;

  uint64_t train_seed = 1;
  uint64_t val_seed = 2;
  uint64_t test_seed = 3;
};

/// Ablation switches: NoSeq collapses the push update to a single-pixel,
/// single-angle TD error; NoTsus forces the high-level gate to 1.
enum class UpdateVariant { Full, NoSeq, NoTsus };

struct BcResult {
  PickPlaceScorer scorer;  // best validation checkpoint, then frozen
  double best_val_accuracy = 0.0;
  double best_train_accuracy = 0.0;
  int samples = 0;
};

std::vector<DemoEpisode> generate_demos(const TaskSpec& demo_spec, int count,
                                        const SimConfig& sim, Rng rng,
                                        std::ostream* log = nullptr);

/// Behavior cloning on oracle demos (non-cluttered scenes). Each epoch is a
/// shuffled pass of per-sample SGD over all demo steps; picks train on the
/// pre-pick observation, places on the post-pick one. Returns the checkpoint
/// with the best validation argmax accuracy.
BcResult train_bc(const TaskSpec& demo_spec,
                  const std::vector<DemoEpisode>& demos,
                  const ScorerConfig& scorer_cfg, const TrainConfig& cfg,
                  const SimConfig& sim, Rng rng, std::ostream* log = nullptr);

struct EpochStats {
  int epoch = 0;
  double eps_push = 0.0;
  double val_success_rate = 0.0;  // percent
  bool saved = false;
  double mean_push_loss = 0.0;
  double mean_high_loss = 0.0;
};

struct HrlResult {
  DualScorer best;
  double best_val_success = -1.0;  // percent
  std::vector<EpochStats> history;
  long long high_push_steps = 0;
  long long high_pick_steps = 0;
};

/// One prioritized batch update on the dual scorer: the push branch
/// minimizes the spatially extended TD error (only on push transitions),
/// the high branch the gated scalar TD error; both backprop into the shared
/// trunk, and sampled priorities are refreshed from the new TD magnitudes.
void hrl_batch_update(DualScorer& dual, PrioritizedBuffer& buffer,
                      Rng& replay_rng, const TrainConfig& cfg,
                      const SeqConfig& seq_cfg, const TsusConfig& tsus_cfg,
                      UpdateVariant variant, int epoch, double& push_loss,
                      double& high_loss);

/// Collects episodes with eps-greedy exploration, stores transitions in
/// prioritized replay, and after each episode runs batched updates via
/// hrl_batch_update. Validates greedily each epoch and keeps the best
/// checkpoint. The frozen pick/place scorer is never modified.
HrlResult train_hrl(const TaskSpec& task, const PickPlaceScorer& frozen,
                    const ScorerConfig& scorer_cfg, const TrainConfig& cfg,
                    const SeqConfig& seq_cfg, const SimConfig& sim,
                    UpdateVariant variant = UpdateVariant::Full,
                    std::ostream* log = nullptr);

/// Greedy validation pass (parallel over episodes, order-fixed reduction).
double validation_success_rate(const TaskSpec& task, const DualScorer& dual,
                               const PickPlaceScorer& frozen,
                               const SimConfig& sim, int episodes,
                               uint64_t seed);

}  // namespace hclm
