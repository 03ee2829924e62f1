#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "hclm/rollout.hpp"
#include "hclm/trainer.hpp"

namespace hclm {

enum class PolicyVariant {
  HCLM,
  PickPlaceOnly,
  PickPlaceRandomPush,
  Alternating,
  NoTSUS,
  NoSEQ,
};

std::string variant_name(PolicyVariant v);
PolicyVariant parse_variant(const std::string& name);

/// Training-time ablation switch implied by the variant (NoTSUS/NoSEQ train
/// their own dual scorer; everything else uses the full update).
UpdateVariant update_variant_for(PolicyVariant v);

struct EpisodeRecord {
  int index = 0;
  int steps = 0;
  int pushes = 0;
  bool success = false;
  double final_progress = 0.0;
};

struct EvalReport {
  std::string task;
  std::string variant;
  int episodes = 0;
  int successes = 0;
  double success_rate = 0.0;        // percent
  double avg_episode_length = 0.0;  // failures run to max_steps
  std::vector<EpisodeRecord> records;
};

using PolicyFactory = std::function<std::unique_ptr<Policy>()>;

PolicyFactory make_policy_factory(PolicyVariant v, const DualScorer* dual,
                                  const PickPlaceScorer* pickplace);

/// Greedy rollouts on cluttered instances seeded per episode; parallel over
/// episodes with an order-fixed reduction, so reports are deterministic.
EvalReport evaluate(const TaskSpec& spec, const SimConfig& sim,
                    const PolicyFactory& factory, int episodes, uint64_t seed,
                    const std::string& variant_label, bool cluttered = true);

/// Re-evaluates the same policy at each clutter count without retraining.
std::vector<EvalReport> clutter_sweep(const std::string& task_name, int width,
                                      int height, const SimConfig& sim,
                                      const PolicyFactory& factory,
                                      const std::vector<int>& counts,
                                      int episodes, uint64_t seed,
                                      const std::string& variant_label);

/// Task lookup covering the six canonical names plus "buried-pyramid".
TaskSpec task_by_name(const std::string& name, int width, int height,
                      int n_additional, bool demo_palette = false);

std::string report_to_text(const EvalReport& r);
EvalReport report_from_text(const std::string& text);

/// One text frame per step (initial state first) from a stream of
/// transition lines; optionally emits P3 portable-pixmap images alongside.
struct RenderResult {
  std::vector<std::string> ascii_frames;
  std::vector<std::string> ppm_frames;
};

RenderResult render_episode(std::istream& transitions, int cell_pixels = 8);

/// Full run configuration, one `key value` pair per line; unknown keys are
/// rejected.
struct RunConfig {
  std::string task = "block-insertion";
  int grid_w = 12;
  int grid_h = 12;
  int n_additional = 6;
  SimConfig sim;
  ScorerConfig scorer;
  SeqConfig seq;
  TrainConfig train;
  int eval_episodes = 100;
};

std::string config_to_text(const RunConfig& c);
RunConfig config_from_text(const std::string& text);
RunConfig load_config(const std::string& path);
void save_config(const RunConfig& c, const std::string& path);

}  // namespace hclm
