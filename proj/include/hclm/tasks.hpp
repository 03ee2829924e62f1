#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hclm/sim.hpp"
#include "hclm/types.hpp"

namespace hclm {

/// One ordered subtask: put a block of `color` either at an exact position
/// (marker cell + stack level) or anywhere inside a fixture zone.
struct GoalSpec {
  enum class Kind { AtMarkerZ, InZoneCount };
  Kind kind = Kind::AtMarkerZ;
  int color = 0;
  int fixture_id = 0;
  int marker_index = 0;  // which marker cell, in (y, x) order
  int z = 0;             // required stack level for AtMarkerZ
  int count = 1;         // required in-zone count for InZoneCount
};

struct TaskSpec {
  std::string name;
  int width = 12;
  int height = 12;
  int n_additional = 6;
  int max_steps = 0;
  std::vector<GoalSpec> subtasks;
  /// Fresh instance; clutter is added only when `cluttered` is true.
  std::function<WorldState(Rng&, bool cluttered)> build;
};

inline const std::vector<std::string>& task_names() {
  static const std::vector<std::string> names = {
      "block-insertion",     "place-red-in-green", "align-box-corner",
      "stack-block-pyramid", "block-stacking",     "packing-boxes"};
  return names;
}

/// Grid analogs of the six tasks. `demo_palette` swaps the held-out block
/// colors of the unseen-object tasks for colors the demo set is allowed to
/// contain. Throws on an unknown name.
TaskSpec make_task(const std::string& name, int width, int height,
                   int n_additional, bool demo_palette = false);

/// Pyramid variant whose build drops one grey block on every target before
/// scattering the rest, so all six targets start occluded.
TaskSpec make_buried_pyramid(int width, int height, int n_additional,
                             bool demo_palette = false);

bool subtask_satisfied(const GoalSpec& goal, const WorldState& state);

/// Number of subtasks satisfied in order, stopping at the first unsatisfied.
int satisfied_prefix(const TaskSpec& spec, const WorldState& state);
double progress(const TaskSpec& spec, const WorldState& state);
double progress_delta(const TaskSpec& spec, const WorldState& before,
                      const WorldState& after);

/// True iff the picked block has the next unsatisfied subtask's color and
/// that subtask's goal holds afterwards. Requires action.high == PickPlace.
bool pickplace_success(const TaskSpec& spec, const Action& action,
                       const WorldState& before, const WorldState& after);

struct OracleAction {
  Cell pick;
  Cell place;
};

/// Expert pick&place for the next subtask, or nothing when its target block
/// is occluded (not the top of its stack) or the landing spot is unusable.
std::optional<OracleAction> oracle_action(const TaskSpec& spec,
                                          const WorldState& state);

struct DemoStep {
  GridObservation obs;      // before the pick
  Cell pick;
  GridObservation obs_mid;  // after the pick, held set
  Cell place;
};

struct DemoEpisode {
  std::vector<DemoStep> steps;
  bool stalled = false;
  double final_progress = 0.0;
};

/// Plays the oracle until the task completes, it stalls, or max_steps runs
/// out. Stalled episodes are truncated and flagged.
DemoEpisode run_oracle_episode(const TaskSpec& spec, Rng& rng, bool cluttered,
                               const SimConfig& sim);

// Demo files: line-delimited observation/action records.
void write_demos(const std::string& path, const std::string& task_name,
                 const std::vector<DemoEpisode>& demos);
std::vector<DemoEpisode> read_demos(const std::string& path,
                                    std::string* task_name_out = nullptr);

std::vector<Cell> find_fixture_cells(const WorldState& state, int fixture_id);

}  // namespace hclm
