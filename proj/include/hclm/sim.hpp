#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "hclm/rng.hpp"
#include "hclm/types.hpp"

namespace hclm {

struct Cell {
  int x = 0;
  int y = 0;
  bool operator==(const Cell&) const = default;
};

/// Push stroke geometry: how many cells the front sweeps and how many
/// discrete directions exist. Directions are the 8 unit offsets (4 cardinal
/// + 4 diagonal) by default; k_push == 4 restricts to cardinals.
struct SimConfig {
  int push_length = 3;
  int k_push = 8;
  int max_stack = 4;
};

/// Unit offset for direction index theta. theta counts clockwise from east
/// (x right, y down): 0=E 1=SE 2=S 3=SW 4=W 5=NW 6=N 7=NE.
std::array<int, 2> push_dir(int theta, int k_push);

/// Full world state. Only the top of each stack is visible after render,
/// which is what buries occluded blocks.
struct WorldState {
  int width = 0;
  int height = 0;
  std::vector<std::vector<int>> stacks;  // per cell, bottom to top color ids
  std::vector<int> fixtures;             // fixture ids, 0 = none
  int held = 0;
  int step_count = 0;

  WorldState() = default;
  WorldState(int w, int h)
      : width(w), height(h), stacks(w * h), fixtures(w * h, 0) {}

  int idx(int x, int y) const { return y * width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  int stack_height(int x, int y) const {
    return static_cast<int>(stacks[idx(x, y)].size());
  }
  int top_color(int x, int y) const {
    const auto& s = stacks[idx(x, y)];
    return s.empty() ? kColorEmpty : s.back();
  }
  /// Blocks on the table plus the held one, for conservation checks.
  int total_blocks() const;
  bool operator==(const WorldState&) const = default;
};

struct PushResult {
  WorldState state;
  bool push_success = false;
};

struct PickResult {
  WorldState state;
  bool pick_success = false;
};

struct PlaceResult {
  WorldState state;
  bool place_success = false;
};

/// Sweeps a 1-cell front from (x,y) for cfg.push_length cells along theta.
/// Each swept cell's top block is displaced one cell along theta; a block
/// displaced onto a stack of height >= 2 topples to the first empty-or-lower
/// 8-neighbor (scan starts at theta, then clockwise). Blocks meeting the
/// grid edge stay put. Success iff some block's z-level strictly decreased.
/// An out-of-bounds start is a no-op with push_success=false.
PushResult apply_push(const WorldState& state, int x, int y, int theta,
                      const SimConfig& cfg);

/// Removes the top block at (x,y) into the gripper. Picking an empty cell
/// fails and leaves the state unchanged. Requires held empty and (x,y) in
/// bounds (throws std::logic_error otherwise).
PickResult apply_pick(const WorldState& state, int x, int y);

/// Appends the held block to the stack at (x,y); if that stack is already
/// at cfg.max_stack or taller the block topples as in apply_push (scan
/// starts east). Requires held non-empty and (x,y) in bounds (throws
/// std::logic_error otherwise).
PlaceResult apply_place(const WorldState& state, int x, int y,
                        const SimConfig& cfg);

/// Top-down view: heights are stack lengths; top colors are stack tops,
/// or the fixture id where an empty cell has a fixture.
GridObservation render(const WorldState& state);

/// Drops n_additional grey blocks around the target cells: the first
/// ceil(n/2) land directly on target stacks (uniform over targets), the
/// rest land uniformly in the targets' 3x3 neighborhoods.
WorldState scatter_clutter(const WorldState& state,
                           const std::vector<Cell>& targets, int n_additional,
                           Rng& rng);

/// Drops one grey block on every target (used by the fully-buried task
/// variants), then scatters the remaining n_additional - |targets|.
WorldState bury_targets(const WorldState& state,
                        const std::vector<Cell>& targets, int n_additional,
                        Rng& rng);

// Scene files: plain-text description of a world plus the metadata needed
// to regenerate it.
struct Scene {
  WorldState state;
  uint64_t seed = 0;
  int n_additional = 0;
};

std::string scene_to_text(const Scene& scene);
Scene scene_from_text(const std::string& text);
void save_scene(const Scene& scene, const std::string& path);
Scene load_scene(const std::string& path);

}  // namespace hclm
