#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hclm {

// Color ids: 0 = empty, 1 = additional/grey clutter, 2.. = target and
// fixture colors.
constexpr int kColorEmpty = 0;
constexpr int kColorGrey = 1;

/// Per-cell top-down view of the scene: stack heights (the depth channel)
/// and the color of each stack's top block (the color channel). `held` is
/// the color currently in the gripper, 0 if none.
struct GridObservation {
  int width = 0;
  int height = 0;
  std::vector<int> heights;    // row-major, y * width + x
  std::vector<int> top_color;  // row-major, y * width + x
  int held = 0;

  int idx(int x, int y) const { return y * width + x; }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
  bool operator==(const GridObservation&) const = default;
};

enum class HighAction { Push = 0, PickPlace = 1 };

struct LowAction {
  int x = 0;
  int y = 0;
  int theta = 0;
  bool operator==(const LowAction&) const = default;
};

/// Two-part action: which primitive, plus where/how. `place` is present
/// exactly when high == PickPlace. `exploratory` marks a randomly sampled
/// low-level action.
struct Action {
  HighAction high = HighAction::Push;
  LowAction pick_or_push;
  std::optional<LowAction> place;
  bool exploratory = false;
  bool operator==(const Action&) const = default;
};

/// One replay record.
struct Transition {
  GridObservation obs;
  Action action;
  double reward = 0.0;
  GridObservation next_obs;
  double progress_delta = 0.0;
  bool done = false;
  bool push_success = false;
  bool pickplace_success = false;
  bool operator==(const Transition&) const = default;
};

/// Structural validity, checkable without the environment: bounds, theta
/// range, and the place-presence rule.
bool valid_action(const Action& a, int width, int height, int k_push,
                  int k_pick, int k_place);

// Canonical line-delimited serialization (one record per line, fields in
// fixed order, integers base-10, reals formatted with %.17g).
std::string to_line(const GridObservation& obs);
GridObservation obs_from_line(const std::string& line);

std::string to_line(const Transition& t);
Transition transition_from_line(const std::string& line);

std::string format_double(double v);

}  // namespace hclm
