#include "hclm/tasks.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hclm {

namespace {

// Fixture ids. These share the color space with blocks; within any one task
// the ids are distinct from that task's block colors.
constexpr int kSocket = 8;
constexpr int kGreenZone = 3;
constexpr int kLFixture = 8;
constexpr int kCornerMark = 9;
constexpr int kMarker = 9;

constexpr int kRed = 2;

struct Region {
  int x_lo, x_hi, y_lo, y_hi;  // inclusive
};

Region left_region(int w, int h) { return {1, w / 2 - 2, 1, h - 2}; }
Region right_region(int w, int h) { return {w / 2 + 1, w - 2, 1, h - 2}; }

Cell draw_free_cell(const WorldState& s, Rng& rng, const Region& r) {
  for (int tries = 0; tries < 10000; ++tries) {
    Cell c{r.x_lo + rng.uniform_int(r.x_hi - r.x_lo + 1),
           r.y_lo + rng.uniform_int(r.y_hi - r.y_lo + 1)};
    const int i = s.idx(c.x, c.y);
    if (s.stacks[i].empty() && s.fixtures[i] == 0) return c;
  }
  throw std::runtime_error("draw_free_cell: no free cell found");
}

std::vector<Cell> place_blocks(WorldState& s, Rng& rng, const Region& r,
                               const std::vector<int>& colors) {
  std::vector<Cell> cells;
  for (int c : colors) {
    const Cell cell = draw_free_cell(s, rng, r);
    s.stacks[s.idx(cell.x, cell.y)].push_back(c);
    cells.push_back(cell);
  }
  return cells;
}

int count_in_zone(const WorldState& s, int fixture_id, int color) {
  int n = 0;
  for (const Cell& c : find_fixture_cells(s, fixture_id))
    for (int b : s.stacks[s.idx(c.x, c.y)])
      if (b == color) ++n;
  return n;
}

int default_max_steps(int subtask_count) { return 2 * subtask_count + 8; }

using BuildBody = std::function<std::vector<Cell>(WorldState&, Rng&)>;

// Wraps a body that lays out fixtures and target blocks; clutter lands on
// and around the returned target cells.
std::function<WorldState(Rng&, bool)> make_build(int w, int h, int n_add,
                                                 BuildBody body,
                                                 bool bury_all = false) {
  return [=](Rng& rng, bool cluttered) {
    WorldState s(w, h);
    const std::vector<Cell> targets = body(s, rng);
    if (cluttered && n_add > 0) {
      s = bury_all ? bury_targets(s, targets, n_add, rng)
                   : scatter_clutter(s, targets, n_add, rng);
    }
    return s;
  };
}

TaskSpec make_pyramid(int w, int h, int n_add, bool bury_all) {
  TaskSpec t;
  t.name = "stack-block-pyramid";
  t.width = w;
  t.height = h;
  t.n_additional = n_add;
  // 3-2-1 staircase on three marker cells; lower levels come first.
  t.subtasks = {
      {GoalSpec::Kind::AtMarkerZ, 2, kMarker, 0, 0, 1},
      {GoalSpec::Kind::AtMarkerZ, 3, kMarker, 1, 0, 1},
      {GoalSpec::Kind::AtMarkerZ, 4, kMarker, 2, 0, 1},
      {GoalSpec::Kind::AtMarkerZ, 5, kMarker, 0, 1, 1},
      {GoalSpec::Kind::AtMarkerZ, 6, kMarker, 1, 1, 1},
      {GoalSpec::Kind::AtMarkerZ, 7, kMarker, 0, 2, 1},
  };
  t.max_steps = default_max_steps(6);
  t.build = make_build(w, h, n_add, [w, h](WorldState& s, Rng& rng) {
    const Region lr = left_region(w, h);
    const int bx = lr.x_lo + rng.uniform_int(std::max(1, lr.x_hi - lr.x_lo - 1));
    const int by = lr.y_lo + rng.uniform_int(lr.y_hi - lr.y_lo + 1);
    for (int i = 0; i < 3; ++i) s.fixtures[s.idx(bx + i, by)] = kMarker;
    return place_blocks(s, rng, right_region(w, h), {2, 3, 4, 5, 6, 7});
  }, bury_all);
  return t;
}

}  // namespace

std::vector<Cell> find_fixture_cells(const WorldState& state, int fixture_id) {
  std::vector<Cell> cells;
  for (int y = 0; y < state.height; ++y)
    for (int x = 0; x < state.width; ++x)
      if (state.fixtures[state.idx(x, y)] == fixture_id)
        cells.push_back({x, y});
  return cells;  // row-major scan is already (y, x) sorted
}

TaskSpec make_task(const std::string& name, int width, int height,
                   int n_additional, bool demo_palette) {
  const int w = width, h = height;
  if (w < 8 || h < 8) throw std::invalid_argument("make_task: grid too small");
  TaskSpec t;
  t.name = name;
  t.width = w;
  t.height = h;
  t.n_additional = n_additional;

  if (name == "block-insertion") {
    t.subtasks = {{GoalSpec::Kind::AtMarkerZ, kRed, kSocket, 0, 0, 1}};
    t.max_steps = default_max_steps(1);
    t.build = make_build(w, h, n_additional, [w, h](WorldState& s, Rng& rng) {
      const Cell socket = draw_free_cell(s, rng, left_region(w, h));
      s.fixtures[s.idx(socket.x, socket.y)] = kSocket;
      return place_blocks(s, rng, right_region(w, h), {kRed});
    });
  } else if (name == "place-red-in-green") {
    t.subtasks = {{GoalSpec::Kind::InZoneCount, kRed, kGreenZone, 0, 0, 1},
                  {GoalSpec::Kind::InZoneCount, kRed, kGreenZone, 0, 0, 2},
                  {GoalSpec::Kind::InZoneCount, kRed, kGreenZone, 0, 0, 3}};
    t.max_steps = default_max_steps(3);
    t.build = make_build(w, h, n_additional, [w, h](WorldState& s, Rng& rng) {
      const Region lr = left_region(w, h);
      const int zx = lr.x_lo + rng.uniform_int(std::max(1, lr.x_hi - lr.x_lo));
      const int zy = lr.y_lo + rng.uniform_int(std::max(1, lr.y_hi - lr.y_lo));
      for (int dy = 0; dy < 2; ++dy)
        for (int dx = 0; dx < 2; ++dx)
          s.fixtures[s.idx(zx + dx, zy + dy)] = kGreenZone;
      return place_blocks(s, rng, right_region(w, h), {kRed, kRed, kRed});
    });
  } else if (name == "align-box-corner") {
    const int target = demo_palette ? 2 : 10;
    t.subtasks = {{GoalSpec::Kind::AtMarkerZ, target, kCornerMark, 0, 0, 1}};
    t.max_steps = default_max_steps(1);
    t.build =
        make_build(w, h, n_additional, [w, h, target](WorldState& s, Rng& rng) {
          const Region lr = left_region(w, h);
          const int cx = lr.x_lo + rng.uniform_int(std::max(1, lr.x_hi - lr.x_lo));
          const int cy = lr.y_lo + rng.uniform_int(std::max(1, lr.y_hi - lr.y_lo));
          // L elbow wraps the marked corner cell.
          s.fixtures[s.idx(cx + 1, cy)] = kLFixture;
          s.fixtures[s.idx(cx + 1, cy + 1)] = kLFixture;
          s.fixtures[s.idx(cx, cy + 1)] = kLFixture;
          s.fixtures[s.idx(cx, cy)] = kCornerMark;
          return place_blocks(s, rng, right_region(w, h), {target});
        });
  } else if (name == "stack-block-pyramid") {
    t = make_pyramid(w, h, n_additional, false);
  } else if (name == "block-stacking") {
    t.subtasks = {{GoalSpec::Kind::AtMarkerZ, 2, kMarker, 0, 0, 1},
                  {GoalSpec::Kind::AtMarkerZ, 3, kMarker, 0, 1, 1},
                  {GoalSpec::Kind::AtMarkerZ, 4, kMarker, 0, 2, 1},
                  {GoalSpec::Kind::AtMarkerZ, 5, kMarker, 0, 3, 1}};
    t.max_steps = default_max_steps(4);
    t.build = make_build(w, h, n_additional, [w, h](WorldState& s, Rng& rng) {
      const Cell m = draw_free_cell(s, rng, left_region(w, h));
      s.fixtures[s.idx(m.x, m.y)] = kMarker;
      return place_blocks(s, rng, right_region(w, h), {2, 3, 4, 5});
    });
  } else if (name == "packing-boxes") {
    const std::vector<int> colors =
        demo_palette ? std::vector<int>{2, 3, 4} : std::vector<int>{10, 11, 12};
    t.subtasks = {
        {GoalSpec::Kind::InZoneCount, colors[0], kMarker, 0, 0, 1},
        {GoalSpec::Kind::InZoneCount, colors[1], kMarker, 0, 0, 1},
        {GoalSpec::Kind::InZoneCount, colors[2], kMarker, 0, 0, 1}};
    t.max_steps = default_max_steps(3);
    t.build =
        make_build(w, h, n_additional, [w, h, colors](WorldState& s, Rng& rng) {
          const Region lr = left_region(w, h);
          const int zx = lr.x_lo + rng.uniform_int(std::max(1, lr.x_hi - lr.x_lo - 1));
          const int zy = lr.y_lo + rng.uniform_int(std::max(1, lr.y_hi - lr.y_lo));
          for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 3; ++dx)
              s.fixtures[s.idx(zx + dx, zy + dy)] = kMarker;
          return place_blocks(s, rng, right_region(w, h), colors);
        });
  } else {
    throw std::invalid_argument("make_task: unknown task '" + name + "'");
  }
  return t;
}

TaskSpec make_buried_pyramid(int width, int height, int n_additional,
                             bool demo_palette) {
  (void)demo_palette;  // same palette either way
  TaskSpec t = make_pyramid(width, height, n_additional, true);
  t.name = "buried-pyramid";
  return t;
}

bool subtask_satisfied(const GoalSpec& goal, const WorldState& state) {
  if (goal.kind == GoalSpec::Kind::AtMarkerZ) {
    const std::vector<Cell> markers = find_fixture_cells(state, goal.fixture_id);
    if (goal.marker_index >= static_cast<int>(markers.size())) return false;
    const Cell m = markers[goal.marker_index];
    const auto& stack = state.stacks[state.idx(m.x, m.y)];
    return static_cast<int>(stack.size()) > goal.z && stack[goal.z] == goal.color;
  }
  return count_in_zone(state, goal.fixture_id, goal.color) >= goal.count;
}

int satisfied_prefix(const TaskSpec& spec, const WorldState& state) {
  int k = 0;
  for (const GoalSpec& g : spec.subtasks) {
    if (!subtask_satisfied(g, state)) break;
    ++k;
  }
  return k;
}

double progress(const TaskSpec& spec, const WorldState& state) {
  if (spec.subtasks.empty()) return 1.0;
  return satisfied_prefix(spec, state) /
         static_cast<double>(spec.subtasks.size());
}

double progress_delta(const TaskSpec& spec, const WorldState& before,
                      const WorldState& after) {
  if (spec.subtasks.empty()) return 0.0;
  return (satisfied_prefix(spec, after) - satisfied_prefix(spec, before)) /
         static_cast<double>(spec.subtasks.size());
}

bool pickplace_success(const TaskSpec& spec, const Action& action,
                       const WorldState& before, const WorldState& after) {
  if (action.high != HighAction::PickPlace)
    throw std::logic_error("pickplace_success: action is not pick&place");
  const int k = satisfied_prefix(spec, before);
  if (k >= static_cast<int>(spec.subtasks.size())) return false;
  const GoalSpec& goal = spec.subtasks[k];
  const Cell pick{action.pick_or_push.x, action.pick_or_push.y};
  if (!before.in_bounds(pick.x, pick.y)) return false;
  if (before.top_color(pick.x, pick.y) != goal.color) return false;
  return subtask_satisfied(goal, after);
}

std::optional<OracleAction> oracle_action(const TaskSpec& spec,
                                          const WorldState& state) {
  const int k = satisfied_prefix(spec, state);
  if (k >= static_cast<int>(spec.subtasks.size())) return std::nullopt;
  const GoalSpec& goal = spec.subtasks[k];

  const std::vector<Cell> zone = find_fixture_cells(state, goal.fixture_id);

  // Landing spot first; without one the subtask is blocked anyway.
  std::optional<Cell> place;
  if (goal.kind == GoalSpec::Kind::AtMarkerZ) {
    if (goal.marker_index >= static_cast<int>(zone.size())) return std::nullopt;
    const Cell m = zone[goal.marker_index];
    if (state.stack_height(m.x, m.y) != goal.z) return std::nullopt;
    place = m;
  } else {
    int best_h = -1;
    for (const Cell& c : zone) {
      const int hh = state.stack_height(c.x, c.y);
      if (best_h < 0 || hh < best_h) {
        best_h = hh;
        place = c;
      }
    }
    if (!place.has_value()) return std::nullopt;
  }

  // The target block must be the top of its stack (occlusion rule) and not
  // already counted toward the goal.
  auto in_zone = [&](int x, int y) {
    return std::find(zone.begin(), zone.end(), Cell{x, y}) != zone.end();
  };
  for (int y = 0; y < state.height; ++y) {
    for (int x = 0; x < state.width; ++x) {
      if (state.top_color(x, y) != goal.color) continue;
      if (goal.kind == GoalSpec::Kind::InZoneCount && in_zone(x, y)) continue;
      if (goal.kind == GoalSpec::Kind::AtMarkerZ && x == place->x &&
          y == place->y)
        continue;
      return OracleAction{{x, y}, *place};
    }
  }
  return std::nullopt;
}

DemoEpisode run_oracle_episode(const TaskSpec& spec, Rng& rng, bool cluttered,
                               const SimConfig& sim) {
  DemoEpisode ep;
  WorldState state = spec.build(rng, cluttered);
  for (int step = 0; step < spec.max_steps; ++step) {
    if (progress(spec, state) >= 1.0) break;
    const auto act = oracle_action(spec, state);
    if (!act.has_value()) break;
    DemoStep d;
    d.obs = render(state);
    d.pick = act->pick;
    d.place = act->place;
    PickResult picked = apply_pick(state, act->pick.x, act->pick.y);
    if (!picked.pick_success) break;  // should not happen: pick is a stack top
    d.obs_mid = render(picked.state);
    PlaceResult placed = apply_place(picked.state, act->place.x, act->place.y, sim);
    state = std::move(placed.state);
    state.step_count += 1;
    ep.steps.push_back(std::move(d));
  }
  ep.final_progress = progress(spec, state);
  ep.stalled = ep.final_progress < 1.0;
  return ep;
}

void write_demos(const std::string& path, const std::string& task_name,
                 const std::vector<DemoEpisode>& demos) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "demoset v1 " << task_name << " " << demos.size() << "\n";
  for (size_t i = 0; i < demos.size(); ++i) {
    const DemoEpisode& ep = demos[i];
    out << "demo " << i << " " << ep.steps.size() << " "
        << (ep.stalled ? 1 : 0) << " " << format_double(ep.final_progress)
        << "\n";
    for (const DemoStep& s : ep.steps) {
      out << to_line(s.obs) << "\n";
      out << "pickplace " << s.pick.x << " " << s.pick.y << " " << s.place.x
          << " " << s.place.y << "\n";
      out << to_line(s.obs_mid) << "\n";
    }
  }
  out << "end\n";
}

std::vector<DemoEpisode> read_demos(const std::string& path,
                                    std::string* task_name_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("demos: empty file");
  std::istringstream hd(line);
  std::string tag, version, task_name;
  size_t count = 0;
  if (!(hd >> tag >> version >> task_name >> count) || tag != "demoset" ||
      version != "v1")
    throw std::runtime_error("demos: bad header");
  if (task_name_out) *task_name_out = task_name;

  std::vector<DemoEpisode> demos;
  demos.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    if (!std::getline(in, line)) throw std::runtime_error("demos: truncated");
    std::istringstream dh(line);
    size_t idx = 0, steps = 0;
    int stalled = 0;
    double fp = 0.0;
    if (!(dh >> tag >> idx >> steps >> stalled >> fp) || tag != "demo")
      throw std::runtime_error("demos: bad demo header");
    DemoEpisode ep;
    ep.stalled = stalled != 0;
    ep.final_progress = fp;
    for (size_t s = 0; s < steps; ++s) {
      DemoStep d;
      if (!std::getline(in, line)) throw std::runtime_error("demos: truncated");
      d.obs = obs_from_line(line);
      if (!std::getline(in, line)) throw std::runtime_error("demos: truncated");
      std::istringstream al(line);
      if (!(al >> tag >> d.pick.x >> d.pick.y >> d.place.x >> d.place.y) ||
          tag != "pickplace")
        throw std::runtime_error("demos: bad action line");
      if (!std::getline(in, line)) throw std::runtime_error("demos: truncated");
      d.obs_mid = obs_from_line(line);
      ep.steps.push_back(std::move(d));
    }
    demos.push_back(std::move(ep));
  }
  return demos;
}

}  // namespace hclm
