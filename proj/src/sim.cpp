#include "hclm/sim.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace hclm {

namespace {

constexpr std::array<std::array<int, 2>, 8> kDirs = {{{1, 0},
                                                      {1, 1},
                                                      {0, 1},
                                                      {-1, 1},
                                                      {-1, 0},
                                                      {-1, -1},
                                                      {0, -1},
                                                      {1, -1}}};

// 8-direction index equivalent of (theta, k_push).
int dir8_index(int theta, int k_push) {
  if (k_push == 8) return theta;
  if (k_push == 4) return theta * 2;
  throw std::invalid_argument("push_dir: k_push must be 4 or 8");
}

// Moves `color` from src-top onto the cell at (x,y), toppling off to the
// first empty-or-lower 8-neighbor (scan from dir8, clockwise) when the
// receiving stack is `full_height` or taller. Returns the landing z.
int drop_block(WorldState& s, int color, int x, int y, int full_height,
               int scan_dir8) {
  int lx = x;
  int ly = y;
  const int h = s.stack_height(x, y);
  if (h >= full_height) {
    for (int i = 0; i < 8; ++i) {
      const auto& d = kDirs[(scan_dir8 + i) % 8];
      const int nx = x + d[0];
      const int ny = y + d[1];
      if (!s.in_bounds(nx, ny)) continue;
      if (s.stack_height(nx, ny) < h) {
        lx = nx;
        ly = ny;
        break;
      }
    }
  }
  auto& stack = s.stacks[s.idx(lx, ly)];
  stack.push_back(color);
  return static_cast<int>(stack.size()) - 1;
}

}  // namespace

std::array<int, 2> push_dir(int theta, int k_push) {
  return kDirs[dir8_index(theta, k_push)];
}

int WorldState::total_blocks() const {
  int n = held != 0 ? 1 : 0;
  for (const auto& s : stacks) n += static_cast<int>(s.size());
  return n;
}

PushResult apply_push(const WorldState& state, int x, int y, int theta,
                      const SimConfig& cfg) {
  if (theta < 0 || theta >= cfg.k_push)
    throw std::invalid_argument("apply_push: theta out of range");
  if (!state.in_bounds(x, y)) return {state, false};

  WorldState s = state;
  const int d8 = dir8_index(theta, cfg.k_push);
  const auto& u = kDirs[d8];
  bool success = false;

  // The gripper starts at (x,y); the front sweeps the next push_length cells.
  for (int i = 1; i <= cfg.push_length; ++i) {
    const int cx = x + i * u[0];
    const int cy = y + i * u[1];
    if (!s.in_bounds(cx, cy)) break;
    auto& src = s.stacks[s.idx(cx, cy)];
    if (src.empty()) continue;

    const int z_from = static_cast<int>(src.size()) - 1;
    const int color = src.back();
    const int dx = cx + u[0];
    const int dy = cy + u[1];
    if (!s.in_bounds(dx, dy)) continue;  // stops at the edge

    src.pop_back();
    const int z_to = drop_block(s, color, dx, dy, 2, d8);
    if (z_to < z_from) success = true;
  }
  return {std::move(s), success};
}

PickResult apply_pick(const WorldState& state, int x, int y) {
  if (state.held != 0) throw std::logic_error("apply_pick: gripper not empty");
  if (!state.in_bounds(x, y))
    throw std::logic_error("apply_pick: cell out of bounds");

  WorldState s = state;
  auto& stack = s.stacks[s.idx(x, y)];
  if (stack.empty()) return {std::move(s), false};
  s.held = stack.back();
  stack.pop_back();
  return {std::move(s), true};
}

PlaceResult apply_place(const WorldState& state, int x, int y,
                        const SimConfig& cfg) {
  if (state.held == 0) throw std::logic_error("apply_place: gripper empty");
  if (!state.in_bounds(x, y))
    throw std::logic_error("apply_place: cell out of bounds");

  WorldState s = state;
  drop_block(s, s.held, x, y, cfg.max_stack, 0);
  s.held = 0;
  return {std::move(s), true};
}

GridObservation render(const WorldState& state) {
  GridObservation o;
  o.width = state.width;
  o.height = state.height;
  o.held = state.held;
  const int n = state.width * state.height;
  o.heights.resize(n);
  o.top_color.resize(n);
  for (int i = 0; i < n; ++i) {
    const auto& s = state.stacks[i];
    o.heights[i] = static_cast<int>(s.size());
    o.top_color[i] = s.empty() ? state.fixtures[i] : s.back();
  }
  return o;
}

WorldState scatter_clutter(const WorldState& state,
                           const std::vector<Cell>& targets, int n_additional,
                           Rng& rng) {
  if (n_additional < 0)
    throw std::invalid_argument("scatter_clutter: n_additional < 0");
  if (n_additional == 0 || targets.empty()) return state;

  WorldState s = state;
  const int direct = (n_additional + 1) / 2;
  for (int i = 0; i < n_additional; ++i) {
    const Cell t = targets[rng.uniform_int(static_cast<int>(targets.size()))];
    Cell c = t;
    if (i >= direct) {
      do {
        c.x = t.x + rng.uniform_int(3) - 1;
        c.y = t.y + rng.uniform_int(3) - 1;
      } while (!s.in_bounds(c.x, c.y));
    }
    s.stacks[s.idx(c.x, c.y)].push_back(kColorGrey);
  }
  return s;
}

WorldState bury_targets(const WorldState& state,
                        const std::vector<Cell>& targets, int n_additional,
                        Rng& rng) {
  WorldState s = state;
  for (const Cell& t : targets) s.stacks[s.idx(t.x, t.y)].push_back(kColorGrey);
  const int rest = n_additional - static_cast<int>(targets.size());
  if (rest > 0) s = scatter_clutter(s, targets, rest, rng);
  return s;
}

std::string scene_to_text(const Scene& scene) {
  const WorldState& s = scene.state;
  std::string out;
  out += "scene v1\n";
  out += "grid " + std::to_string(s.width) + " " + std::to_string(s.height) +
         "\n";
  out += "seed " + std::to_string(scene.seed) + "\n";
  out += "clutter " + std::to_string(scene.n_additional) + "\n";
  out += "held " + std::to_string(s.held) + "\n";
  out += "steps " + std::to_string(s.step_count) + "\n";
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      const int i = s.idx(x, y);
      if (s.fixtures[i] != 0) {
        out += "fixture " + std::to_string(x) + " " + std::to_string(y) + " " +
               std::to_string(s.fixtures[i]) + "\n";
      }
      if (!s.stacks[i].empty()) {
        out += "stack " + std::to_string(x) + " " + std::to_string(y);
        for (int c : s.stacks[i]) out += " " + std::to_string(c);
        out += "\n";
      }
    }
  }
  out += "end\n";
  return out;
}

Scene scene_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "scene v1")
    throw std::runtime_error("scene: bad header");
  Scene scene;
  WorldState& s = scene.state;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "end") return scene;
    if (tag == "grid") {
      int w, h;
      if (!(ls >> w >> h)) throw std::runtime_error("scene: bad grid");
      s = WorldState(w, h);
    } else if (tag == "seed") {
      ls >> scene.seed;
    } else if (tag == "clutter") {
      ls >> scene.n_additional;
    } else if (tag == "held") {
      ls >> s.held;
    } else if (tag == "steps") {
      ls >> s.step_count;
    } else if (tag == "fixture") {
      int x, y, id;
      if (!(ls >> x >> y >> id) || !s.in_bounds(x, y))
        throw std::runtime_error("scene: bad fixture");
      s.fixtures[s.idx(x, y)] = id;
    } else if (tag == "stack") {
      int x, y, c;
      if (!(ls >> x >> y) || !s.in_bounds(x, y))
        throw std::runtime_error("scene: bad stack");
      while (ls >> c) s.stacks[s.idx(x, y)].push_back(c);
    } else {
      throw std::runtime_error("scene: unknown tag '" + tag + "'");
    }
  }
  throw std::runtime_error("scene: missing end");
}

void save_scene(const Scene& scene, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << scene_to_text(scene);
}

Scene load_scene(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return scene_from_text(ss.str());
}

}  // namespace hclm
