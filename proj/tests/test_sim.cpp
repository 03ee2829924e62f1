#include <doctest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "hclm/sim.hpp"

using namespace hclm;

namespace {

WorldState empty_world(int w = 12, int h = 12) { return WorldState(w, h); }

WorldState with_stack(WorldState s, int x, int y, std::vector<int> colors) {
  s.stacks[s.idx(x, y)] = std::move(colors);
  return s;
}

WorldState random_world(Rng& rng, int w = 10, int h = 10) {
  WorldState s(w, h);
  for (int i = 0; i < w * h; ++i) {
    if (rng.next_double() < 0.3) {
      const int n = 1 + rng.uniform_int(3);
      for (int b = 0; b < n; ++b) s.stacks[i].push_back(1 + rng.uniform_int(8));
    }
  }
  return s;
}

const SimConfig kSim;

}  // namespace

TEST_CASE("push: lone block rides the sweep, no block lowered") {
  WorldState s = with_stack(empty_world(), 5, 5, {2});
  const PushResult r = apply_push(s, 4, 5, 0, kSim);  // eastward
  CHECK_FALSE(r.push_success);
  CHECK(r.state.stack_height(5, 5) == 0);
  CHECK(r.state.stack_height(8, 5) == 1);
  CHECK(r.state.top_color(8, 5) == 2);
  CHECK(r.state.total_blocks() == 1);
}

TEST_CASE("push: through a stack of two lowers the top block") {
  WorldState s = with_stack(empty_world(), 5, 5, {2, 1});
  const PushResult r = apply_push(s, 4, 5, 0, kSim);
  CHECK(r.push_success);
  CHECK(r.state.stack_height(5, 5) == 1);
  CHECK(r.state.top_color(5, 5) == 2);  // buried block resurfaces
  CHECK(r.state.stack_height(8, 5) == 1);
  CHECK(r.state.top_color(8, 5) == 1);
}

TEST_CASE("push: empty sweep is a no-op failure") {
  const WorldState s = empty_world();
  const PushResult r = apply_push(s, 4, 5, 0, kSim);
  CHECK_FALSE(r.push_success);
  CHECK(r.state == s);
}

TEST_CASE("push: out-of-bounds start is a no-op failure") {
  WorldState s = with_stack(empty_world(), 5, 5, {2});
  const PushResult r = apply_push(s, -1, 5, 0, kSim);
  CHECK_FALSE(r.push_success);
  CHECK(r.state == s);
}

TEST_CASE("push: blocks stop at the grid edge") {
  WorldState s = with_stack(empty_world(), 11, 5, {2});
  const PushResult r = apply_push(s, 10, 5, 0, kSim);
  CHECK_FALSE(r.push_success);
  CHECK(r.state.stack_height(11, 5) == 1);
}

TEST_CASE("push: displacing onto a tall stack topples along the scan order") {
  // Hand-simulated sweep. i=1: the lone block at (5,5) meets the 2-stack at
  // (6,5) and topples east onto (7,5). i=2: (6,5)'s grey top lands on (7,5)
  // at the same level. i=3: (7,5)'s grey top drops to the empty (8,5), which
  // lowers it and makes the push successful.
  WorldState s = with_stack(empty_world(), 5, 5, {2});
  s = with_stack(std::move(s), 6, 5, {1, 1});
  const PushResult r = apply_push(s, 4, 5, 0, kSim);
  CHECK(r.push_success);
  CHECK(r.state.stack_height(5, 5) == 0);
  CHECK(r.state.stacks[r.state.idx(6, 5)] == std::vector<int>{1});
  CHECK(r.state.stacks[r.state.idx(7, 5)] == std::vector<int>{2});
  CHECK(r.state.stacks[r.state.idx(8, 5)] == std::vector<int>{1});
  CHECK(r.state.total_blocks() == 3);
}

TEST_CASE("push: topple scan skips higher neighbors") {
  // Target stack at (6,5) is height 3; east neighbor (7,5) is height 3 too,
  // so the block falls to the next clockwise neighbor (7,6) instead. Its
  // level is unchanged (0 -> 0), so the push does not count as a success.
  WorldState s = with_stack(empty_world(), 5, 5, {2});
  s = with_stack(std::move(s), 6, 5, {1, 1, 1});
  s = with_stack(std::move(s), 7, 5, {1, 1, 1});
  const SimConfig short_push{1, 8, 4};  // single-cell sweep isolates one event
  const PushResult r = apply_push(s, 4, 5, 0, short_push);
  CHECK(r.state.stack_height(7, 6) == 1);
  CHECK(r.state.top_color(7, 6) == 2);
  CHECK(r.state.stack_height(6, 5) == 3);
  CHECK_FALSE(r.push_success);
}

TEST_CASE("push: diagonal direction sweeps diagonally") {
  WorldState s = with_stack(empty_world(), 5, 5, {2});
  const PushResult r = apply_push(s, 4, 4, 1, kSim);  // SE
  CHECK(r.state.stack_height(8, 8) == 1);
  CHECK_FALSE(r.push_success);
}

TEST_CASE("pick: unit stack moves into the gripper") {
  WorldState s = with_stack(empty_world(), 3, 3, {2});
  const PickResult r = apply_pick(s, 3, 3);
  CHECK(r.pick_success);
  CHECK(r.state.held == 2);
  CHECK(r.state.stack_height(3, 3) == 0);
}

TEST_CASE("pick: only the top of a stack is reachable") {
  WorldState s = with_stack(empty_world(), 3, 3, {2, 1});
  const PickResult r = apply_pick(s, 3, 3);
  CHECK(r.pick_success);
  CHECK(r.state.held == 1);  // the grey top, not the buried target
  CHECK(r.state.top_color(3, 3) == 2);
}

TEST_CASE("pick: empty cell fails without changing state") {
  const WorldState s = empty_world();
  const PickResult r = apply_pick(s, 3, 3);
  CHECK_FALSE(r.pick_success);
  CHECK(r.state == s);
}

TEST_CASE("pick: contract violations throw") {
  WorldState s = empty_world();
  s.held = 2;
  CHECK_THROWS_AS(apply_pick(s, 3, 3), std::logic_error);
  CHECK_THROWS_AS(apply_pick(empty_world(), -1, 0), std::logic_error);
}

TEST_CASE("place: onto an empty cell") {
  WorldState s = empty_world();
  s.held = 2;
  const PlaceResult r = apply_place(s, 2, 2, kSim);
  CHECK(r.place_success);
  CHECK(r.state.held == 0);
  CHECK(r.state.stack_height(2, 2) == 1);
  CHECK(r.state.top_color(2, 2) == 2);
}

TEST_CASE("place: stacks on top") {
  WorldState s = with_stack(empty_world(), 2, 2, {4});
  s.held = 2;
  const PlaceResult r = apply_place(s, 2, 2, kSim);
  CHECK(r.state.stacks[r.state.idx(2, 2)] == std::vector<int>{4, 2});
}

TEST_CASE("place: onto a full stack topples to a neighbor") {
  WorldState s = with_stack(empty_world(), 2, 2, {1, 1, 1, 1});
  s.held = 2;
  const PlaceResult r = apply_place(s, 2, 2, kSim);
  CHECK(r.place_success);
  CHECK(r.state.stack_height(2, 2) == 4);
  CHECK(r.state.stack_height(3, 2) == 1);  // east scan starts the topple
  CHECK(r.state.top_color(3, 2) == 2);
}

TEST_CASE("place: empty gripper is a caller bug") {
  CHECK_THROWS_AS(apply_place(empty_world(), 2, 2, kSim), std::logic_error);
}

TEST_CASE("render: empty world is all zeros") {
  const GridObservation o = render(empty_world(4, 4));
  for (int v : o.heights) CHECK(v == 0);
  for (int v : o.top_color) CHECK(v == 0);
  CHECK(o.held == 0);
}

TEST_CASE("render: only the stack top is visible") {
  WorldState s = with_stack(empty_world(), 3, 3, {2, 1});
  const GridObservation o = render(s);
  CHECK(o.heights[o.idx(3, 3)] == 2);
  CHECK(o.top_color[o.idx(3, 3)] == 1);
}

TEST_CASE("render: uncovered fixtures show their color at height zero") {
  WorldState s = empty_world();
  s.fixtures[s.idx(4, 4)] = 8;
  GridObservation o = render(s);
  CHECK(o.heights[o.idx(4, 4)] == 0);
  CHECK(o.top_color[o.idx(4, 4)] == 8);
  // covered fixture disappears
  s.stacks[s.idx(4, 4)].push_back(1);
  o = render(s);
  CHECK(o.top_color[o.idx(4, 4)] == 1);
}

TEST_CASE("render: heights equal stack lengths and the height/color rule "
          "holds on fixture-free cells") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const WorldState s = random_world(rng);
    const GridObservation o = render(s);
    for (int i = 0; i < s.width * s.height; ++i) {
      CHECK(o.heights[i] == static_cast<int>(s.stacks[i].size()));
      CHECK((o.top_color[i] == 0) == (o.heights[i] == 0));
    }
  }
}

TEST_CASE("scatter: zero blocks is the identity") {
  Rng rng(1);
  const WorldState s = empty_world();
  CHECK(scatter_clutter(s, {{5, 5}}, 0, rng) == s);
}

TEST_CASE("scatter: at least half land directly on target stacks") {
  const WorldState base = with_stack(empty_world(), 5, 5, {2});
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    const WorldState s = scatter_clutter(base, {{5, 5}}, 6, rng);
    int on_target = 0;
    for (int b : s.stacks[s.idx(5, 5)])
      if (b == kColorGrey) ++on_target;
    CHECK(on_target >= 3);
    CHECK(s.total_blocks() == 1 + 6);
  }
}

TEST_CASE("scatter: neighborhood blocks stay within the 3x3 box") {
  const WorldState base = with_stack(empty_world(), 5, 5, {2});
  Rng rng(77);
  const WorldState s = scatter_clutter(base, {{5, 5}}, 12, rng);
  for (int y = 0; y < s.height; ++y)
    for (int x = 0; x < s.width; ++x) {
      int grey = 0;
      for (int b : s.stacks[s.idx(x, y)])
        if (b == kColorGrey) ++grey;
      if (grey > 0) {
        CHECK(std::abs(x - 5) <= 1);
        CHECK(std::abs(y - 5) <= 1);
      }
    }
}

TEST_CASE("bury_targets: every target ends occluded") {
  WorldState base = with_stack(empty_world(), 5, 5, {2});
  base = with_stack(std::move(base), 7, 7, {3});
  Rng rng(9);
  const WorldState s = bury_targets(base, {{5, 5}, {7, 7}}, 6, rng);
  CHECK(s.top_color(5, 5) == kColorGrey);
  CHECK(s.top_color(7, 7) == kColorGrey);
  CHECK(s.total_blocks() == 2 + 6);
}

TEST_CASE("property: block conservation across all operations") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    WorldState s = random_world(rng);
    const int before = s.total_blocks();
    const int op = rng.uniform_int(3);
    if (op == 0) {
      const PushResult r = apply_push(s, rng.uniform_int(10), rng.uniform_int(10),
                                      rng.uniform_int(8), kSim);
      CHECK(r.state.total_blocks() == before);
    } else if (op == 1) {
      const PickResult r = apply_pick(s, rng.uniform_int(10), rng.uniform_int(10));
      CHECK(r.state.total_blocks() == before);
    } else {
      s.held = 2;
      const PlaceResult r =
          apply_place(s, rng.uniform_int(10), rng.uniform_int(10), kSim);
      CHECK(r.state.total_blocks() == before + 1);
    }
  }
}

TEST_CASE("property: operations are deterministic") {
  Rng rng(32);
  for (int trial = 0; trial < 50; ++trial) {
    const WorldState s = random_world(rng);
    const int x = rng.uniform_int(10), y = rng.uniform_int(10),
              t = rng.uniform_int(8);
    const PushResult a = apply_push(s, x, y, t, kSim);
    const PushResult b = apply_push(s, x, y, t, kSim);
    CHECK(a.state == b.state);
    CHECK(a.push_success == b.push_success);
  }
}

TEST_CASE("property: pick then place at the same cell restores the state") {
  Rng rng(33);
  int checked = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const WorldState s = random_world(rng);
    const int x = rng.uniform_int(10), y = rng.uniform_int(10);
    if (s.stack_height(x, y) == 0 || s.stack_height(x, y) > kSim.max_stack)
      continue;  // empty pick or re-place would topple
    const PickResult p = apply_pick(s, x, y);
    REQUIRE(p.pick_success);
    const PlaceResult q = apply_place(p.state, x, y, kSim);
    CHECK(q.state == s);
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("scene files round trip") {
  Rng rng(41);
  Scene scene;
  scene.state = random_world(rng);
  scene.state.fixtures[scene.state.idx(2, 2)] = 9;
  scene.state.held = 3;
  scene.seed = 12345;
  scene.n_additional = 6;
  const Scene back = scene_from_text(scene_to_text(scene));
  CHECK(back.state == scene.state);
  CHECK(back.seed == scene.seed);
  CHECK(back.n_additional == scene.n_additional);
  CHECK_THROWS(scene_from_text("scene v2\nend\n"));
  CHECK_THROWS(scene_from_text("scene v1\ngrid 4 4\n"));  // missing end
}
