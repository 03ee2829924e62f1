#include <doctest.h>

#include <filesystem>
#include <set>

#include "hclm/tasks.hpp"

using namespace hclm;

namespace {
const SimConfig kSim;
}

TEST_CASE("tasks: subtask counts and step budgets") {
  const TaskSpec pyramid = make_task("stack-block-pyramid", 12, 12, 6);
  CHECK(pyramid.subtasks.size() == 6);
  CHECK(pyramid.max_steps == 20);

  const TaskSpec insertion = make_task("block-insertion", 12, 12, 6);
  CHECK(insertion.subtasks.size() == 1);
  CHECK(insertion.max_steps == 10);

  CHECK(make_task("place-red-in-green", 12, 12, 6).subtasks.size() == 3);
  CHECK(make_task("align-box-corner", 12, 12, 6).subtasks.size() == 1);
  CHECK(make_task("block-stacking", 12, 12, 6).subtasks.size() == 4);
  CHECK(make_task("packing-boxes", 12, 12, 6).subtasks.size() == 3);

  CHECK_THROWS(make_task("unknown-task", 12, 12, 6));
}

TEST_CASE("tasks: every build starts at progress zero") {
  for (const std::string& name : task_names()) {
    const TaskSpec t = make_task(name, 12, 12, 6);
    for (uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed);
      CHECK(progress(t, t.build(rng, true)) == 0.0);
      Rng rng2(seed);
      CHECK(progress(t, t.build(rng2, false)) == 0.0);
    }
  }
  const TaskSpec buried = make_buried_pyramid(12, 12, 6);
  Rng rng(1);
  CHECK(progress(buried, buried.build(rng, true)) == 0.0);
}

TEST_CASE("tasks: progress delta is the exact subtask-count rational") {
  const TaskSpec t = make_task("stack-block-pyramid", 12, 12, 0);
  Rng rng(3);
  WorldState s0 = t.build(rng, false);
  const auto act = oracle_action(t, s0);
  REQUIRE(act.has_value());
  WorldState s1 = apply_pick(s0, act->pick.x, act->pick.y).state;
  s1 = apply_place(s1, act->place.x, act->place.y, kSim).state;
  CHECK(progress_delta(t, s0, s1) == 1.0 / 6.0);
  CHECK(progress_delta(t, s1, s0) == -1.0 / 6.0);
  CHECK(progress_delta(t, s0, s0) == 0.0);
}

TEST_CASE("tasks: pickplace_success definition") {
  const TaskSpec t = make_task("block-insertion", 12, 12, 0);
  Rng rng(4);
  const WorldState s0 = t.build(rng, false);
  const auto act = oracle_action(t, s0);
  REQUIRE(act.has_value());

  Action a;
  a.high = HighAction::PickPlace;
  a.pick_or_push = {act->pick.x, act->pick.y, 0};
  a.place = LowAction{act->place.x, act->place.y, 0};

  WorldState mid = apply_pick(s0, act->pick.x, act->pick.y).state;
  const WorldState good = apply_place(mid, act->place.x, act->place.y, kSim).state;
  CHECK(pickplace_success(t, a, s0, good));

  // correct pick but wrong landing spot: only the goal cell counts
  const Cell goal = act->place;
  for (int y = 0; y < 12; ++y) {
    for (int x = 0; x < 12; ++x) {
      if (x == act->pick.x && y == act->pick.y) continue;
      Action wrong = a;
      wrong.place = LowAction{x, y, 0};
      WorldState mid2 = apply_pick(s0, act->pick.x, act->pick.y).state;
      const WorldState after = apply_place(mid2, x, y, kSim).state;
      CHECK(pickplace_success(t, wrong, s0, after) ==
            (x == goal.x && y == goal.y));
    }
  }

  // picking clutter is never a success even if progress happens elsewhere
  Action grey_pick = a;
  grey_pick.pick_or_push = {0, 0, 0};
  CHECK_FALSE(pickplace_success(t, grey_pick, s0, good));

  Action push;
  push.high = HighAction::Push;
  CHECK_THROWS(pickplace_success(t, push, s0, good));
}

TEST_CASE("tasks: oracle completes every task in subtask-count steps") {
  for (const std::string& name : task_names()) {
    const TaskSpec t = make_task(name, 12, 12, 6);
    for (uint64_t seed = 100; seed < 120; ++seed) {
      Rng rng(seed);
      const DemoEpisode ep = run_oracle_episode(t, rng, false, kSim);
      CHECK_FALSE(ep.stalled);
      CHECK(ep.final_progress == 1.0);
      CHECK(ep.steps.size() == t.subtasks.size());
    }
  }
}

TEST_CASE("tasks: progress is monotone along oracle episodes") {
  const TaskSpec t = make_task("stack-block-pyramid", 12, 12, 0);
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Rng rng(seed);
    WorldState s = t.build(rng, false);
    double last = progress(t, s);
    CHECK(last == 0.0);
    while (progress(t, s) < 1.0) {
      const auto act = oracle_action(t, s);
      REQUIRE(act.has_value());
      s = apply_pick(s, act->pick.x, act->pick.y).state;
      s = apply_place(s, act->place.x, act->place.y, kSim).state;
      const double p = progress(t, s);
      CHECK(p >= last);
      CHECK(p <= 1.0);
      last = p;
    }
  }
}

TEST_CASE("tasks: pyramid levels require their support first") {
  const TaskSpec t = make_task("stack-block-pyramid", 12, 12, 0);
  Rng rng(5);
  WorldState s = t.build(rng, false);
  const std::vector<Cell> markers = find_fixture_cells(s, 9);
  REQUIRE(markers.size() == 3);
  const Cell a = markers[0];

  // color 5 belongs at (A, z=1); dropping it at ground level satisfies
  // nothing, and subtask 4 stays off until the support exists
  WorldState wrong = s;
  wrong.stacks[wrong.idx(a.x, a.y)] = {5};
  CHECK_FALSE(subtask_satisfied(t.subtasks[3], wrong));
  CHECK(satisfied_prefix(t, wrong) == 0);

  WorldState right = s;
  right.stacks[right.idx(a.x, a.y)] = {2, 5};
  CHECK(subtask_satisfied(t.subtasks[0], right));
  CHECK(subtask_satisfied(t.subtasks[3], right));
  // ordered-prefix progress still stops at the unsatisfied subtask 2
  CHECK(satisfied_prefix(t, right) == 1);
}

TEST_CASE("tasks: cluttered pyramid stalls the oracle more often than not") {
  const TaskSpec t = make_task("stack-block-pyramid", 12, 12, 6);
  int stalls = 0;
  const int trials = 1000;
  for (uint64_t seed = 0; seed < trials; ++seed) {
    Rng rng(seed);
    const DemoEpisode ep = run_oracle_episode(t, rng, true, kSim);
    if (ep.stalled) ++stalls;
  }
  CHECK(stalls > trials / 2);
}

TEST_CASE("tasks: buried pyramid occludes every target") {
  const TaskSpec t = make_buried_pyramid(12, 12, 6);
  for (uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const WorldState s = t.build(rng, true);
    int visible_targets = 0;
    for (int i = 0; i < 144; ++i) {
      const int top = s.stacks[i].empty() ? 0 : s.stacks[i].back();
      if (top >= 2 && top <= 7) ++visible_targets;
    }
    CHECK(visible_targets == 0);
  }
}

TEST_CASE("tasks: held-out colors stay out of the demo palette") {
  const TaskSpec eval_spec = make_task("align-box-corner", 12, 12, 6);
  const TaskSpec demo_spec = make_task("align-box-corner", 12, 12, 6, true);
  CHECK(eval_spec.subtasks[0].color == 10);
  CHECK(demo_spec.subtasks[0].color == 2);

  const TaskSpec packing = make_task("packing-boxes", 12, 12, 6);
  const TaskSpec packing_demo = make_task("packing-boxes", 12, 12, 6, true);
  std::set<int> demo_colors;
  for (const GoalSpec& g : packing_demo.subtasks) demo_colors.insert(g.color);
  for (const GoalSpec& g : packing.subtasks)
    CHECK(demo_colors.count(g.color) == 0);
}

TEST_CASE("tasks: demo files round trip") {
  namespace fs = std::filesystem;
  const TaskSpec t = make_task("place-red-in-green", 12, 12, 0);
  std::vector<DemoEpisode> demos;
  for (uint64_t seed = 0; seed < 3; ++seed) {
    Rng rng(seed);
    demos.push_back(run_oracle_episode(t, rng, false, kSim));
  }
  const fs::path path = fs::temp_directory_path() / "hclm_demos_test.demos";
  write_demos(path.string(), t.name, demos);
  std::string task_name;
  const std::vector<DemoEpisode> back = read_demos(path.string(), &task_name);
  CHECK(task_name == t.name);
  REQUIRE(back.size() == demos.size());
  for (size_t i = 0; i < demos.size(); ++i) {
    CHECK(back[i].stalled == demos[i].stalled);
    CHECK(back[i].final_progress == demos[i].final_progress);
    REQUIRE(back[i].steps.size() == demos[i].steps.size());
    for (size_t j = 0; j < demos[i].steps.size(); ++j) {
      CHECK(back[i].steps[j].obs == demos[i].steps[j].obs);
      CHECK(back[i].steps[j].obs_mid == demos[i].steps[j].obs_mid);
      CHECK(back[i].steps[j].pick == demos[i].steps[j].pick);
      CHECK(back[i].steps[j].place == demos[i].steps[j].place);
    }
  }
  fs::remove(path);
}

TEST_CASE("tasks: oracle waits while the needed target is buried") {
  const TaskSpec t = make_task("block-insertion", 12, 12, 0);
  Rng rng(8);
  WorldState s = t.build(rng, false);
  const auto act = oracle_action(t, s);
  REQUIRE(act.has_value());
  // bury the target under a grey block: the oracle must stall
  s.stacks[s.idx(act->pick.x, act->pick.y)].push_back(kColorGrey);
  CHECK_FALSE(oracle_action(t, s).has_value());
}
