#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hclm/cli.hpp"
#include "hclm/harness.hpp"

using namespace hclm;
namespace fs = std::filesystem;

namespace {

const SimConfig kSim;

PolicyFactory oracle_factory(const TaskSpec* spec) {
  return [spec] { return std::make_unique<OraclePolicy>(spec); };
}

PolicyFactory random_factory() {
  return [] { return std::make_unique<RandomPolicy>(8); };
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("evaluate: the oracle solves clean insertion in one step") {
  const TaskSpec spec = make_task("block-insertion", 12, 12, 0);
  const EvalReport r = evaluate(spec, kSim, oracle_factory(&spec), 50, 3,
                                "oracle", /*cluttered=*/false);
  CHECK(r.success_rate == 100.0);
  CHECK(r.avg_episode_length == 1.0);
}

TEST_CASE("evaluate: random play barely ever builds the pyramid") {
  const TaskSpec spec = make_task("stack-block-pyramid", 12, 12, 6);
  const EvalReport r = evaluate(spec, kSim, random_factory(), 100, 3, "random");
  CHECK(r.success_rate < 5.0);
  CHECK(r.avg_episode_length > 15.0);  // failures run to max_steps = 20
}

TEST_CASE("evaluate: identical seeds give identical reports") {
  const TaskSpec spec = make_task("place-red-in-green", 12, 12, 4);
  const EvalReport a = evaluate(spec, kSim, random_factory(), 40, 9, "random");
  const EvalReport b = evaluate(spec, kSim, random_factory(), 40, 9, "random");
  CHECK(report_to_text(a) == report_to_text(b));
}

TEST_CASE("evaluate: report arithmetic is recomputable from the records") {
  const TaskSpec spec = make_task("block-insertion", 12, 12, 3);
  const EvalReport r = evaluate(spec, kSim, random_factory(), 64, 5, "random");
  int successes = 0;
  long long steps = 0;
  for (const EpisodeRecord& e : r.records) {
    successes += e.success ? 1 : 0;
    steps += e.steps;
  }
  CHECK(r.successes == successes);
  CHECK(r.success_rate == 100.0 * successes / 64.0);
  CHECK(r.avg_episode_length == static_cast<double>(steps) / 64.0);

  const EvalReport back = report_from_text(report_to_text(r));
  CHECK(report_to_text(back) == report_to_text(r));
}

TEST_CASE("clutter_sweep: one report per count") {
  const auto reports = clutter_sweep("block-insertion", 12, 12, kSim,
                                     random_factory(), {0, 3, 6}, 10, 2, "rnd");
  REQUIRE(reports.size() == 3);
  for (const auto& r : reports) CHECK(r.episodes == 10);
}

TEST_CASE("render: one frame per step plus the initial state") {
  const TaskSpec spec = make_task("block-insertion", 12, 12, 2);
  RandomPolicy policy(8);
  const EpisodeResult ep = run_episode(spec, kSim, policy, Rng(4), true, true);
  REQUIRE(ep.steps >= 1);

  std::string lines = to_line(ep.transitions.front().obs) + "\n";
  for (const Transition& t : ep.transitions) lines += to_line(t) + "\n";
  std::istringstream in(lines);
  const RenderResult frames = render_episode(in);
  CHECK(frames.ascii_frames.size() == static_cast<size_t>(ep.steps) + 1);
  CHECK(frames.ppm_frames.size() == frames.ascii_frames.size());
  CHECK(frames.ppm_frames[0].rfind("P3\n", 0) == 0);
}

TEST_CASE("render: a bare observation renders the initial frame only") {
  GridObservation o;
  o.width = o.height = 4;
  o.heights.assign(16, 0);
  o.top_color.assign(16, 0);
  std::istringstream in(to_line(o) + "\n");
  const RenderResult frames = render_episode(in);
  CHECK(frames.ascii_frames.size() == 1);
}

TEST_CASE("render: corrupt lines report their line number") {
  std::istringstream in("transition garbage\n");
  try {
    render_episode(in);
    FAIL("expected an exception");
  } catch (const std::exception& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
}

TEST_CASE("config: round trips through text") {
  RunConfig c;
  c.task = "stack-block-pyramid";
  c.train.hrl_epochs = 17;
  c.seq.kappa = 0.25;
  c.scorer.hidden = 24;
  const std::string text = config_to_text(c);
  const RunConfig back = config_from_text(text);
  CHECK(config_to_text(back) == text);
}

TEST_CASE("config: unknown keys are rejected") {
  CHECK_THROWS(config_from_text("no_such_key 1\n"));
  CHECK_THROWS(config_from_text("task\n"));  // missing value
  const RunConfig c = config_from_text("# comment\n\ntask packing-boxes\n");
  CHECK(c.task == "packing-boxes");
}

TEST_CASE("variants: names round trip and imply the right update rule") {
  for (const char* name : {"hclm", "pickplace-only", "pickplace-random-push",
                           "alternating", "no-tsus", "no-seq"}) {
    CHECK(variant_name(parse_variant(name)) == name);
  }
  CHECK_THROWS(parse_variant("nope"));
  CHECK(update_variant_for(PolicyVariant::NoTSUS) == UpdateVariant::NoTsus);
  CHECK(update_variant_for(PolicyVariant::NoSEQ) == UpdateVariant::NoSeq);
  CHECK(update_variant_for(PolicyVariant::HCLM) == UpdateVariant::Full);
}

TEST_CASE("cli: usage errors exit 1, unknown flags included") {
  CHECK(run_cli({"no-such-command"}) == 1);
  CHECK(run_cli({"eval", "--no-such-flag"}) == 1);
  CHECK(run_cli({}) == 1);  // a subcommand is required
  CHECK(run_cli({"--help"}) == 0);
}

TEST_CASE("cli: missing config file exits 1") {
  CHECK(run_cli({"--config", "/nonexistent/config.txt", "gen-demos"}) == 1);
}

TEST_CASE("cli: demo/bc/eval pipeline smoke test") {
  const fs::path dir = fs::temp_directory_path() / "hclm_cli_smoke";
  fs::remove_all(dir);
  fs::create_directories(dir);

  RunConfig cfg;
  cfg.task = "block-insertion";
  cfg.scorer.hidden = 8;
  cfg.train.demo_count = 4;
  cfg.train.bc_epochs = 2;
  cfg.train.bc_val_demos = 2;
  cfg.eval_episodes = 4;
  const std::string cfg_path = (dir / "config.txt").string();
  save_config(cfg, cfg_path);
  const std::string out_dir = (dir / "out").string();

  CHECK(run_cli({"--config", cfg_path, "--out", out_dir, "gen-demos"}) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "demos" / "block-insertion.demos"));

  CHECK(run_cli({"--config", cfg_path, "--out", out_dir, "train-bc"}) == 0);
  CHECK(fs::exists(fs::path(out_dir) / "checkpoints" /
                   "pickplace_block-insertion.ckpt"));

  CHECK(run_cli({"--config", cfg_path, "--out", out_dir, "eval", "--variant",
                 "pickplace-only", "--episodes", "4"}) == 0);
  const fs::path report =
      fs::path(out_dir) / "reports" / "eval_block-insertion_pickplace-only.txt";
  REQUIRE(fs::exists(report));
  CHECK(slurp(report).rfind("report task=block-insertion", 0) == 0);

  // missing checkpoint is a runtime failure, not a usage error
  CHECK(run_cli({"--config", cfg_path, "--out", out_dir, "eval", "--variant",
                 "hclm", "--episodes", "2"}) == 2);
  fs::remove_all(dir);
}
