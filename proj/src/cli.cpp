#include "hclm/cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "hclm/harness.hpp"

namespace fs = std::filesystem;

namespace hclm {

namespace {

struct CliContext {
  std::string config_path;
  std::string task;
  std::string out_dir = "out";
  int64_t seed = -1;

  RunConfig cfg;

  void finalize() {
    if (!config_path.empty()) cfg = load_config(config_path);
    if (!task.empty()) cfg.task = task;
    if (seed >= 0) {
      cfg.train.train_seed = static_cast<uint64_t>(seed);
      cfg.train.val_seed = static_cast<uint64_t>(seed) + 1;
      cfg.train.test_seed = static_cast<uint64_t>(seed) + 2;
    }
  }

  fs::path out(const std::string& sub) const {
    fs::path p = fs::path(out_dir) / sub;
    fs::create_directories(p);
    return p;
  }

  std::string demos_path() const {
    return (out("demos") / (cfg.task + ".demos")).string();
  }
  std::string pickplace_path() const {
    return (out("checkpoints") / ("pickplace_" + cfg.task + ".ckpt")).string();
  }
  std::string dual_path(const std::string& variant) const {
    return (out("checkpoints") / ("dual_" + cfg.task + "_" + variant + ".ckpt"))
        .string();
  }

  TaskSpec eval_task() const {
    return task_by_name(cfg.task, cfg.grid_w, cfg.grid_h, cfg.n_additional);
  }
  TaskSpec demo_task() const {
    return task_by_name(cfg.task, cfg.grid_w, cfg.grid_h, cfg.n_additional,
                        /*demo_palette=*/true);
  }
};

std::vector<DemoEpisode> load_or_generate_demos(const CliContext& ctx,
                                                const std::string& demos_flag) {
  std::string path = demos_flag.empty() ? ctx.demos_path() : demos_flag;
  if (fs::exists(path)) {
    std::cout << "demos: " << path << "\n";
    return read_demos(path);
  }
  if (!demos_flag.empty())
    throw std::runtime_error("demo file not found: " + demos_flag);
  std::cout << "demos: generating " << ctx.cfg.train.demo_count << "\n";
  return generate_demos(ctx.demo_task(), ctx.cfg.train.demo_count, ctx.cfg.sim,
                        Rng(ctx.cfg.train.train_seed).split("demo-gen"));
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_gen_demos(const CliContext& ctx, int count) {
  const int n = count > 0 ? count : ctx.cfg.train.demo_count;
  const std::vector<DemoEpisode> demos =
      generate_demos(ctx.demo_task(), n, ctx.cfg.sim,
                     Rng(ctx.cfg.train.train_seed).split("demo-gen"));
  write_demos(ctx.demos_path(), ctx.cfg.task, demos);
  std::cout << "wrote " << demos.size() << " demos to " << ctx.demos_path()
            << "\n";
  return 0;
}

int cmd_train_bc(const CliContext& ctx, const std::string& demos_flag) {
  const std::vector<DemoEpisode> demos = load_or_generate_demos(ctx, demos_flag);
  std::ofstream log((ctx.out("logs") / ("bc_" + ctx.cfg.task + ".log")).string(),
                    std::ios::binary);
  const BcResult res =
      train_bc(ctx.demo_task(), demos, ctx.cfg.scorer, ctx.cfg.train,
               ctx.cfg.sim, Rng(ctx.cfg.train.train_seed), &log);
  save_pickplace_checkpoint(res.scorer, ctx.pickplace_path());
  std::cout << "bc done samples=" << res.samples
            << " best_train_acc=" << format_double(res.best_train_accuracy)
            << " best_val_acc=" << format_double(res.best_val_accuracy)
            << "\ncheckpoint: " << ctx.pickplace_path() << "\n";
  return 0;
}

int cmd_train_hrl(const CliContext& ctx, const std::string& pickplace_flag,
                  const std::string& variant_name_str) {
  const PolicyVariant pv = parse_variant(variant_name_str);
  const UpdateVariant uv = update_variant_for(pv);
  const std::string pp_path =
      pickplace_flag.empty() ? ctx.pickplace_path() : pickplace_flag;
  const PickPlaceScorer frozen = load_pickplace_checkpoint(pp_path);

  std::ofstream log(
      (ctx.out("logs") / ("hrl_" + ctx.cfg.task + "_" + variant_name_str + ".log"))
          .string(),
      std::ios::binary);
  const HrlResult res = train_hrl(ctx.eval_task(), frozen, ctx.cfg.scorer,
                                  ctx.cfg.train, ctx.cfg.seq, ctx.cfg.sim, uv,
                                  &log);
  const std::string dual_path = ctx.dual_path(variant_name_str);
  save_dual_checkpoint(res.best, dual_path);
  std::cout << "hrl done best_val_success=" << format_double(res.best_val_success)
            << "\ncheckpoint: " << dual_path << "\n";
  return 0;
}

int cmd_eval(const CliContext& ctx, const std::string& variant_name_str,
             int episodes, int clutter, const std::string& dual_flag,
             const std::string& pickplace_flag, const std::string& dump_path,
             int dump_index) {
  const PolicyVariant pv = parse_variant(variant_name_str);

  std::optional<DualScorer> dual;
  std::optional<PickPlaceScorer> pickplace;
  const std::string pp_path =
      pickplace_flag.empty() ? ctx.pickplace_path() : pickplace_flag;
  pickplace = load_pickplace_checkpoint(pp_path);
  if (pv == PolicyVariant::HCLM || pv == PolicyVariant::NoTSUS ||
      pv == PolicyVariant::NoSEQ || pv == PolicyVariant::Alternating) {
    const std::string dual_path =
        dual_flag.empty() ? ctx.dual_path(variant_name_str) : dual_flag;
    dual = load_dual_checkpoint(dual_path);
  }

  const int n_add = clutter >= 0 ? clutter : ctx.cfg.n_additional;
  const TaskSpec spec =
      task_by_name(ctx.cfg.task, ctx.cfg.grid_w, ctx.cfg.grid_h, n_add);
  const int n_eps = episodes > 0 ? episodes : ctx.cfg.eval_episodes;
  const PolicyFactory factory = make_policy_factory(
      pv, dual ? &*dual : nullptr, pickplace ? &*pickplace : nullptr);

  const EvalReport report = evaluate(spec, ctx.cfg.sim, factory, n_eps,
                                     ctx.cfg.train.test_seed, variant_name_str);
  const std::string text = report_to_text(report);
  write_text((ctx.out("reports") /
              ("eval_" + ctx.cfg.task + "_" + variant_name_str + ".txt"))
                 .string(),
             text);
  std::cout << text;

  if (!dump_path.empty()) {
    std::unique_ptr<Policy> policy = factory();
    const EpisodeResult r = run_episode(
        spec, ctx.cfg.sim, *policy,
        Rng(ctx.cfg.train.test_seed).split(static_cast<uint64_t>(dump_index)),
        true, true);
    std::string lines;
    if (!r.transitions.empty())
      lines += to_line(r.transitions.front().obs) + "\n";
    for (const Transition& t : r.transitions) lines += to_line(t) + "\n";
    write_text(dump_path, lines);
    std::cout << "dumped episode " << dump_index << " (" << r.transitions.size()
              << " transitions) to " << dump_path << "\n";
  }
  return 0;
}

int cmd_sweep(const CliContext& ctx, const std::string& variant_name_str,
              const std::string& counts_str, int episodes,
              const std::string& dual_flag, const std::string& pickplace_flag) {
  const PolicyVariant pv = parse_variant(variant_name_str);
  std::vector<int> counts;
  std::stringstream ss(counts_str);
  std::string tok;
  while (std::getline(ss, tok, ',')) counts.push_back(std::stoi(tok));
  if (counts.empty()) throw std::runtime_error("sweep: empty --counts");

  const std::string pp_path =
      pickplace_flag.empty() ? ctx.pickplace_path() : pickplace_flag;
  const PickPlaceScorer pickplace = load_pickplace_checkpoint(pp_path);
  std::optional<DualScorer> dual;
  if (pv != PolicyVariant::PickPlaceOnly &&
      pv != PolicyVariant::PickPlaceRandomPush) {
    dual = load_dual_checkpoint(dual_flag.empty() ? ctx.dual_path(variant_name_str)
                                                  : dual_flag);
  }
  const PolicyFactory factory =
      make_policy_factory(pv, dual ? &*dual : nullptr, &pickplace);

  const int n_eps = episodes > 0 ? episodes : ctx.cfg.eval_episodes;
  const std::vector<EvalReport> reports =
      clutter_sweep(ctx.cfg.task, ctx.cfg.grid_w, ctx.cfg.grid_h, ctx.cfg.sim,
                    factory, counts, n_eps, ctx.cfg.train.test_seed,
                    variant_name_str);

  std::string text;
  for (size_t i = 0; i < reports.size(); ++i) {
    text += "sweep n_additional=" + std::to_string(counts[i]) + "\n";
    text += report_to_text(reports[i]);
  }
  write_text((ctx.out("reports") /
              ("sweep_" + ctx.cfg.task + "_" + variant_name_str + ".txt"))
                 .string(),
             text);
  for (size_t i = 0; i < reports.size(); ++i)
    std::cout << "n_additional=" << counts[i]
              << " success_rate=" << format_double(reports[i].success_rate)
              << " avg_len=" << format_double(reports[i].avg_episode_length)
              << "\n";
  return 0;
}

int cmd_ablate(const CliContext& ctx, const std::string& variant_name_str,
               int episodes) {
  const PolicyVariant pv = parse_variant(variant_name_str);
  const std::vector<DemoEpisode> demos = load_or_generate_demos(ctx, "");

  std::ofstream bc_log(
      (ctx.out("logs") / ("bc_" + ctx.cfg.task + ".log")).string(),
      std::ios::binary);
  const BcResult bc =
      train_bc(ctx.demo_task(), demos, ctx.cfg.scorer, ctx.cfg.train,
               ctx.cfg.sim, Rng(ctx.cfg.train.train_seed), &bc_log);
  save_pickplace_checkpoint(bc.scorer, ctx.pickplace_path());

  std::ofstream hrl_log(
      (ctx.out("logs") / ("hrl_" + ctx.cfg.task + "_" + variant_name_str + ".log"))
          .string(),
      std::ios::binary);
  const HrlResult hrl =
      train_hrl(ctx.eval_task(), bc.scorer, ctx.cfg.scorer, ctx.cfg.train,
                ctx.cfg.seq, ctx.cfg.sim, update_variant_for(pv), &hrl_log);
  save_dual_checkpoint(hrl.best, ctx.dual_path(variant_name_str));

  const int n_eps = episodes > 0 ? episodes : ctx.cfg.eval_episodes;
  const PolicyFactory factory = make_policy_factory(pv, &hrl.best, &bc.scorer);
  const EvalReport report =
      evaluate(ctx.eval_task(), ctx.cfg.sim, factory, n_eps,
               ctx.cfg.train.test_seed, variant_name_str);
  const std::string text = report_to_text(report);
  write_text((ctx.out("reports") /
              ("ablate_" + ctx.cfg.task + "_" + variant_name_str + ".txt"))
                 .string(),
             text);
  std::cout << text;
  return 0;
}

int cmd_render(const CliContext& ctx, const std::string& log_path) {
  std::ifstream in(log_path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + log_path);
  const RenderResult frames = render_episode(in);
  const fs::path dir = ctx.out("frames");
  for (size_t i = 0; i < frames.ascii_frames.size(); ++i) {
    write_text((dir / ("frame_" + std::to_string(i) + ".txt")).string(),
               frames.ascii_frames[i]);
    write_text((dir / ("frame_" + std::to_string(i) + ".ppm")).string(),
               frames.ppm_frames[i]);
  }
  std::cout << "wrote " << frames.ascii_frames.size() << " frames to "
            << dir.string() << "\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"grid-world rearrangement benchmark and hierarchical trainer"};
  app.require_subcommand(1);

  CliContext ctx;
  app.add_option("--config", ctx.config_path, "config file path");
  app.add_option("--seed", ctx.seed, "base seed (train/val/test = N, N+1, N+2)");
  app.add_option("--task", ctx.task, "task name");
  app.add_option("--out", ctx.out_dir, "output directory");

  int gen_count = 0;
  CLI::App* gen = app.add_subcommand("gen-demos", "generate oracle demos");
  gen->add_option("--count", gen_count, "number of demo episodes");

  std::string demos_flag;
  CLI::App* bc = app.add_subcommand("train-bc", "train pick/place by imitation");
  bc->add_option("--demos", demos_flag, "demo file to train on");

  std::string pickplace_flag, hrl_variant = "hclm";
  CLI::App* hrl = app.add_subcommand("train-hrl", "train the dual scorer");
  hrl->add_option("--pickplace", pickplace_flag, "frozen pick/place checkpoint");
  hrl->add_option("--variant", hrl_variant, "hclm | no-tsus | no-seq");

  std::string eval_variant = "hclm", dual_flag, eval_pp_flag, dump_path;
  int eval_episodes = 0, eval_clutter = -1, dump_index = 0;
  CLI::App* ev = app.add_subcommand("eval", "evaluate a policy variant");
  ev->add_option("--variant", eval_variant, "policy variant");
  ev->add_option("--episodes", eval_episodes, "episode count");
  ev->add_option("--clutter", eval_clutter, "additional block count");
  ev->add_option("--dual", dual_flag, "dual checkpoint path");
  ev->add_option("--pickplace", eval_pp_flag, "pick/place checkpoint path");
  ev->add_option("--dump-episode", dump_path, "write one episode's transitions");
  ev->add_option("--episode", dump_index, "episode index for --dump-episode");

  std::string sweep_variant = "hclm", counts_str = "6,8,10,12,14,16";
  std::string sweep_dual_flag, sweep_pp_flag;
  int sweep_episodes = 0;
  CLI::App* sw = app.add_subcommand("sweep", "evaluate across clutter counts");
  sw->add_option("--variant", sweep_variant, "policy variant");
  sw->add_option("--counts", counts_str, "comma-separated clutter counts");
  sw->add_option("--episodes", sweep_episodes, "episode count per setting");
  sw->add_option("--dual", sweep_dual_flag, "dual checkpoint path");
  sw->add_option("--pickplace", sweep_pp_flag, "pick/place checkpoint path");

  std::string ablate_variant = "no-tsus";
  int ablate_episodes = 0;
  CLI::App* ab = app.add_subcommand("ablate", "train and evaluate a variant");
  ab->add_option("--variant", ablate_variant, "policy variant to train");
  ab->add_option("--episodes", ablate_episodes, "evaluation episode count");

  std::string render_log;
  CLI::App* rd = app.add_subcommand("render", "render an episode log to frames");
  rd->add_option("--log", render_log, "transition-line episode log")->required();

  std::vector<std::string> argv_vec = args;
  std::vector<const char*> argv;
  argv.push_back("hclm");
  for (const std::string& a : argv_vec) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    ctx.finalize();
  } catch (const std::exception& e) {
    // bad or unreadable config is a usage problem
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) return cmd_gen_demos(ctx, gen_count);
    if (bc->parsed()) return cmd_train_bc(ctx, demos_flag);
    if (hrl->parsed()) return cmd_train_hrl(ctx, pickplace_flag, hrl_variant);
    if (ev->parsed())
      return cmd_eval(ctx, eval_variant, eval_episodes, eval_clutter, dual_flag,
                      eval_pp_flag, dump_path, dump_index);
    if (sw->parsed())
      return cmd_sweep(ctx, sweep_variant, counts_str, sweep_episodes,
                       sweep_dual_flag, sweep_pp_flag);
    if (ab->parsed()) return cmd_ablate(ctx, ablate_variant, ablate_episodes);
    if (rd->parsed()) return cmd_render(ctx, render_log);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace hclm
