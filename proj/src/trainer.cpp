#include "hclm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace hclm {

namespace {

struct BcSample {
  const GridObservation* obs = nullptr;
  Cell label;
  bool is_place = false;
};

std::vector<BcSample> flatten_demos(const std::vector<DemoEpisode>& demos) {
  std::vector<BcSample> samples;
  for (const DemoEpisode& ep : demos) {
    for (const DemoStep& s : ep.steps) {
      samples.push_back({&s.obs, s.pick, false});
      samples.push_back({&s.obs_mid, s.place, true});
    }
  }
  return samples;
}

// Fraction of samples whose argmax hits the expert cell.
double bc_accuracy(const PickPlaceScorer& pp,
                   const std::vector<BcSample>& samples) {
  if (samples.empty()) return 0.0;
  int hits = 0;
#pragma omp parallel for schedule(dynamic) reduction(+ : hits)
  for (size_t i = 0; i < samples.size(); ++i) {
    const BcSample& s = samples[i];
    const FeatureMap f = featurize(*s.obs, pp.cfg);
    const MapHeadTensors& head = s.is_place ? pp.p.place : pp.p.pick;
    const int k = s.is_place ? pp.cfg.k_place : pp.cfg.k_pick;
    const MapOut out = forward_map_ref(pp.cfg, head, k, f);
    const LowAction a = select_push(out.q, s.obs->width, s.obs->height, k);
    if (a.x == s.label.x && a.y == s.label.y) hits += 1;
  }
  return static_cast<double>(hits) / samples.size();
}

double max_of(const std::vector<double>& v) {
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  return m;
}

int high_index(HighAction h) { return h == HighAction::Push ? 0 : 1; }

}  // namespace

double epsilon(const EpsilonSchedule& s, int n) {
  if (s.total <= 0) return s.start;
  const double t = std::clamp(static_cast<double>(n) / s.total, 0.0, 1.0);
  return s.start + (s.end - s.start) * t;
}

std::vector<DemoEpisode> generate_demos(const TaskSpec& demo_spec, int count,
                                        const SimConfig& sim, Rng rng,
                                        std::ostream* log) {
  std::vector<DemoEpisode> demos;
  demos.reserve(count);
  int attempts = 0;
  while (static_cast<int>(demos.size()) < count && attempts < 10 * count + 100) {
    Rng ep_rng = rng.split("demo").split(static_cast<uint64_t>(attempts));
    ++attempts;
    DemoEpisode ep = run_oracle_episode(demo_spec, ep_rng, false, sim);
    if (ep.stalled) {
      if (log) *log << "demo_skipped attempt=" << attempts - 1 << " stalled=1\n";
      continue;
    }
    demos.push_back(std::move(ep));
  }
  if (static_cast<int>(demos.size()) < count)
    throw std::runtime_error("generate_demos: oracle kept stalling");
  return demos;
}

BcResult train_bc(const TaskSpec& demo_spec,
                  const std::vector<DemoEpisode>& demos,
                  const ScorerConfig& scorer_cfg, const TrainConfig& cfg,
                  const SimConfig& sim, Rng rng, std::ostream* log) {
  Rng init_rng = rng.split("init");
  Rng shuffle_rng = rng.split("bc-shuffle");

  BcResult res;
  PickPlaceScorer pp = make_pickplace_scorer(scorer_cfg, init_rng);
  res.scorer = pp;

  const std::vector<BcSample> train_samples = flatten_demos(demos);
  res.samples = static_cast<int>(train_samples.size());
  if (train_samples.empty()) return res;

  const std::vector<DemoEpisode> val_demos =
      generate_demos(demo_spec, cfg.bc_val_demos, sim, rng.split("bc-val"));
  const std::vector<BcSample> val_samples = flatten_demos(val_demos);

  std::vector<size_t> order(train_samples.size());
  std::iota(order.begin(), order.end(), 0);

  for (int epoch = 0; epoch < cfg.bc_epochs; ++epoch) {
    // Fisher-Yates with the dedicated stream.
    for (size_t i = order.size(); i > 1; --i)
      std::swap(order[i - 1], order[shuffle_rng.uniform_int(static_cast<int>(i))]);

    for (size_t oi : order) {
      const BcSample& s = train_samples[oi];
      const FeatureMap f = featurize(*s.obs, pp.cfg);
      MapHeadTensors& head = s.is_place ? pp.p.place : pp.p.pick;
      const int k = s.is_place ? pp.cfg.k_place : pp.cfg.k_pick;
      const MapOut out = forward_map(pp.cfg, head, k, f);
      const BcLossResult loss =
          bc_loss(out.q, s.obs->width, s.obs->height, k, s.label.x, s.label.y, 0);
      MapHeadTensors grad = zero_grad_map(pp.cfg, k);
      backward_map(pp.cfg, head, k, f, out, loss.grad, grad);
      sgd_step(head, grad, cfg.bc_lr, cfg.grad_clip);
    }

    const double train_acc = bc_accuracy(pp, train_samples);
    const double val_acc = bc_accuracy(pp, val_samples);
    res.best_train_accuracy = std::max(res.best_train_accuracy, train_acc);
    const bool save = val_acc > res.best_val_accuracy;
    if (save) {
      res.best_val_accuracy = val_acc;
      res.scorer = pp;
    }
    if (log) {
      *log << "bc_epoch n=" << epoch << " train_acc=" << format_double(train_acc)
           << " val_acc=" << format_double(val_acc) << " saved=" << (save ? 1 : 0)
           << "\n";
    }
  }
  if (cfg.bc_epochs == 0) res.scorer = pp;  // initialization as-is
  return res;
}

double validation_success_rate(const TaskSpec& task, const DualScorer& dual,
                               const PickPlaceScorer& frozen,
                               const SimConfig& sim, int episodes,
                               uint64_t seed) {
  if (episodes <= 0) return 0.0;
  std::vector<int> success(episodes, 0);
  const Rng base(seed);
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < episodes; ++i) {
    HclmPolicy policy(&dual, &frozen, 0.0, 0.0);
    const EpisodeResult r =
        run_episode(task, sim, policy, base.split(static_cast<uint64_t>(i)),
                    true, false);
    success[i] = r.success ? 1 : 0;
  }
  int total = 0;
  for (int s : success) total += s;
  return 100.0 * total / episodes;
}

namespace {

struct ItemResult {
  DualTensors grad;
  double priority = 0.0;
  double push_loss = 0.0;
  double high_loss = 0.0;
};

}  // namespace

void hrl_batch_update(DualScorer& dual, PrioritizedBuffer& buffer,
                      Rng& replay_rng, const TrainConfig& cfg,
                      const SeqConfig& seq_cfg, const TsusConfig& tsus_cfg,
                      UpdateVariant variant, int epoch, double& push_loss_out,
                      double& high_loss_out) {
  const std::vector<Sample> batch = buffer.sample(cfg.batch, replay_rng);
  const int n_items = static_cast<int>(batch.size());
  std::vector<ItemResult> items(n_items);

#pragma omp parallel for schedule(dynamic)
  for (int b = 0; b < n_items; ++b) {
    const Transition& t = *batch[b].transition;
    const double w = batch[b].is_weight;
    ItemResult& item = items[b];
    item.grad = zero_grad_dual(dual.cfg);

    const FeatureMap feat = featurize(t.obs, dual.cfg);
    const DualOut out = forward_dual_ref(dual, feat);
    const int w_grid = t.obs.width, h_grid = t.obs.height;
    const int k = dual.cfg.k_push;

    // Bootstrap maxima from the next observation; only needed when the
    // reward discriminant eta is 1 and the episode continues.
    double max_q_next_push = 0.0;
    double max_q_next_high = 0.0;
    if (t.reward > 0.0 && !t.done) {
      const FeatureMap feat_next = featurize(t.next_obs, dual.cfg);
      const DualOut out_next = forward_dual_ref(dual, feat_next);
      max_q_next_push = max_of(out_next.q_push);
      max_q_next_high = std::max(out_next.q_high[0], out_next.q_high[1]);
    }

    std::vector<double> g_q_push(out.q_push.size(), 0.0);
    std::array<double, 2> g_q_high{0.0, 0.0};

    // Push branch: only transitions that performed a push carry loss.
    double mean_abs_push_td = 0.0;
    if (t.action.high == HighAction::Push) {
      const LowAction& a = t.action.pick_or_push;
      if (variant == UpdateVariant::NoSeq) {
        const double y = t.reward + seq_cfg.gamma *
                                        (t.reward > 0.0 ? 1.0 : 0.0) *
                                        max_q_next_push;
        const size_t qi = (static_cast<size_t>(a.y) * w_grid + a.x) * k + a.theta;
        const double err = out.q_push[qi] - y;
        const HuberResult hu = huber(err, cfg.huber_delta);
        g_q_push[qi] += w * hu.derivative / n_items;
        item.push_loss += w * hu.loss / n_items;
        mean_abs_push_td = std::abs(err);
      } else {
        const RegionTarget target = seq_target(seq_cfg, t.reward, max_q_next_push);
        const std::vector<SeqErrorEntry> errs = seq_td_error(
            seq_cfg, target, out.q_push, w_grid, h_grid, k, a.x, a.y, a.theta);
        for (const SeqErrorEntry& e : errs) {
          const HuberResult hu = huber(e.error, cfg.huber_delta);
          const size_t qi = (static_cast<size_t>(e.y) * w_grid + e.x) * k + e.theta;
          g_q_push[qi] += w * hu.derivative / n_items;
          item.push_loss += w * hu.loss / n_items;
          mean_abs_push_td += std::abs(e.error);
        }
        if (!errs.empty()) mean_abs_push_td /= static_cast<double>(errs.size());
      }
    }

    // High branch: gated TD error on the taken high action.
    const double y_high = tsus_target(tsus_cfg, t.reward, max_q_next_high);
    const int ai = high_index(t.action.high);
    const double delta_high = out.q_high[ai] - y_high;
    const double gate =
        variant == UpdateVariant::NoTsus
            ? 1.0
            : tsus_gate(tsus_cfg, t.action.high, t.reward, t.action.exploratory,
                        epoch);
    if (gate > 0.0) {
      const HuberResult hu = huber(delta_high, cfg.huber_delta);
      g_q_high[ai] = w * gate * hu.derivative / n_items;
      item.high_loss = w * gate * hu.loss / n_items;
    }

    backward_dual(dual, feat, out, g_q_push, g_q_high, item.grad);
    item.priority = std::abs(delta_high) + mean_abs_push_td;
  }

  // Fixed-order reduction keeps training deterministic under any thread count.
  DualTensors total = zero_grad_dual(dual.cfg);
  for (const ItemResult& item : items) {
    accumulate(total, item.grad);
    push_loss_out += item.push_loss;
    high_loss_out += item.high_loss;
  }
  if (!std::isfinite(push_loss_out) || !std::isfinite(high_loss_out))
    throw std::runtime_error("hrl_batch_update: non-finite loss");
  if (cfg.high_lr_scale != 1.0) {
    for (double& g : total.w_high) g *= cfg.high_lr_scale;
    for (double& g : total.b_high) g *= cfg.high_lr_scale;
  }
  sgd_step(dual.p, total, cfg.hrl_lr, cfg.grad_clip);
  for (int b = 0; b < n_items; ++b)
    buffer.update_priority(batch[b].index, items[b].priority);
}

HrlResult train_hrl(const TaskSpec& task, const PickPlaceScorer& frozen,
                    const ScorerConfig& scorer_cfg, const TrainConfig& cfg,
                    const SeqConfig& seq_cfg, const SimConfig& sim,
                    UpdateVariant variant, std::ostream* log) {
  const Rng root(cfg.train_seed);
  Rng init_rng = root.split("init");
  Rng replay_rng = root.split("replay");
  const Rng episode_root = root.split("episode");

  const int tau = cfg.tau >= 0 ? cfg.tau : cfg.hrl_epochs / 2;
  if (tau > cfg.hrl_epochs)
    throw std::invalid_argument("train_hrl: tau > hrl_epochs");
  const TsusConfig tsus_cfg{tau, seq_cfg.gamma};

  HrlResult res;
  DualScorer dual = make_dual_scorer(scorer_cfg, init_rng);
  res.best = dual;

  PrioritizedBuffer buffer{ReplayConfig{}};

  const EpsilonSchedule push_schedule{cfg.eps_push_start, cfg.eps_push_end,
                                      cfg.hrl_epochs};

  for (int epoch = 0; epoch < cfg.hrl_epochs; ++epoch) {
    const double eps_push = epsilon(push_schedule, epoch);
    buffer.set_beta(0.4 + 0.6 * (cfg.hrl_epochs <= 1
                                     ? 1.0
                                     : static_cast<double>(epoch) /
                                           (cfg.hrl_epochs - 1)));

    double push_loss = 0.0, high_loss = 0.0;
    int updates = 0;
    for (int ep = 0; ep < cfg.episodes_per_epoch; ++ep) {
      const uint64_t ep_index =
          static_cast<uint64_t>(epoch) * cfg.episodes_per_epoch + ep;
      HclmPolicy policy(&dual, &frozen, cfg.eps_high, eps_push);
      const EpisodeResult rollout = run_episode(
          task, sim, policy, episode_root.split(ep_index), true, true);

      for (const Transition& t : rollout.transitions) {
        if (t.action.high == HighAction::Push)
          res.high_push_steps += 1;
        else
          res.high_pick_steps += 1;
        buffer.push_transition(t);
      }

      for (int u = 0; u < cfg.updates_per_episode && buffer.size() > 0; ++u) {
        hrl_batch_update(dual, buffer, replay_rng, cfg, seq_cfg, tsus_cfg,
                         variant, epoch, push_loss, high_loss);
        ++updates;
      }

      if (log) {
        *log << "hrl_episode epoch=" << epoch << " episode=" << ep_index
             << " steps=" << rollout.steps << " pushes=" << rollout.pushes
             << " success=" << (rollout.success ? 1 : 0)
             << " progress=" << format_double(rollout.final_progress) << "\n";
      }
    }

    const double val = validation_success_rate(
        task, dual, frozen, sim, cfg.validation_episodes, cfg.val_seed);
    const bool saved = val > res.best_val_success;
    if (saved) {
      res.best_val_success = val;
      res.best = dual;
    }

    EpochStats st;
    st.epoch = epoch;
    st.eps_push = eps_push;
    st.val_success_rate = val;
    st.saved = saved;
    st.mean_push_loss = updates > 0 ? push_loss / updates : 0.0;
    st.mean_high_loss = updates > 0 ? high_loss / updates : 0.0;
    res.history.push_back(st);

    if (log) {
      *log << "hrl_epoch n=" << epoch << " eps_push=" << format_double(eps_push)
           << " push_loss=" << format_double(st.mean_push_loss)
           << " high_loss=" << format_double(st.mean_high_loss)
           << " val_success=" << format_double(val) << " saved=" << (saved ? 1 : 0)
           << "\n";
    }
  }
  if (cfg.hrl_epochs == 0) res.best = dual;
  return res;
}

}  // namespace hclm
