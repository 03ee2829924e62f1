#include "hclm/rollout.hpp"

#include "hclm/updates.hpp"

namespace hclm {

namespace {

Cell argmax_cell(const std::vector<double>& q, int w, int h) {
  const LowAction a = select_push(q, w, h, 1);
  return {a.x, a.y};
}

Cell map_argmax(const PickPlaceScorer* pp, const MapHeadTensors& head, int k,
                const GridObservation& o) {
  const FeatureMap f = featurize(o, pp->cfg);
  const MapOut out = forward_map(pp->cfg, head, k, f);
  return argmax_cell(out.q, o.width, o.height);
}

}  // namespace

const DualOut& HclmPolicy::dual_out(const GridObservation& o) {
  if (!cache_valid_ || !(cached_obs_ == o)) {
    const FeatureMap f = featurize(o, dual_->cfg);
    cached_out_ = forward_dual(*dual_, f);
    cached_obs_ = o;
    cache_valid_ = true;
  }
  return cached_out_;
}

HighAction HclmPolicy::choose_high(const WorldState&, const GridObservation& o,
                                   Rng& rng) {
  if (eps_high_ > 0.0 && rng.next_double() < eps_high_)
    return rng.uniform_int(2) == 0 ? HighAction::Push : HighAction::PickPlace;
  return select_high(dual_out(o).q_high);
}

std::pair<LowAction, bool> HclmPolicy::choose_push(const WorldState&,
                                                   const GridObservation& o,
                                                   Rng& rng) {
  if (eps_push_ > 0.0 && rng.next_double() < eps_push_) {
    return {LowAction{rng.uniform_int(o.width), rng.uniform_int(o.height),
                      rng.uniform_int(dual_->cfg.k_push)},
            true};
  }
  const DualOut& out = dual_out(o);
  return {select_push(out.q_push, o.width, o.height, dual_->cfg.k_push), false};
}

Cell HclmPolicy::choose_pick(const WorldState&, const GridObservation& o,
                             Rng&) {
  return map_argmax(pp_, pp_->p.pick, pp_->cfg.k_pick, o);
}

Cell HclmPolicy::choose_place(const WorldState&, const GridObservation& o,
                              Rng&) {
  return map_argmax(pp_, pp_->p.place, pp_->cfg.k_place, o);
}

std::pair<LowAction, bool> PickPlaceOnlyPolicy::choose_push(
    const WorldState&, const GridObservation&, Rng&) {
  return {LowAction{0, 0, 0}, false};  // never asked for
}

Cell PickPlaceOnlyPolicy::choose_pick(const WorldState&,
                                      const GridObservation& o, Rng&) {
  return map_argmax(pp_, pp_->p.pick, pp_->cfg.k_pick, o);
}

Cell PickPlaceOnlyPolicy::choose_place(const WorldState&,
                                       const GridObservation& o, Rng&) {
  return map_argmax(pp_, pp_->p.place, pp_->cfg.k_place, o);
}

std::pair<LowAction, bool> AlternatingPolicy::choose_push(
    const WorldState&, const GridObservation& o, Rng& rng) {
  if (dual_ == nullptr) {
    return {LowAction{rng.uniform_int(o.width), rng.uniform_int(o.height),
                      rng.uniform_int(8)},
            true};
  }
  const FeatureMap f = featurize(o, dual_->cfg);
  const DualOut out = forward_dual(*dual_, f);
  return {select_push(out.q_push, o.width, o.height, dual_->cfg.k_push), false};
}

Cell AlternatingPolicy::choose_pick(const WorldState&, const GridObservation& o,
                                    Rng&) {
  return map_argmax(pp_, pp_->p.pick, pp_->cfg.k_pick, o);
}

Cell AlternatingPolicy::choose_place(const WorldState&,
                                     const GridObservation& o, Rng&) {
  return map_argmax(pp_, pp_->p.place, pp_->cfg.k_place, o);
}

std::pair<LowAction, bool> RandomPolicy::choose_push(const WorldState&,
                                                     const GridObservation& o,
                                                     Rng& rng) {
  return {LowAction{rng.uniform_int(o.width), rng.uniform_int(o.height),
                    rng.uniform_int(k_push_)},
          true};
}

Cell RandomPolicy::choose_pick(const WorldState&, const GridObservation& o,
                               Rng& rng) {
  return {rng.uniform_int(o.width), rng.uniform_int(o.height)};
}

Cell RandomPolicy::choose_place(const WorldState&, const GridObservation& o,
                                Rng& rng) {
  return {rng.uniform_int(o.width), rng.uniform_int(o.height)};
}

Cell OraclePolicy::choose_pick(const WorldState& s, const GridObservation&,
                               Rng&) {
  const auto act = oracle_action(*spec_, s);
  if (!act.has_value()) {
    pending_place_ = {0, 0};
    return {0, 0};  // stalled; burns the step
  }
  pending_place_ = act->place;
  return act->pick;
}

Cell OraclePolicy::choose_place(const WorldState&, const GridObservation&,
                                Rng&) {
  return pending_place_;
}

EpisodeResult run_episode(const TaskSpec& spec, const SimConfig& sim,
                          Policy& policy, Rng episode_rng, bool cluttered,
                          bool record) {
  Rng build_rng = episode_rng.split("build");
  Rng act_rng = episode_rng.split("act");

  WorldState state = spec.build(build_rng, cluttered);
  policy.reset_episode();

  EpisodeResult res;
  for (int step = 0; step < spec.max_steps; ++step) {
    const GridObservation obs = render(state);
    const HighAction high = policy.choose_high(state, obs, act_rng);

    Action action;
    action.high = high;
    WorldState next;
    bool push_succ = false;
    bool pp_succ = false;

    if (high == HighAction::Push) {
      const auto [low, exploratory] = policy.choose_push(state, obs, act_rng);
      action.pick_or_push = low;
      action.exploratory = exploratory;
      PushResult pr = apply_push(state, low.x, low.y, low.theta, sim);
      next = std::move(pr.state);
      push_succ = pr.push_success;
      res.pushes += 1;
    } else {
      const Cell pick = policy.choose_pick(state, obs, act_rng);
      action.pick_or_push = {pick.x, pick.y, 0};
      PickResult pk = apply_pick(state, pick.x, pick.y);
      if (pk.pick_success) {
        const GridObservation mid = render(pk.state);
        const Cell place = policy.choose_place(pk.state, mid, act_rng);
        action.place = LowAction{place.x, place.y, 0};
        PlaceResult pl = apply_place(pk.state, place.x, place.y, sim);
        next = std::move(pl.state);
        pp_succ = pickplace_success(spec, action, state, next);
      } else {
        // Nothing to place; keep the action well-formed.
        action.place = LowAction{pick.x, pick.y, 0};
        next = std::move(pk.state);
      }
    }

    next.step_count = state.step_count + 1;
    const double pd = progress_delta(spec, state, next);
    const double reward = stp_reward(high, pd, push_succ, pp_succ);
    const bool done = progress(spec, next) >= 1.0;

    res.steps += 1;
    if (record) {
      Transition t;
      t.obs = obs;
      t.action = action;
      t.reward = reward;
      t.next_obs = render(next);
      t.progress_delta = pd;
      t.done = done;
      t.push_success = push_succ;
      t.pickplace_success = pp_succ;
      res.transitions.push_back(std::move(t));
    }
    state = std::move(next);
    if (done) break;
  }
  res.final_progress = progress(spec, state);
  res.success = res.final_progress >= 1.0;
  return res;
}

}  // namespace hclm
