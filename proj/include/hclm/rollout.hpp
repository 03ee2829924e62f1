#pragma once

#include <memory>
#include <utility>
#include <vector>

#include "hclm/scorer.hpp"
#include "hclm/sim.hpp"
#include "hclm/tasks.hpp"

namespace hclm {

/// Per-step decision interface. A pick&place step is resolved in two
/// phases: pick on the pre-step observation, place on the post-pick one.
/// choose_push also reports whether the parameters were sampled randomly.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual void reset_episode() {}
  virtual HighAction choose_high(const WorldState& s, const GridObservation& o,
                                 Rng& rng) = 0;
  virtual std::pair<LowAction, bool> choose_push(const WorldState& s,
                                                 const GridObservation& o,
                                                 Rng& rng) = 0;
  virtual Cell choose_pick(const WorldState& s, const GridObservation& o,
                           Rng& rng) = 0;
  virtual Cell choose_place(const WorldState& s, const GridObservation& o,
                            Rng& rng) = 0;
};

/// Trained hierarchy: dual scorer for the high choice and push parameters,
/// frozen pick/place heads for the rest. Epsilons are zero at evaluation.
class HclmPolicy : public Policy {
 public:
  HclmPolicy(const DualScorer* dual, const PickPlaceScorer* pickplace,
             double eps_high, double eps_push)
      : dual_(dual), pp_(pickplace), eps_high_(eps_high), eps_push_(eps_push) {}

  HighAction choose_high(const WorldState&, const GridObservation& o,
                         Rng& rng) override;
  std::pair<LowAction, bool> choose_push(const WorldState&,
                                         const GridObservation& o,
                                         Rng& rng) override;
  Cell choose_pick(const WorldState&, const GridObservation& o,
                   Rng& rng) override;
  Cell choose_place(const WorldState&, const GridObservation& o,
                    Rng& rng) override;

 private:
  const DualOut& dual_out(const GridObservation& o);

  const DualScorer* dual_;
  const PickPlaceScorer* pp_;
  double eps_high_;
  double eps_push_;
  GridObservation cached_obs_;
  DualOut cached_out_;
  bool cache_valid_ = false;
};

/// Frozen pick/place heads only; never pushes.
class PickPlaceOnlyPolicy : public Policy {
 public:
  explicit PickPlaceOnlyPolicy(const PickPlaceScorer* pickplace)
      : pp_(pickplace) {}
  HighAction choose_high(const WorldState&, const GridObservation&,
                         Rng&) override {
    return HighAction::PickPlace;
  }
  std::pair<LowAction, bool> choose_push(const WorldState&,
                                         const GridObservation&, Rng&) override;
  Cell choose_pick(const WorldState&, const GridObservation& o, Rng&) override;
  Cell choose_place(const WorldState&, const GridObservation& o, Rng&) override;

 private:
  const PickPlaceScorer* pp_;
};

/// Alternates pick&place and push. Pushes are random when `dual` is null
/// (the random-push baseline), greedy over the dual map otherwise.
class AlternatingPolicy : public Policy {
 public:
  AlternatingPolicy(const DualScorer* dual, const PickPlaceScorer* pickplace)
      : dual_(dual), pp_(pickplace) {}
  void reset_episode() override { step_ = 0; }
  HighAction choose_high(const WorldState&, const GridObservation&,
                         Rng&) override {
    return (step_++ % 2 == 0) ? HighAction::PickPlace : HighAction::Push;
  }
  std::pair<LowAction, bool> choose_push(const WorldState&,
                                         const GridObservation& o,
                                         Rng& rng) override;
  Cell choose_pick(const WorldState&, const GridObservation& o, Rng&) override;
  Cell choose_place(const WorldState&, const GridObservation& o, Rng&) override;

 private:
  const DualScorer* dual_;
  const PickPlaceScorer* pp_;
  int step_ = 0;
};

/// Uniform random everything (sanity baseline).
class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(int k_push) : k_push_(k_push) {}
  HighAction choose_high(const WorldState&, const GridObservation&,
                         Rng& rng) override {
    return rng.uniform_int(2) == 0 ? HighAction::Push : HighAction::PickPlace;
  }
  std::pair<LowAction, bool> choose_push(const WorldState&,
                                         const GridObservation& o,
                                         Rng& rng) override;
  Cell choose_pick(const WorldState&, const GridObservation& o, Rng& rng) override;
  Cell choose_place(const WorldState&, const GridObservation& o, Rng& rng) override;

 private:
  int k_push_;
};

/// Expert policy (tests): plays the task oracle's pick&place.
class OraclePolicy : public Policy {
 public:
  explicit OraclePolicy(const TaskSpec* spec) : spec_(spec) {}
  HighAction choose_high(const WorldState&, const GridObservation&,
                         Rng&) override {
    return HighAction::PickPlace;
  }
  std::pair<LowAction, bool> choose_push(const WorldState&,
                                         const GridObservation&, Rng&) override {
    return {LowAction{0, 0, 0}, false};
  }
  Cell choose_pick(const WorldState& s, const GridObservation&, Rng&) override;
  Cell choose_place(const WorldState& s, const GridObservation&, Rng&) override;

 private:
  const TaskSpec* spec_;
  Cell pending_place_{0, 0};
};

struct EpisodeResult {
  int steps = 0;
  int pushes = 0;
  bool success = false;
  double final_progress = 0.0;
  std::vector<Transition> transitions;  // only filled when record is set
};

/// One environment step per high-level action (a pick&place pair counts as
/// one step). Episodes end at progress 1 or max_steps. The episode rng is
/// split internally for the scene build and for action sampling.
EpisodeResult run_episode(const TaskSpec& spec, const SimConfig& sim,
                          Policy& policy, Rng episode_rng, bool cluttered,
                          bool record);

}  // namespace hclm
