#pragma once

// Monte Carlo forward rollouts under an epsilon-noisy nominal controller.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "sentinel/domain.hpp"
#include "sentinel/error.hpp"
#include "sentinel/random.hpp"

namespace sentinel {

struct RolloutConfig {
  int k = 1000;
  std::uint64_t seed = 0;
};

struct RolloutResult {
  int index = 0;
  double ret = 0.0;  // realized discounted return
  WorldState outcome_state;
  Terminal outcome = Terminal::none;
  int length = 0;

  friend bool operator==(const RolloutResult&, const RolloutResult&) = default;
};

namespace detail {

inline bool lane_clear_ahead(const WorldState& s, int lane, int from_cell, int to_cell) {
  for (const auto& o : s.objects) {
    if (o.lane == lane && o.cell >= from_cell && o.cell <= to_cell) return false;
  }
  return true;
}

}  // namespace detail

// Baseline controller: swerve right, then left, then brake when something is
// within two cells ahead in the ego lane; otherwise hold speed and lane.
inline Action nominal_action(const WorldState& state, const Scenario& scenario) {
  if (state.is_terminal()) throw InvalidState("nominal_action called on a terminal state");
  const int c = state.ego_cell;
  if (detail::lane_clear_ahead(state, state.ego_lane, c + 1, c + 2)) return Action::maintain;
  // A target lane must be free alongside the ego as well as two cells ahead.
  const int right = state.ego_lane + 1;
  if (right < scenario.lanes && detail::lane_clear_ahead(state, right, c, c + 2)) return Action::lane_right;
  const int left = state.ego_lane - 1;
  if (left >= 0 && detail::lane_clear_ahead(state, left, c, c + 2)) return Action::lane_left;
  return Action::decelerate;
}

inline RolloutResult sample_rollout(const Scenario& scenario, int index, std::uint64_t seed) {
  auto rng = CounterStream::derive(seed, static_cast<std::uint64_t>(index));
  RolloutResult result;
  result.index = index;
  WorldState state = scenario.initial_state;
  double weight = 1.0;
  while (!state.is_terminal()) {
    Action action;
    if (rng.uniform() < scenario.policy_noise) {
      action = kAllActions[rng.below(kAllActions.size())];
    } else {
      action = nominal_action(state, scenario);
    }
    auto [next, reward] = step(state, action, scenario, rng);
    result.ret += weight * reward;
    weight *= scenario.discount;
    ++result.length;
    state = std::move(next);
  }
  result.outcome = state.terminal;
  result.outcome_state = std::move(state);
  return result;
}

// Worker count: `workers` if positive, else the hardware concurrency. The
// result list is identical for every worker count.
inline std::vector<RolloutResult> run_monte_carlo(const Scenario& scenario, const RolloutConfig& config,
                                                  int workers = 0) {
  if (config.k < 1) throw Error("RolloutConfig.k must be >= 1");
  std::vector<RolloutResult> results(static_cast<std::size_t>(config.k));
  int n_threads = workers > 0 ? workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  n_threads = std::min(n_threads, config.k);

  std::atomic<int> next{0};
  auto work = [&] {
    for (int i = next.fetch_add(1); i < config.k; i = next.fetch_add(1)) {
      results[static_cast<std::size_t>(i)] = sample_rollout(scenario, i, config.seed);
    }
  };
  if (n_threads == 1) {
    work();
    return results;
  }
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(work);
  pool.clear();
  return results;
}

}  // namespace sentinel
