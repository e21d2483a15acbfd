#pragma once

// Discrete lane/cell driving world: state, actions, transitions, rewards.

#include <algorithm>
#include <array>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sentinel/error.hpp"

namespace sentinel {

enum class Weather : std::uint8_t { clear, rain, fog };
enum class Terminal : std::uint8_t { none, collision, off_road, horizon };
enum class ObjectKind : std::uint8_t { pedestrian, stopped_car, cyclist, debris, construction };
enum class Action : std::uint8_t { maintain, accelerate, decelerate, lane_left, lane_right };

inline constexpr std::array<Action, 5> kAllActions = {
    Action::maintain, Action::accelerate, Action::decelerate, Action::lane_left, Action::lane_right};
inline constexpr std::array<ObjectKind, 5> kAllObjectKinds = {
    ObjectKind::pedestrian, ObjectKind::stopped_car, ObjectKind::cyclist, ObjectKind::debris,
    ObjectKind::construction};
inline constexpr std::array<Weather, 3> kAllWeather = {Weather::clear, Weather::rain, Weather::fog};

constexpr std::string_view to_string(Weather w) {
  switch (w) {
    case Weather::clear: return "clear";
    case Weather::rain: return "rain";
    case Weather::fog: return "fog";
  }
  return "?";
}

constexpr std::string_view to_string(Terminal t) {
  switch (t) {
    case Terminal::none: return "none";
    case Terminal::collision: return "collision";
    case Terminal::off_road: return "off_road";
    case Terminal::horizon: return "horizon";
  }
  return "?";
}

constexpr std::string_view to_string(ObjectKind k) {
  switch (k) {
    case ObjectKind::pedestrian: return "pedestrian";
    case ObjectKind::stopped_car: return "stopped_car";
    case ObjectKind::cyclist: return "cyclist";
    case ObjectKind::debris: return "debris";
    case ObjectKind::construction: return "construction";
  }
  return "?";
}

constexpr std::string_view to_string(Action a) {
  switch (a) {
    case Action::maintain: return "maintain";
    case Action::accelerate: return "accelerate";
    case Action::decelerate: return "decelerate";
    case Action::lane_left: return "lane_left";
    case Action::lane_right: return "lane_right";
  }
  return "?";
}

template <typename Enum, std::size_t N>
std::optional<Enum> parse_enum(std::string_view text, const std::array<Enum, N>& values) {
  for (Enum v : values) {
    if (to_string(v) == text) return v;
  }
  return std::nullopt;
}

struct SceneObject {
  ObjectKind kind = ObjectKind::pedestrian;
  int lane = 0;
  int cell = 0;
  int drift = 0;  // lateral cells per step: -1, 0 or +1
  double drift_prob = 0.0;

  friend bool operator==(const SceneObject&, const SceneObject&) = default;
};

struct WorldState {
  int step = 0;
  int ego_lane = 0;
  int ego_cell = 0;
  int ego_speed = 0;
  std::vector<SceneObject> objects;
  Weather weather = Weather::clear;
  Terminal terminal = Terminal::none;

  bool is_terminal() const noexcept { return terminal != Terminal::none; }

  const SceneObject* object_at(int lane, int cell) const noexcept {
    for (const auto& o : objects) {
      if (o.lane == lane && o.cell == cell) return &o;
    }
    return nullptr;
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

struct RewardParams {
  double progress = 1.0;
  double collision = -100.0;
  double off_road = -50.0;
  double lane_change_cost = -1.0;
  double step_cost = 0.0;

  friend bool operator==(const RewardParams&, const RewardParams&) = default;
};

struct Scenario {
  int lanes = 1;
  int road_length = 1;
  int speed_max = 1;
  int horizon = 20;
  double discount = 0.95;
  double policy_noise = 0.0;
  RewardParams reward_params;
  WorldState initial_state;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// Anything producing uniform doubles on [0, 1).
template <typename R>
concept UniformSource = requires(R& r) {
  { r.uniform() } -> std::convertible_to<double>;
};

// Throws ValidationError naming the first offending field.
inline void validate(const Scenario& s) {
  auto fail = [](std::string field, const std::string& what) {
    throw ValidationError(std::move(field), what);
  };
  if (s.lanes < 1) fail("lanes", "must be >= 1");
  if (s.road_length < 1) fail("road_length", "must be >= 1");
  if (s.speed_max < 1) fail("speed_max", "must be >= 1");
  if (s.horizon < 1) fail("horizon", "must be >= 1");
  if (!(s.discount > 0.0 && s.discount <= 1.0)) fail("discount", "must be in (0, 1]");
  if (!(s.policy_noise >= 0.0 && s.policy_noise <= 1.0)) fail("policy_noise", "must be in [0, 1]");

  const auto& r = s.reward_params;
  if (!(r.collision < r.off_road)) fail("reward_params.collision", "must be < off_road");
  if (!(r.off_road < 0.0)) fail("reward_params.off_road", "must be < 0");
  if (!(r.progress > 0.0)) fail("reward_params.progress", "must be > 0");

  const auto& st = s.initial_state;
  if (st.step < 0) fail("initial_state.step", "must be >= 0");
  if (st.terminal != Terminal::none) fail("initial_state.terminal", "must be none");
  if (st.ego_lane < 0 || st.ego_lane >= s.lanes) fail("initial_state.ego_lane", "out of road bounds");
  if (st.ego_cell < 0 || st.ego_cell >= s.road_length) fail("initial_state.ego_cell", "out of road bounds");
  if (st.ego_speed < 0 || st.ego_speed > s.speed_max) fail("initial_state.ego_speed", "must be in [0, speed_max]");

  for (std::size_t i = 0; i < st.objects.size(); ++i) {
    const auto& o = st.objects[i];
    const std::string at = "initial_state.objects[" + std::to_string(i) + "]";
    if (o.lane < 0 || o.lane >= s.lanes) fail(at + ".lane", "out of road bounds");
    if (o.cell < 0 || o.cell >= s.road_length) fail(at + ".cell", "out of road bounds");
    if (o.drift < -1 || o.drift > 1) fail(at + ".drift", "must be -1, 0 or +1");
    if (!(o.drift_prob >= 0.0 && o.drift_prob <= 1.0)) fail(at + ".drift_prob", "must be in [0, 1]");
    if (o.lane == st.ego_lane && o.cell == st.ego_cell) fail(at, "overlaps the ego vehicle");
    for (std::size_t j = 0; j < i; ++j) {
      if (st.objects[j].lane == o.lane && st.objects[j].cell == o.cell) {
        fail(at, "overlaps objects[" + std::to_string(j) + "]");
      }
    }
  }
}

struct StepOutcome {
  WorldState state;
  double reward = 0.0;
};

// One transition. Order within a step:
//   1. speed change (clamped to [0, speed_max]),
//   2. lane change (leaving the road ends the episode off-road),
//   3. object drift, one draw per drifting object in list order; a drift is
//      blocked by the road edge or another object,
//   4. ego advance along its path: the target-lane cell it starts in, then
//      each cell it sweeps. The advance is capped at the last road cell.
// The first path position holding an object is a collision; the ego stops at
// the path position just before contact, so the colliding object sits beside
// or directly ahead of it in the outcome state.
template <UniformSource Rng>
StepOutcome step(const WorldState& state, Action action, const Scenario& scenario, Rng& rng) {
  if (state.is_terminal()) {
    throw InvalidState("step called on a terminal state (" + std::string(to_string(state.terminal)) + ")");
  }
  const auto& rp = scenario.reward_params;
  StepOutcome out{state, rp.step_cost};
  WorldState& next = out.state;

  if (action == Action::accelerate) next.ego_speed = std::min(next.ego_speed + 1, scenario.speed_max);
  if (action == Action::decelerate) next.ego_speed = std::max(next.ego_speed - 1, 0);

  const bool lane_change = action == Action::lane_left || action == Action::lane_right;
  int target_lane = state.ego_lane;
  if (lane_change) {
    out.reward += rp.lane_change_cost;
    target_lane += action == Action::lane_left ? -1 : +1;
  }

  if (target_lane < 0 || target_lane >= scenario.lanes) {
    ++next.step;
    next.terminal = Terminal::off_road;
    out.reward += rp.off_road;
    return out;
  }

  for (auto& obj : next.objects) {
    if (obj.drift == 0) continue;
    if (!(rng.uniform() < obj.drift_prob)) continue;
    const int lane = obj.lane + obj.drift;
    if (lane < 0 || lane >= scenario.lanes) continue;
    if (next.object_at(lane, obj.cell) != nullptr) continue;
    obj.lane = lane;
  }

  const int last_cell = std::min(state.ego_cell + next.ego_speed, scenario.road_length - 1);
  // Path positions as (lane, cell); entry 0 is where the ego starts.
  std::vector<std::pair<int, int>> path;
  path.reserve(static_cast<std::size_t>(last_cell - state.ego_cell) + 2);
  path.emplace_back(state.ego_lane, state.ego_cell);
  if (lane_change) path.emplace_back(target_lane, state.ego_cell);
  for (int c = state.ego_cell + 1; c <= last_cell; ++c) path.emplace_back(target_lane, c);

  std::size_t stop = path.size() - 1;
  bool collided = false;
  // The start position is only contested when the ego stays in its lane and
  // an object drifts onto it.
  for (std::size_t i = lane_change ? 1 : 0; i < path.size(); ++i) {
    if (next.object_at(path[i].first, path[i].second) != nullptr) {
      collided = true;
      stop = i == 0 ? 0 : i - 1;
      break;
    }
  }

  next.ego_lane = path[stop].first;
  next.ego_cell = path[stop].second;
  const int advanced = next.ego_cell - state.ego_cell;
  out.reward += rp.progress * static_cast<double>(advanced) / static_cast<double>(scenario.speed_max);
  ++next.step;

  if (collided) {
    next.terminal = Terminal::collision;
    out.reward += rp.collision;
  } else if (next.step >= scenario.horizon) {
    next.terminal = Terminal::horizon;
  }
  return out;
}

}  // namespace sentinel
