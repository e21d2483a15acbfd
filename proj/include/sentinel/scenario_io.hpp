#pragma once

// Scenario file reading and writing (UTF-8 JSON).

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "sentinel/domain.hpp"
#include "sentinel/error.hpp"

namespace sentinel {

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::string& where,
                                std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ValidationError(where.empty() ? key : where + "." + key, "unknown key");
  }
}

inline const json& require_object(const json& j, const std::string& field) {
  if (!j.is_object()) throw ValidationError(field.empty() ? "<root>" : field, "expected an object");
  return j;
}

inline std::string join(const std::string& where, std::string_view key) {
  return where.empty() ? std::string(key) : where + "." + std::string(key);
}

inline int read_int(const json& obj, std::string_view key, const std::string& where, int fallback,
                    bool required = false) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    if (required) throw ValidationError(join(where, key), "missing required key");
    return fallback;
  }
  if (!it->is_number_integer()) throw ValidationError(join(where, key), "expected an integer");
  const auto v = it->get<long long>();
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ValidationError(join(where, key), "integer out of range");
  }
  return static_cast<int>(v);
}

inline double read_real(const json& obj, std::string_view key, const std::string& where, double fallback) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_number()) throw ValidationError(join(where, key), "expected a number");
  return it->get<double>();
}

template <typename Enum, std::size_t N>
Enum read_enum(const json& obj, std::string_view key, const std::string& where, Enum fallback,
               const std::array<Enum, N>& values) {
  auto it = obj.find(key);
  if (it == obj.end()) return fallback;
  if (!it->is_string()) throw ValidationError(join(where, key), "expected a string");
  auto parsed = parse_enum(it->get<std::string>(), values);
  if (!parsed) throw ValidationError(join(where, key), "unknown value '" + it->get<std::string>() + "'");
  return *parsed;
}

}  // namespace detail

// Required keys: lanes, road_length. Everything else falls back to the
// defaults of Scenario / RewardParams / WorldState.
inline Scenario scenario_from_json(const nlohmann::json& root) {
  using detail::read_int;
  using detail::read_real;
  detail::require_object(root, "");
  detail::reject_unknown_keys(root, "",
                              {"lanes", "road_length", "speed_max", "horizon", "discount", "policy_noise",
                               "reward_params", "initial_state"});
  Scenario s;
  s.lanes = read_int(root, "lanes", "", s.lanes, true);
  s.road_length = read_int(root, "road_length", "", s.road_length, true);
  s.speed_max = read_int(root, "speed_max", "", s.speed_max);
  s.horizon = read_int(root, "horizon", "", s.horizon);
  s.discount = read_real(root, "discount", "", s.discount);
  s.policy_noise = read_real(root, "policy_noise", "", s.policy_noise);

  if (auto it = root.find("reward_params"); it != root.end()) {
    const auto& rp = detail::require_object(*it, "reward_params");
    detail::reject_unknown_keys(rp, "reward_params",
                                {"progress", "collision", "off_road", "lane_change_cost", "step_cost"});
    auto& r = s.reward_params;
    r.progress = read_real(rp, "progress", "reward_params", r.progress);
    r.collision = read_real(rp, "collision", "reward_params", r.collision);
    r.off_road = read_real(rp, "off_road", "reward_params", r.off_road);
    r.lane_change_cost = read_real(rp, "lane_change_cost", "reward_params", r.lane_change_cost);
    r.step_cost = read_real(rp, "step_cost", "reward_params", r.step_cost);
  }

  auto& st = s.initial_state;
  st.ego_speed = std::min(1, s.speed_max);
  if (auto it = root.find("initial_state"); it != root.end()) {
    const std::string where = "initial_state";
    const auto& js = detail::require_object(*it, where);
    detail::reject_unknown_keys(js, where, {"ego_lane", "ego_cell", "ego_speed", "weather", "objects"});
    st.ego_lane = read_int(js, "ego_lane", where, st.ego_lane);
    st.ego_cell = read_int(js, "ego_cell", where, st.ego_cell);
    st.ego_speed = read_int(js, "ego_speed", where, st.ego_speed);
    st.weather = detail::read_enum(js, "weather", where, st.weather, kAllWeather);
    if (auto ot = js.find("objects"); ot != js.end()) {
      if (!ot->is_array()) throw ValidationError(where + ".objects", "expected an array");
      for (std::size_t i = 0; i < ot->size(); ++i) {
        const std::string at = where + ".objects[" + std::to_string(i) + "]";
        const auto& jo = detail::require_object((*ot)[i], at);
        detail::reject_unknown_keys(jo, at, {"kind", "lane", "cell", "drift", "drift_prob"});
        SceneObject o;
        if (!jo.contains("kind")) throw ValidationError(at + ".kind", "missing required key");
        o.kind = detail::read_enum(jo, "kind", at, o.kind, kAllObjectKinds);
        o.lane = read_int(jo, "lane", at, 0, true);
        o.cell = read_int(jo, "cell", at, 0, true);
        o.drift = read_int(jo, "drift", at, 0);
        o.drift_prob = read_real(jo, "drift_prob", at, 0.0);
        st.objects.push_back(o);
      }
    }
  }
  validate(s);
  return s;
}

inline Scenario parse_scenario(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("malformed scenario JSON: ") + e.what());
  }
  return scenario_from_json(root);
}

inline Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open scenario file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

inline nlohmann::json scenario_to_json(const Scenario& s) {
  nlohmann::json objects = nlohmann::json::array();
  for (const auto& o : s.initial_state.objects) {
    objects.push_back({{"kind", to_string(o.kind)},
                       {"lane", o.lane},
                       {"cell", o.cell},
                       {"drift", o.drift},
                       {"drift_prob", o.drift_prob}});
  }
  const auto& r = s.reward_params;
  const auto& st = s.initial_state;
  return {{"lanes", s.lanes},
          {"road_length", s.road_length},
          {"speed_max", s.speed_max},
          {"horizon", s.horizon},
          {"discount", s.discount},
          {"policy_noise", s.policy_noise},
          {"reward_params",
           {{"progress", r.progress},
            {"collision", r.collision},
            {"off_road", r.off_road},
            {"lane_change_cost", r.lane_change_cost},
            {"step_cost", r.step_cost}}},
          {"initial_state",
           {{"ego_lane", st.ego_lane},
            {"ego_cell", st.ego_cell},
            {"ego_speed", st.ego_speed},
            {"weather", to_string(st.weather)},
            {"objects", std::move(objects)}}}};
}

inline void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write scenario file '" + path + "'");
  out << scenario_to_json(s).dump(2) << '\n';
}

}  // namespace sentinel
