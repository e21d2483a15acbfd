#pragma once

// Predicate vocabularies, minterms and implicants over them.

#include <bit>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "sentinel/domain.hpp"
#include "sentinel/error.hpp"

namespace sentinel {

inline constexpr int kMaxPredicates = 24;

// Bit i holds predicate i.
struct Minterm {
  std::uint32_t bits = 0;

  constexpr bool operator[](int i) const noexcept { return (bits >> i) & 1u; }
  friend constexpr auto operator<=>(const Minterm&, const Minterm&) = default;
};

// Conjunctive clause: predicate i is a literal iff care bit i is set, and is
// positive iff the matching value bit is set. Value bits outside the care
// mask are always zero.
struct Implicant {
  std::uint32_t care = 0;
  std::uint32_t values = 0;

  static constexpr Implicant of(Minterm m, int n) noexcept {
    const std::uint32_t mask = n >= 32 ? ~0u : ((1u << n) - 1u);
    return {mask, m.bits & mask};
  }

  constexpr bool covers(Minterm m) const noexcept { return (m.bits & care) == values; }
  constexpr int literal_count() const noexcept { return std::popcount(care); }
  // Every minterm of `other` is a minterm of this clause.
  constexpr bool contains(const Implicant& other) const noexcept {
    return (care & other.care) == care && (other.values & care) == values;
  }
  constexpr Implicant without(int bit) const noexcept {
    return {care & ~(1u << bit), values & ~(1u << bit)};
  }

  friend constexpr bool operator==(const Implicant&, const Implicant&) = default;
};

// Canonical clause order: fewer literals first, then by masks.
struct ImplicantOrder {
  constexpr bool operator()(const Implicant& a, const Implicant& b) const noexcept {
    if (a.literal_count() != b.literal_count()) return a.literal_count() < b.literal_count();
    if (a.care != b.care) return a.care < b.care;
    return a.values < b.values;
  }
};

struct Predicate {
  std::string name;
  std::function<bool(const WorldState&)> holds;
};

class PredicateVocabulary {
 public:
  PredicateVocabulary() = default;

  explicit PredicateVocabulary(std::vector<Predicate> predicates) : predicates_(std::move(predicates)) {
    if (predicates_.size() > static_cast<std::size_t>(kMaxPredicates)) {
      throw InstanceTooLarge("vocabulary holds " + std::to_string(predicates_.size()) +
                             " predicates; at most 24 are supported");
    }
    for (std::size_t i = 0; i < predicates_.size(); ++i) {
      for (std::size_t j = 0; j < i; ++j) {
        if (predicates_[i].name == predicates_[j].name) {
          throw Error("duplicate predicate name '" + predicates_[i].name + "'");
        }
      }
    }
  }

  int size() const noexcept { return static_cast<int>(predicates_.size()); }
  bool empty() const noexcept { return predicates_.empty(); }
  const Predicate& operator[](int i) const { return predicates_[static_cast<std::size_t>(i)]; }
  const std::string& name(int i) const { return predicates_[static_cast<std::size_t>(i)].name; }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < predicates_.size(); ++i) {
      if (predicates_[i].name == name) return static_cast<int>(i);
    }
    return -1;
  }

 private:
  std::vector<Predicate> predicates_;
};

// Nearest object by Manhattan distance; ties go to the lower lane, then the
// lower cell. Null when the road is empty.
inline const SceneObject* nearest_hazard(const WorldState& s) {
  const SceneObject* best = nullptr;
  int best_dist = 0;
  for (const auto& o : s.objects) {
    const int d = std::abs(o.lane - s.ego_lane) + std::abs(o.cell - s.ego_cell);
    const bool better = best == nullptr || d < best_dist ||
                        (d == best_dist && (o.lane < best->lane || (o.lane == best->lane && o.cell < best->cell)));
    if (better) {
      best = &o;
      best_dist = d;
    }
  }
  return best;
}

// The fixed 16-predicate driving vocabulary. `speed_max` and `road_length`
// parameterize the two ego predicates.
inline PredicateVocabulary default_vocabulary(int speed_max, int road_length) {
  std::vector<Predicate> p;
  for (ObjectKind kind : kAllObjectKinds) {
    p.push_back({"nearest_is_" + std::string(to_string(kind)), [kind](const WorldState& s) {
                   const auto* h = nearest_hazard(s);
                   return h != nullptr && h->kind == kind;
                 }});
  }
  auto hazard = [](auto test) {
    return [test](const WorldState& s) {
      const auto* h = nearest_hazard(s);
      return h != nullptr && test(s, *h);
    };
  };
  p.push_back({"hazard_ahead", hazard([](const WorldState& s, const SceneObject& h) { return h.cell > s.ego_cell; })});
  p.push_back({"hazard_behind", hazard([](const WorldState& s, const SceneObject& h) { return h.cell < s.ego_cell; })});
  p.push_back({"hazard_left", hazard([](const WorldState& s, const SceneObject& h) { return h.lane < s.ego_lane; })});
  p.push_back({"hazard_right", hazard([](const WorldState& s, const SceneObject& h) { return h.lane > s.ego_lane; })});
  p.push_back({"hazard_same_lane",
               hazard([](const WorldState& s, const SceneObject& h) { return h.lane == s.ego_lane; })});
  p.push_back({"hazard_adjacent", hazard([](const WorldState& s, const SceneObject& h) {
                 return std::abs(h.lane - s.ego_lane) + std::abs(h.cell - s.ego_cell) <= 1;
               })});
  for (Weather w : kAllWeather) {
    p.push_back({"weather_" + std::string(to_string(w)), [w](const WorldState& s) { return s.weather == w; }});
  }
  p.push_back({"speed_high", [speed_max](const WorldState& s) { return 2 * s.ego_speed > speed_max; }});
  p.push_back({"near_road_end", [road_length](const WorldState& s) { return road_length - s.ego_cell <= 2; }});
  return PredicateVocabulary(std::move(p));
}

inline PredicateVocabulary default_vocabulary(const Scenario& scenario) {
  return default_vocabulary(scenario.speed_max, scenario.road_length);
}

inline Minterm abstract_state(const WorldState& state, const PredicateVocabulary& vocab) {
  if (vocab.empty()) throw Error("abstract_state needs a non-empty vocabulary");
  Minterm m;
  for (int i = 0; i < vocab.size(); ++i) {
    if (vocab[i].holds(state)) m.bits |= 1u << i;
  }
  return m;
}

// Literals of a clause in vocabulary order, negative ones prefixed with '!'.
inline std::vector<std::string> signed_literals(const Implicant& clause, const PredicateVocabulary& vocab) {
  std::vector<std::string> out;
  for (int i = 0; i < vocab.size(); ++i) {
    if (!((clause.care >> i) & 1u)) continue;
    out.push_back(((clause.values >> i) & 1u) ? vocab.name(i) : "!" + vocab.name(i));
  }
  return out;
}

inline std::string to_bitstring(Minterm m, int n) {
  std::string s(static_cast<std::size_t>(n), '0');
  for (int i = 0; i < n; ++i) {
    if (m[i]) s[static_cast<std::size_t>(i)] = '1';
  }
  return s;
}

}  // namespace sentinel
