#pragma once

// Exhaustive references for the labeling code: brute-force minimum cover,
// all maximal consistent implicants, and the minimal consistent DNF. Clauses
// are (care, values) pairs over n <= 24 bits.

#include <algorithm>
#include <bit>
#include <cstdint>
#include <limits>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Clause {
  std::uint32_t care = 0, values = 0;
  bool covers(std::uint32_t m) const { return (m & care) == values; }
  int literals() const { return std::popcount(care); }
  auto operator<=>(const Clause&) const = default;
};

inline int clause_cost(const Clause& c) { return 100 + c.literals(); }

inline bool consistent(const Clause& c, const std::vector<std::uint32_t>& negatives) {
  return std::none_of(negatives.begin(), negatives.end(), [&](std::uint32_t f) { return c.covers(f); });
}

// Every clause over n predicates, 3^n of them.
inline std::vector<Clause> all_clauses(int n) {
  std::vector<Clause> out{{0, 0}};
  for (int i = 0; i < n; ++i) {
    const std::size_t k = out.size();
    for (std::size_t j = 0; j < k; ++j) {
      out.push_back({out[j].care | (1u << i), out[j].values});
      out.push_back({out[j].care | (1u << i), out[j].values | (1u << i)});
    }
  }
  return out;
}

// Consistent clauses covering a target that lose consistency when any one
// literal is dropped.
inline std::set<Clause> maximal_implicants(int n, const std::vector<std::uint32_t>& targets,
                                           const std::vector<std::uint32_t>& negatives) {
  std::set<Clause> out;
  for (const auto& c : all_clauses(n)) {
    if (!consistent(c, negatives)) continue;
    if (std::none_of(targets.begin(), targets.end(), [&](std::uint32_t t) { return c.covers(t); })) continue;
    bool maximal = true;
    for (int i = 0; i < n && maximal; ++i) {
      if (!((c.care >> i) & 1u)) continue;
      const Clause wider{c.care & ~(1u << i), c.values & ~(1u << i)};
      maximal = !consistent(wider, negatives);
    }
    if (maximal) out.insert(c);
  }
  return out;
}

// Minimum-cost subset of `columns` covering every target; equal costs go to
// the lexicographically smallest sorted index list. Empty result with
// cost -1 when no subset covers.
struct SubsetOptimum {
  int cost = -1;
  std::vector<int> chosen;
};

inline SubsetOptimum brute_force_cover(const std::vector<Clause>& columns, const std::vector<std::uint32_t>& targets) {
  const int k = static_cast<int>(columns.size());
  SubsetOptimum best;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
    bool all = true;
    for (auto t : targets) {
      bool hit = false;
      for (int j = 0; j < k && !hit; ++j) hit = ((mask >> j) & 1u) && columns[j].covers(t);
      if (!hit) {
        all = false;
        break;
      }
    }
    if (!all) continue;
    int cost = 0;
    std::vector<int> chosen;
    for (int j = 0; j < k; ++j) {
      if ((mask >> j) & 1u) {
        cost += clause_cost(columns[j]);
        chosen.push_back(j);
      }
    }
    if (best.cost < 0 || cost < best.cost || (cost == best.cost && chosen < best.chosen)) {
      best.cost = cost;
      best.chosen = std::move(chosen);
    }
  }
  return best;
}

// Cheapest DNF over arbitrary clauses that covers every target and no
// negative. A literal on a predicate that is constant over T and F is either
// redundant or excludes every target, so clauses range over the predicates
// that vary. Searches by clause count, branching on the first uncovered
// target. Returns -1 when no cover has at most max_clauses clauses.
inline int minimal_dnf_cost(int n, const std::vector<std::uint32_t>& targets, const std::vector<std::uint32_t>& negatives,
                            int max_clauses = 4) {
  std::uint32_t all_or = 0, all_and = ~0u;
  for (auto v : targets) all_or |= v, all_and &= v;
  for (auto v : negatives) all_or |= v, all_and &= v;
  const std::uint32_t full = n >= 32 ? ~0u : (1u << n) - 1u;
  const std::uint32_t varying = (all_or & ~all_and) & full;

  std::vector<int> bits;
  for (int i = 0; i < n; ++i) {
    if ((varying >> i) & 1u) bits.push_back(i);
  }
  std::vector<Clause> useful;
  for (const auto& c : all_clauses(static_cast<int>(bits.size()))) {
    Clause real;
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if ((c.care >> i) & 1u) real.care |= 1u << bits[i];
      if ((c.values >> i) & 1u) real.values |= 1u << bits[i];
    }
    if (!consistent(real, negatives)) continue;
    if (std::any_of(targets.begin(), targets.end(), [&](std::uint32_t t) { return real.covers(t); })) {
      useful.push_back(real);
    }
  }

  int best = std::numeric_limits<int>::max();
  std::vector<char> covered(targets.size(), 0);
  auto search = [&](auto&& self, int depth, int cost) -> void {
    if (cost >= best) return;
    std::size_t first = targets.size();
    for (std::size_t i = 0; i < targets.size(); ++i) {
      if (!covered[i]) {
        first = i;
        break;
      }
    }
    if (first == targets.size()) {
      best = cost;
      return;
    }
    if (depth == 0) return;
    for (const auto& c : useful) {
      if (!c.covers(targets[first])) continue;
      std::vector<std::size_t> newly;
      for (std::size_t i = 0; i < targets.size(); ++i) {
        if (!covered[i] && c.covers(targets[i])) {
          covered[i] = 1;
          newly.push_back(i);
        }
      }
      self(self, depth - 1, cost + clause_cost(c));
      for (auto i : newly) covered[i] = 0;
    }
  };
  for (int k = 1; k <= max_clauses && best == std::numeric_limits<int>::max(); ++k) search(search, k, 0);
  return best == std::numeric_limits<int>::max() ? -1 : best;
}

}  // namespace oracle
