#pragma once

// Timing comparison of the two exact cover solvers on random instances.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <optional>
#include <vector>

#include "sentinel/cover.hpp"
#include "sentinel/random.hpp"

namespace sentinel {

struct BenchTrial {
  int trial = 0;
  std::size_t primes = 0;
  double petrick_ms = 0.0;  // time until completion or until the term cap hit
  double ilp_ms = 0.0;
  bool petrick_completed = false;
  int petrick_cost_units = 0;
  int ilp_cost_units = 0;

  bool costs_equal() const noexcept { return !petrick_completed || petrick_cost_units == ilp_cost_units; }
};

struct BenchReport {
  int n_predicates = 0;
  int n_targets = 0;
  std::vector<BenchTrial> trials;

  static double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const auto h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  }
  static double mean(const std::vector<double>& v) {
    if (v.empty()) return 0.0;
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
  std::vector<double> petrick_times() const {
    std::vector<double> v;
    for (const auto& t : trials) v.push_back(t.petrick_ms);
    return v;
  }
  std::vector<double> ilp_times() const {
    std::vector<double> v;
    for (const auto& t : trials) v.push_back(t.ilp_ms);
    return v;
  }
  double median_petrick_ms() const { return median(petrick_times()); }
  double median_ilp_ms() const { return median(ilp_times()); }
  bool all_costs_equal() const {
    return std::all_of(trials.begin(), trials.end(), [](const auto& t) { return t.costs_equal(); });
  }
  int timeouts() const {
    return static_cast<int>(std::count_if(trials.begin(), trials.end(), [](const auto& t) { return !t.petrick_completed; }));
  }
};

// 2 * n_targets distinct minterms drawn uniformly, shuffled, and split into
// targets and negatives.
inline CoverInstance random_cover_instance(int n_predicates, int n_targets, CounterStream& rng) {
  detail::check_size(n_predicates);
  const std::uint64_t space = 1ULL << n_predicates;
  const auto wanted = std::min<std::uint64_t>(2ULL * static_cast<std::uint64_t>(n_targets), space);
  std::vector<Minterm> picked;
  std::unordered_set<std::uint32_t> seen;
  while (picked.size() < wanted) {
    const auto bits = static_cast<std::uint32_t>(rng.below(space));
    if (seen.insert(bits).second) picked.push_back({bits});
  }
  for (std::size_t i = picked.size(); i > 1; --i) std::swap(picked[i - 1], picked[rng.below(i)]);
  const auto split = std::min<std::size_t>(static_cast<std::size_t>(n_targets), picked.size());
  std::vector<Minterm> targets(picked.begin(), picked.begin() + static_cast<std::ptrdiff_t>(split));
  std::vector<Minterm> negatives(picked.begin() + static_cast<std::ptrdiff_t>(split), picked.end());
  return make_cover_instance(n_predicates, std::move(targets), std::move(negatives));
}

// Trials run sequentially. A Petrick run that hits the term cap is recorded
// as an incomplete trial with the time spent until the cap.
inline BenchReport bench_cover(int n_predicates, int n_targets, int trials, std::uint64_t seed,
                               const PetrickOptions& petrick = {}) {
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  BenchReport report;
  report.n_predicates = n_predicates;
  report.n_targets = n_targets;
  for (int i = 0; i < trials; ++i) {
    auto rng = CounterStream::derive(seed, static_cast<std::uint64_t>(i));
    const auto instance = random_cover_instance(n_predicates, n_targets, rng);
    const auto primes = qm_prime_implicants(instance);
    BenchTrial t;
    t.trial = i;
    t.primes = primes.size();

    auto t0 = clock::now();
    try {
      t.petrick_cost_units = petrick_cover(primes, instance, petrick).cost_units;
      t.petrick_completed = true;
    } catch (const InstanceTooLarge&) {
      t.petrick_completed = false;
    }
    t.petrick_ms = ms_since(t0);

    t0 = clock::now();
    t.ilp_cost_units = ilp_cover(primes, instance).cost_units;
    t.ilp_ms = ms_since(t0);
    report.trials.push_back(t);
  }
  return report;
}

}  // namespace sentinel
