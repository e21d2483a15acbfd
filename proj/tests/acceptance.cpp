// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cstdio>
#include <functional>
#include <set>
#include <string>

#include "oracles/boolean.hpp"
#include "oracles/probability_tree.hpp"
#include "sentinel/sentinel.hpp"
#include "support.hpp"

using namespace sentinel;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<std::uint32_t> raw(const std::vector<Minterm>& ms) {
  std::vector<std::uint32_t> out;
  for (auto m : ms) out.push_back(m.bits);
  return out;
}

// 1. Planted two-mode sample.
Verdict planted_mixture() {
  const auto r = testing_support::planted_two_mode(0);
  const auto t0 = clock_type::now();
  const auto g = select_model(r, 5, 0);
  const double secs = seconds_since(t0);
  if (g.size() != 2) return {false, fmt("selected m=%zu", g.size())};
  const auto& a = g.components[0];
  const auto& b = g.components[1];
  const bool ok = std::abs(a.mean + 80.0) <= 0.5 && std::abs(b.mean - 8.0) <= 0.5 && std::abs(a.weight - 0.5) <= 0.05 &&
                  std::abs(b.weight - 0.5) <= 0.05 && secs < 1.0;
  return {ok, fmt("m=2 means (%.3f, %.3f) weights (%.3f, %.3f) in %.3fs", a.mean, b.mean, a.weight, b.weight, secs)};
}

// 2. Log-likelihood traces of every restart of every m on 100 datasets.
Verdict em_monotone() {
  double worst = 0.0;
  std::size_t traces = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto rng = CounterStream::derive(1000 + seed, 0);
    const auto n = static_cast<std::size_t>(50 + rng.below(451));
    const int modes = 1 + static_cast<int>(rng.below(4));
    std::vector<double> data;
    for (int k = 0; k < modes; ++k) {
      const double mean = -100.0 + 110.0 * rng.uniform();
      const double sd = 0.1 + 10.0 * rng.uniform();
      const auto part = testing_support::normal_samples(seed, n / static_cast<std::size_t>(modes) + 1, mean, sd,
                                                        static_cast<std::uint64_t>(k) + 1);
      data.insert(data.end(), part.begin(), part.end());
    }
    data.resize(n);
    for (int m = 1; m <= 5; ++m) {
      EmDiagnostics diag;
      em_fit(data, m, seed, &diag);
      for (const auto& t : diag.traces) {
        ++traces;
        for (std::size_t i = 1; i < t.size(); ++i) worst = std::min(worst, t[i] - t[i - 1]);
      }
    }
  }
  return {worst >= -1e-8, fmt("%zu traces, largest decrease %.3g", traces, -worst)};
}

Scenario random_scenario(CounterStream& rng) {
  Scenario s;
  s.lanes = 1 + static_cast<int>(rng.below(4));
  s.road_length = 8 + static_cast<int>(rng.below(25));
  s.speed_max = 1 + static_cast<int>(rng.below(3));
  s.horizon = 3 + static_cast<int>(rng.below(15));
  s.policy_noise = 0.5 * rng.uniform();
  s.initial_state.ego_lane = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.lanes)));
  s.initial_state.ego_speed = static_cast<int>(rng.below(static_cast<std::uint64_t>(s.speed_max) + 1));
  s.initial_state.weather = kAllWeather[rng.below(3)];
  const int objects = static_cast<int>(rng.below(5));
  for (int i = 0; i < objects; ++i) {
    SceneObject o{kAllObjectKinds[rng.below(5)], static_cast<int>(rng.below(static_cast<std::uint64_t>(s.lanes))),
                  1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(s.road_length - 1))),
                  static_cast<int>(rng.below(3)) - 1, rng.uniform()};
    if (s.initial_state.object_at(o.lane, o.cell) == nullptr) s.initial_state.objects.push_back(o);
  }
  return s;
}

// 3. Frequencies over 50 randomized scenarios.
Verdict frequencies() {
  double worst_sum = 0.0;
  int exact = 0;
  auto rng = CounterStream::derive(3, 0);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_scenario(rng);
    AnalysisOptions opt;
    opt.rollout.k = 50 + static_cast<int>(rng.below(451));
    opt.rollout.seed = static_cast<std::uint64_t>(i);
    const auto a = analyze(s, opt);
    double sum = 0.0;
    bool all_exact = true;
    for (const auto& c : a.clusters) {
      sum += c.frequency;
      all_exact = all_exact && c.frequency == static_cast<double>(c.members.size()) / opt.rollout.k;
    }
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    exact += all_exact ? 1 : 0;
  }
  return {worst_sum <= 1e-9 && exact == 50, fmt("%d/50 runs exact, max |sum-1| %.3g", exact, worst_sum)};
}

// 4. Flagged frequency against the exact failure probability.
Verdict monte_carlo() {
  Scenario s = testing_support::road(3, 12, 1, 5, 0.3);
  s.reward_params.off_road = -80.0;
  s.initial_state.ego_lane = 1;
  s.initial_state.objects = {{ObjectKind::pedestrian, 0, 2, 1, 0.5}};
  oracle::TreeScenario t{3, 12, 1, 5, 0.95, 0.3};
  t.off_road = -80.0;
  t.ego_lane = 1;
  t.ego_cell = 0;
  t.ego_speed = 1;
  t.objects = {{0, 2, 1, 0.5}};

  const auto t0 = clock_type::now();
  const double exact = oracle::expand(t).prob_return_at_most(TriggerConfig{}.r_fail);
  constexpr double kFrozen = 0.6375876567;  // probability-tree value
  int within = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    AnalysisOptions opt;
    opt.rollout.k = 1000;
    opt.rollout.seed = seed;
    const auto a = analyze(s, opt);
    double flagged = 0.0;
    for (const auto& c : a.clusters) flagged += c.flagged ? c.frequency : 0.0;
    within += std::abs(flagged - exact) <= 0.05 ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  const bool ok = std::abs(exact - kFrozen) <= 1e-9 && within >= 95 && secs < 60.0;
  return {ok, fmt("exact %.10f, %d/100 seeds within 0.05, %.1fs", exact, within, secs)};
}

// 5. Cover optimality on 200 instances with at most 12 primes.
Verdict cover_optimality() {
  const auto t0 = clock_type::now();
  auto rng = CounterStream::derive(5, 0);
  int done = 0, agree = 0, valid = 0;
  while (done < 200) {
    const int n = 3 + static_cast<int>(rng.below(5));
    std::vector<Minterm> tm, fm;
    const int nt = 1 + static_cast<int>(rng.below(10)), nf = static_cast<int>(rng.below(12));
    for (int i = 0; i < nt; ++i) tm.push_back({static_cast<std::uint32_t>(rng.below(1u << n))});
    for (int i = 0; i < nf; ++i) fm.push_back({static_cast<std::uint32_t>(rng.below(1u << n))});
    CoverInstance inst;
    try {
      inst = make_cover_instance(n, tm, fm);
    } catch (const AmbiguousCluster&) {
      continue;
    }
    const auto primes = qm_prime_implicants(inst);
    if (primes.size() > 12) continue;
    ++done;
    std::vector<oracle::Clause> cols;
    for (const auto& p : primes) cols.push_back({p.care, p.values});
    const auto best = oracle::brute_force_cover(cols, raw(inst.targets));
    const auto a = ilp_cover(primes, inst);
    const auto b = petrick_cover(primes, inst);
    agree += a.cost_units == best.cost && b.cost_units == best.cost ? 1 : 0;
    valid += label_is_valid(a, inst) && label_is_valid(b, inst) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {agree == 200 && valid == 200 && secs < 30.0,
          fmt("%d/200 costs equal brute force, %d/200 sound and complete, %.2fs", agree, valid, secs)};
}

// 6. QM primes against exhaustive enumeration.
Verdict prime_sets() {
  const auto t0 = clock_type::now();
  auto rng = CounterStream::derive(6, 0);
  int done = 0, equal = 0;
  while (done < 100) {
    const int n = 1 + static_cast<int>(rng.below(6));
    const auto space = std::uint64_t{1} << n;
    std::vector<Minterm> tm, fm;
    const auto nt = 1 + rng.below(space), nf = rng.below(space);
    for (std::uint64_t i = 0; i < nt; ++i) tm.push_back({static_cast<std::uint32_t>(rng.below(space))});
    for (std::uint64_t i = 0; i < nf; ++i) fm.push_back({static_cast<std::uint32_t>(rng.below(space))});
    CoverInstance inst;
    try {
      inst = make_cover_instance(n, tm, fm);
    } catch (const AmbiguousCluster&) {
      continue;
    }
    ++done;
    std::set<oracle::Clause> got;
    for (const auto& p : qm_prime_implicants(inst)) got.insert({p.care, p.values});
    equal += got == oracle::maximal_implicants(n, raw(inst.targets), raw(inst.negatives)) ? 1 : 0;
  }
  const double secs = seconds_since(t0);
  return {equal == 100 && secs < 10.0, fmt("%d/100 prime sets equal, %.2fs", equal, secs)};
}

// 7. Runtime ordering at 14 predicates, 60 targets, 20 trials.
Verdict runtime_ordering() {
  const auto report = bench_cover(14, 60, 20, 0);
  const int completed = 20 - report.timeouts();
  const double pet = report.median_petrick_ms(), ilp = report.median_ilp_ms();
  return {ilp <= pet && report.all_costs_equal(),
          fmt("median ilp %.1f ms, petrick %.1f ms (time to term cap when capped); petrick completed %d/20, "
              "cost equality compared on those %d",
              ilp, pet, completed, completed)};
}

// 8. Golden report.
Verdict golden() {
  const std::string args = "run --scenario scenarios/pedestrian_ahead_left.json --seed 0";
  const auto a = testing_support::run_cli(args);
  const auto b = testing_support::run_cli(args);
  const auto want = testing_support::read_file(testing_support::source_dir() + "/tests/golden/pedestrian_ahead_left.json");
  const bool stable = a.exit_code == 0 && a.out == b.out;
  const bool matches = a.out == want;

  const auto sc = load_scenario(testing_support::source_dir() + "/scenarios/pedestrian_ahead_left.json");
  const auto analysis = analyze(sc, {});
  int minimal = 0;
  for (const auto& l : analysis.labels) {
    const int best = oracle::minimal_dnf_cost(l.instance.n, raw(l.instance.targets), raw(l.instance.negatives));
    minimal += best == l.label.cost_units ? 1 : 0;
  }
  int worded = 0;
  const auto report = nlohmann::json::parse(a.out.empty() ? "{}" : a.out);
  if (report.contains("explanations")) {
    for (const auto& [id, e] : report["explanations"].items()) {
      const auto text = e["b3"]["text"].get<std::string>();
      bool direction = false;
      for (const char* w : {"ahead", "behind", "left", "right", "in lane", "adjacent"}) {
        direction = direction || text.find(w) != std::string::npos;
      }
      worded += text.find("edestrian") != std::string::npos && direction ? 1 : 0;
    }
  }
  const int labels = static_cast<int>(analysis.labels.size());
  const bool ok = stable && matches && labels > 0 && minimal == labels && worded == labels;
  return {ok, fmt("runs identical: %s, golden match: %s, %d/%d labels minimal, %d/%d b3 texts name pedestrian and "
                  "direction",
                  stable ? "yes" : "no", matches ? "yes" : "no", minimal, labels, worded, labels)};
}

// 9. One worker against eight on every bundled scenario.
Verdict thread_equivalence() {
  const std::vector<std::string> names{"pedestrian_ahead_left", "empty_road",       "single_lane_pedestrian",
                                       "stopped_car_two_lanes", "cyclist_weaving",  "debris_in_fog",
                                       "construction_zone",     "rain_mixed_traffic", "narrow_off_road",
                                       "dense_obstacles",       "pedestrian_crossing_short", "costly_lane_changes"};
  int same = 0;
  for (const auto& n : names) {
    const std::string args = "run --scenario scenarios/" + n + ".json";
    const auto one = testing_support::run_cli(args, "SENTINEL_THREADS=1");
    const auto eight = testing_support::run_cli(args, "SENTINEL_THREADS=8");
    same += !one.out.empty() && one.out == eight.out && one.exit_code == eight.exit_code ? 1 : 0;
  }
  const int total = static_cast<int>(names.size());
  return {same == total && total >= 10, fmt("%d/%d scenarios byte-identical", same, total)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
      {"planted mixture recovery", planted_mixture},
      {"EM monotonicity", em_monotone},
      {"occupational frequencies", frequencies},
      {"Monte Carlo vs probability tree", monte_carlo},
      {"cover optimality", cover_optimality},
      {"QM prime sets", prime_sets},
      {"runtime ordering", runtime_ordering},
      {"end-to-end golden", golden},
      {"thread-count equivalence", thread_equivalence},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("threw: ") + e.what()};
    }
    failed += v.pass ? 0 : 1;
    std::printf("criterion %zu %s: %s: %s\n", i + 1, v.pass ? "PASS" : "FAIL", criteria[i].first, v.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
