// sentinel: failure-mode analysis and cover-solver benchmark.

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sentinel/sentinel.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitInput = 2;
constexpr int kExitAmbiguous = 3;

struct RunArgs {
  std::string scenario;
  int rollouts = 1000;
  std::uint64_t seed = 0;
  std::string modality = "all";
  double p_min = 0.05;
  double r_fail = -40.0;
  int m_max = 5;
  std::string method = "ilp";
  std::string out;
};

struct BenchArgs {
  int predicates = 14;
  int targets = 60;
  int trials = 20;
  std::uint64_t seed = 0;
};

// SENTINEL_THREADS caps rollout workers; unset means the machine default.
int worker_count() {
  const char* env = std::getenv("SENTINEL_THREADS");
  if (env == nullptr || *env == '\0') return 0;
  char* end = nullptr;
  const long v = std::strtol(env, &end, 10);
  if (*end != '\0' || v < 1 || v > 4096) {
    throw sentinel::ValidationError("SENTINEL_THREADS", "expected a positive integer, got '" + std::string(env) + "'");
  }
  return static_cast<int>(v);
}

int cmd_run(const RunArgs& args) {
  using namespace sentinel;
  if (!(args.p_min > 0.0 && args.p_min < 1.0)) throw ValidationError("--p-min", "must lie in (0,1)");
  AnalysisOptions opt;
  opt.rollout.k = args.rollouts;
  opt.rollout.seed = args.seed;
  opt.trigger.p_min = args.p_min;
  opt.trigger.r_fail = args.r_fail;
  opt.m_max = args.m_max;
  opt.method = args.method == "qm" ? CoverMethod::qm_petrick : CoverMethod::ilp;
  if (args.modality != "all") opt.modalities = {*modality_from_code(args.modality)};
  opt.workers = worker_count();

  const Scenario scenario = load_scenario(args.scenario);
  const Analysis analysis = analyze(scenario, opt);
  const std::string report = render_report(analysis, args.scenario);

  if (args.out.empty()) {
    std::cout << report;
  } else {
    std::ofstream f(args.out, std::ios::binary);
    if (!f) throw Error("cannot write '" + args.out + "'");
    f << report;
  }
  if (analysis.all_flagged_ambiguous()) {
    std::cerr << "every flagged cluster is ambiguous; no label produced\n";
    return kExitAmbiguous;
  }
  return kExitOk;
}

int cmd_bench(const BenchArgs& args) {
  const auto report = sentinel::bench_cover(args.predicates, args.targets, args.trials, args.seed);
  std::printf("bench: %d predicates, %d targets, %d trials, seed %llu\n", args.predicates, args.targets, args.trials,
              static_cast<unsigned long long>(args.seed));
  for (const auto& t : report.trials) {
    // A capped Petrick run has no cost to compare against.
    const char* equal = !t.petrick_completed ? "n/a" : t.costs_equal() ? "true" : "false";
    std::printf("trial %d: primes %zu, petrick %.1f ms%s, ilp %.1f ms, costs equal: %s\n", t.trial, t.primes,
                t.petrick_ms, t.petrick_completed ? "" : " (term cap)", t.ilp_ms, equal);
  }
  std::printf("%-8s %12s %12s %10s\n", "method", "median_ms", "mean_ms", "completed");
  if (!report.trials.empty()) {
    const int n = static_cast<int>(report.trials.size());
    std::printf("%-8s %12.1f %12.1f %10d\n", "petrick", report.median_petrick_ms(),
                sentinel::BenchReport::mean(report.petrick_times()), n - report.timeouts());
    std::printf("%-8s %12.1f %12.1f %10d\n", "ilp", report.median_ilp_ms(),
                sentinel::BenchReport::mean(report.ilp_times()), n);
    std::printf("costs equal: %s (%d of %d trials compared)\n", report.all_costs_equal() ? "true" : "false",
                n - report.timeouts(), n);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Failure-mode identification and handover explanations for a simulated driving task"};
  app.set_version_flag("--version", std::string(sentinel::kVersion));
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Roll out a scenario, cluster returns, label and explain failure modes");
  run_cmd->add_option("--scenario", run.scenario, "Scenario JSON file")->required();
  run_cmd->add_option("--rollouts", run.rollouts, "Monte Carlo rollouts")->check(CLI::Range(1, 10'000'000));
  run_cmd->add_option("--seed", run.seed, "Random seed");
  run_cmd->add_option("--modality", run.modality, "Alert modality")
      ->check(CLI::IsMember({"a", "b1", "b2", "b3", "b4", "all"}));
  run_cmd->add_option("--p-min", run.p_min, "Minimum cluster frequency to flag, in (0,1)");
  run_cmd->add_option("--r-fail", run.r_fail, "Maximum mean return to flag");
  run_cmd->add_option("--m-max", run.m_max, "Largest mixture size considered")->check(CLI::Range(1, 50));
  run_cmd->add_option("--method", run.method, "Cover solver")->check(CLI::IsMember({"qm", "ilp"}));
  run_cmd->add_option("--out", run.out, "Report path (default stdout)");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time Petrick's method against the integer program on random covers");
  bench_cmd->add_option("--predicates", bench.predicates, "Predicates per instance")->check(CLI::Range(1, 24));
  bench_cmd->add_option("--targets", bench.targets, "Target minterms per instance")->check(CLI::Range(1, 100'000));
  bench_cmd->add_option("--trials", bench.trials, "Instances")->check(CLI::Range(0, 100'000));
  bench_cmd->add_option("--seed", bench.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*run_cmd) return cmd_run(run);
    return cmd_bench(bench);
  } catch (const sentinel::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const sentinel::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
}
