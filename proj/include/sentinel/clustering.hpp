#pragma once

// One-dimensional Gaussian mixtures over rollout returns, occupational
// frequencies and failure-mode flagging.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sentinel/error.hpp"
#include "sentinel/random.hpp"
#include "sentinel/rollout.hpp"

namespace sentinel {

struct GaussianComponent {
  double mean = 0.0;
  double variance = 1.0;
  double weight = 1.0;
};

struct GaussianMixture {
  std::vector<GaussianComponent> components;  // ascending by mean
  double log_likelihood = 0.0;
  int iterations = 0;
  double variance_floor = 0.0;
  std::size_t n_samples = 0;

  std::size_t size() const noexcept { return components.size(); }

  // -2 log L + (3m - 1) ln n
  double bic() const {
    const double m = static_cast<double>(components.size());
    return -2.0 * log_likelihood + (3.0 * m - 1.0) * std::log(static_cast<double>(n_samples));
  }
};

// Log-likelihood after initialization and after every EM iteration, one
// trace per restart.
struct EmDiagnostics {
  std::vector<std::vector<double>> traces;
  int best_restart = -1;
};

struct EmOptions {
  int restarts = 5;
  int max_iterations = 500;
  double tolerance = 1e-6;
};

inline double log_normal_pdf(double x, double mean, double variance) {
  const double d = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + d * d / variance);
}

namespace detail {

// Returns are heavily repeated in discrete domains, so EM runs over distinct
// values weighted by multiplicity. The fixed points and likelihoods are the
// same as over the raw sample.
struct WeightedSample {
  std::vector<double> values;
  std::vector<double> counts;
  double n = 0.0;
};

inline WeightedSample compress(std::span<const double> sorted) {
  WeightedSample ws;
  for (double r : sorted) {
    if (ws.values.empty() || ws.values.back() != r) {
      ws.values.push_back(r);
      ws.counts.push_back(0.0);
    }
    ws.counts.back() += 1.0;
  }
  ws.n = static_cast<double>(sorted.size());
  return ws;
}

// Fills `resp` (row-major, values x components) with responsibilities and
// returns the total log-likelihood.
inline double expectation(const WeightedSample& ws, const std::vector<GaussianComponent>& comps,
                          std::vector<double>& resp) {
  const std::size_t m = comps.size();
  resp.assign(ws.values.size() * m, 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < ws.values.size(); ++i) {
    double* row = resp.data() + i * m;
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = comps[j].weight > 0.0
                   ? std::log(comps[j].weight) + log_normal_pdf(ws.values[i], comps[j].mean, comps[j].variance)
                   : -std::numeric_limits<double>::infinity();
      peak = std::max(peak, row[j]);
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < m; ++j) sum += std::exp(row[j] - peak);
    const double log_norm = peak + std::log(sum);
    for (std::size_t j = 0; j < m; ++j) row[j] = std::exp(row[j] - log_norm);
    total += ws.counts[i] * log_norm;
  }
  return total;
}

inline void maximization(const WeightedSample& ws, const std::vector<double>& resp,
                         std::vector<GaussianComponent>& comps, double floor) {
  const std::size_t m = comps.size();
  for (std::size_t j = 0; j < m; ++j) {
    double nj = 0.0;
    double sx = 0.0;
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
      const double g = ws.counts[i] * resp[i * m + j];
      nj += g;
      sx += g * ws.values[i];
    }
    if (nj <= 0.0) {
      // No mass left on this component; weight 0 is its M-step optimum.
      comps[j].weight = 0.0;
      continue;
    }
    const double mean = sx / nj;
    double ss = 0.0;
    for (std::size_t i = 0; i < ws.values.size(); ++i) {
      const double d = ws.values[i] - mean;
      ss += ws.counts[i] * resp[i * m + j] * d * d;
    }
    comps[j].mean = mean;
    comps[j].variance = std::max(ss / nj, floor);
    comps[j].weight = nj / ws.n;
  }
}

struct EmRun {
  std::vector<GaussianComponent> components;
  double log_likelihood = 0.0;
  int iterations = 0;
  std::vector<double> trace;
};

inline EmRun run_em(const WeightedSample& ws, std::vector<GaussianComponent> comps, double floor,
                    const EmOptions& opt) {
  EmRun run;
  std::vector<double> resp;
  double ll = expectation(ws, comps, resp);
  run.trace.push_back(ll);
  for (int it = 1; it <= opt.max_iterations; ++it) {
    maximization(ws, resp, comps, floor);
    const double next = expectation(ws, comps, resp);
    run.trace.push_back(next);
    run.iterations = it;
    const bool converged = next - ll < opt.tolerance;
    ll = next;
    if (converged) break;
  }
  run.components = std::move(comps);
  run.log_likelihood = ll;
  return run;
}

// Sort by mean, drop weightless components and merge exact duplicates.
inline std::vector<GaussianComponent> canonicalize(std::vector<GaussianComponent> comps) {
  std::stable_sort(comps.begin(), comps.end(),
                   [](const auto& a, const auto& b) { return a.mean < b.mean; });
  std::vector<GaussianComponent> out;
  for (const auto& c : comps) {
    if (c.weight <= 0.0) continue;
    if (!out.empty() && out.back().mean == c.mean) {
      out.back().weight += c.weight;
      continue;
    }
    out.push_back(c);
  }
  return out;
}

}  // namespace detail

inline double variance_floor_for(std::span<const double> rewards) {
  if (rewards.empty()) return 1e-9;
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  const double range = *hi - *lo;
  return std::max(1e-9, 1e-6 * range * range);
}

// Fits an m-component mixture. Restart 0 starts from the (i + 0.5)/m
// quantiles; later restarts place the means on distinct random members.
// The restart with the highest final log-likelihood wins (earliest on ties).
inline GaussianMixture em_fit(std::span<const double> rewards, int m, std::uint64_t seed,
                              EmDiagnostics* diagnostics = nullptr, const EmOptions& options = {}) {
  if (m < 1) throw InsufficientData("component count must be >= 1");
  if (rewards.size() < static_cast<std::size_t>(m)) {
    throw InsufficientData("need at least " + std::to_string(m) + " rewards, got " +
                           std::to_string(rewards.size()));
  }
  std::vector<double> sorted(rewards.begin(), rewards.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  const double floor = variance_floor_for(sorted);

  if (sorted.front() == sorted.back() && m > 1) {
    throw DegenerateInput("all rewards identical; fit a single component instead");
  }

  double mean = 0.0;
  for (double r : sorted) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : sorted) var += (r - mean) * (r - mean);
  var = std::max(var / static_cast<double>(n), floor);

  const auto ws = detail::compress(sorted);
  const double w0 = 1.0 / static_cast<double>(m);

  std::optional<detail::EmRun> best;
  int best_index = -1;
  if (diagnostics) diagnostics->traces.clear();

  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    std::vector<GaussianComponent> init(static_cast<std::size_t>(m));
    if (restart == 0) {
      for (int j = 0; j < m; ++j) {
        const double q = (j + 0.5) / m;
        const auto idx = std::min(n - 1, static_cast<std::size_t>(q * static_cast<double>(n)));
        init[static_cast<std::size_t>(j)] = {sorted[idx], var, w0};
      }
    } else {
      // Partial Fisher-Yates over member indices.
      auto rng = CounterStream::derive(seed, static_cast<std::uint64_t>(restart));
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      for (int j = 0; j < m; ++j) {
        const auto pick = static_cast<std::size_t>(j) + rng.below(n - static_cast<std::size_t>(j));
        std::swap(idx[static_cast<std::size_t>(j)], idx[pick]);
        init[static_cast<std::size_t>(j)] = {sorted[idx[static_cast<std::size_t>(j)]], var, w0};
      }
    }
    auto run = detail::run_em(ws, std::move(init), floor, options);
    if (diagnostics) diagnostics->traces.push_back(run.trace);
    if (!best || run.log_likelihood > best->log_likelihood) {
      best = std::move(run);
      best_index = restart;
    }
  }
  if (diagnostics) diagnostics->best_restart = best_index;

  GaussianMixture gm;
  gm.components = detail::canonicalize(std::move(best->components));
  gm.log_likelihood = best->log_likelihood;
  gm.iterations = best->iterations;
  gm.variance_floor = floor;
  gm.n_samples = n;
  return gm;
}

// BIC model selection over m = 1..m_max; ties go to the smaller m. Counts
// above the sample size and degenerate fits are skipped.
inline GaussianMixture select_model(std::span<const double> rewards, int m_max, std::uint64_t seed) {
  if (m_max < 1) throw InsufficientData("m_max must be >= 1");
  if (rewards.empty()) throw InsufficientData("no rewards to cluster");
  std::optional<GaussianMixture> best;
  for (int m = 1; m <= m_max && static_cast<std::size_t>(m) <= rewards.size(); ++m) {
    GaussianMixture fit;
    try {
      fit = em_fit(rewards, m, seed);
    } catch (const DegenerateInput&) {
      continue;
    }
    if (!best || fit.bic() < best->bic()) best = std::move(fit);
  }
  return *best;
}

struct ClusterSummary {
  int cluster_id = 0;
  double frequency = 0.0;
  double mean_reward = 0.0;
  std::vector<int> members;  // rollout indices, ascending
  bool flagged = false;
  double mixture_weight = 0.0;

  friend bool operator==(const ClusterSummary&, const ClusterSummary&) = default;
};

struct TriggerConfig {
  double p_min = 0.05;
  double r_fail = -40.0;
};

// Component with the highest w_j N(r | j); ties go to the lower index.
inline int most_responsible(const GaussianMixture& mixture, double r) {
  int best = 0;
  double best_score = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < mixture.components.size(); ++j) {
    const auto& c = mixture.components[j];
    const double score = std::log(c.weight) + log_normal_pdf(r, c.mean, c.variance);
    if (score > best_score) {
      best_score = score;
      best = static_cast<int>(j);
    }
  }
  return best;
}

// Hard assignment; empty clusters are kept with frequency 0 and report the
// component mean as their mean reward.
inline std::vector<ClusterSummary> assign_clusters(const GaussianMixture& mixture,
                                                   std::span<const RolloutResult> results) {
  std::vector<ClusterSummary> clusters(mixture.components.size());
  std::vector<double> sums(mixture.components.size(), 0.0);
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    clusters[j].cluster_id = static_cast<int>(j);
    clusters[j].mixture_weight = mixture.components[j].weight;
  }
  for (const auto& r : results) {
    const auto j = static_cast<std::size_t>(most_responsible(mixture, r.ret));
    clusters[j].members.push_back(r.index);
    sums[j] += r.ret;
  }
  const double k = static_cast<double>(results.size());
  for (std::size_t j = 0; j < clusters.size(); ++j) {
    auto& c = clusters[j];
    std::sort(c.members.begin(), c.members.end());
    c.frequency = k > 0 ? static_cast<double>(c.members.size()) / k : 0.0;
    c.mean_reward = c.members.empty() ? mixture.components[j].mean
                                      : sums[j] / static_cast<double>(c.members.size());
  }
  return clusters;
}

// Both thresholds inclusive.
inline std::vector<ClusterSummary> detect_failure_modes(std::vector<ClusterSummary> clusters,
                                                        const TriggerConfig& trigger) {
  for (auto& c : clusters) c.flagged = c.frequency >= trigger.p_min && c.mean_reward <= trigger.r_fail;
  return clusters;
}

}  // namespace sentinel
