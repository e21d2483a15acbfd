#pragma once

// End-to-end analysis of one scenario and its JSON report.

#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentinel/clustering.hpp"
#include "sentinel/cover.hpp"
#include "sentinel/domain.hpp"
#include "sentinel/error.hpp"
#include "sentinel/explain.hpp"
#include "sentinel/logic.hpp"
#include "sentinel/rollout.hpp"

#ifndef SENTINEL_VERSION
#define SENTINEL_VERSION "0.1.0"
#endif

namespace sentinel {

inline constexpr const char* kVersion = SENTINEL_VERSION;

struct AnalysisOptions {
  RolloutConfig rollout;
  TriggerConfig trigger;
  int m_max = 5;
  CoverMethod method = CoverMethod::ilp;
  std::vector<Modality> modalities{kAllModalities.begin(), kAllModalities.end()};
  int workers = 0;  // 0: hardware concurrency
};

struct ClusterLabel {
  int cluster_id = 0;
  CoverInstance instance;
  DnfLabel label;
};

// Minterms seen both inside and outside a flagged cluster. `labeled` is
// false when nothing was left to label.
struct AmbiguityNotice {
  int cluster_id = 0;
  std::vector<Minterm> minterms;
  bool labeled = true;
};

struct Analysis {
  AnalysisOptions options;
  PredicateVocabulary vocabulary;
  std::vector<RolloutResult> results;
  GaussianMixture mixture;
  std::vector<ClusterSummary> clusters;
  std::vector<ClusterLabel> labels;
  std::vector<Explanation> explanations;
  std::vector<AmbiguityNotice> ambiguous;

  int flagged_count() const {
    int n = 0;
    for (const auto& c : clusters) n += c.flagged ? 1 : 0;
    return n;
  }
  // Something was flagged and none of it could be labeled.
  bool all_flagged_ambiguous() const { return flagged_count() > 0 && labels.empty(); }
};

inline Analysis analyze(const Scenario& scenario, const AnalysisOptions& options) {
  validate(scenario);
  Analysis a;
  a.options = options;
  a.vocabulary = default_vocabulary(scenario);
  a.results = run_monte_carlo(scenario, options.rollout, options.workers);

  std::vector<double> returns;
  returns.reserve(a.results.size());
  for (const auto& r : a.results) returns.push_back(r.ret);
  a.mixture = select_model(returns, options.m_max, options.rollout.seed);
  a.clusters = detect_failure_modes(assign_clusters(a.mixture, a.results), options.trigger);

  for (const auto& c : a.clusters) {
    if (!c.flagged) continue;
    CoverInstance instance;
    try {
      instance = build_cover_instance(c, a.clusters, a.results, a.vocabulary);
    } catch (const AmbiguousCluster&) {
      // Every target is ambiguous; rebuild the conflict list for the notice.
      AmbiguityNotice notice{c.cluster_id, {}, false};
      std::vector<Minterm> inside;
      for (int idx : c.members) inside.push_back(abstract_state(a.results[static_cast<std::size_t>(idx)].outcome_state, a.vocabulary));
      std::sort(inside.begin(), inside.end());
      inside.erase(std::unique(inside.begin(), inside.end()), inside.end());
      notice.minterms = std::move(inside);
      a.ambiguous.push_back(std::move(notice));
      continue;
    }
    const auto primes = qm_prime_implicants(instance);
    auto label = options.method == CoverMethod::ilp ? ilp_cover(primes, instance) : petrick_cover(primes, instance);
    if (!instance.ambiguous.empty()) a.ambiguous.push_back({c.cluster_id, instance.ambiguous, true});
    const auto tokens = extract_tokens(label, a.vocabulary);
    for (Modality m : options.modalities) a.explanations.push_back(render(tokens, m, c));
    a.labels.push_back({c.cluster_id, std::move(instance), std::move(label)});
  }
  return a;
}

namespace detail {

inline nlohmann::json optional_string(const std::optional<std::string>& s) {
  return s ? nlohmann::json(*s) : nlohmann::json(nullptr);
}

inline void dump_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  if (v == 0.0) v = 0.0;  // no negative zero
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

inline void dump_canonical(std::string& out, const nlohmann::json& j, int indent) {
  const std::string pad(static_cast<std::size_t>(indent + 2), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent), ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      // nlohmann's default object type is an std::map, so keys come sorted.
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += pad;
        out += nlohmann::json(it.key()).dump(-1, ' ', false);
        out += ": ";
        dump_canonical(out, it.value(), indent + 2);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      out += flat ? "[" : "[\n";
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += flat ? ", " : ",\n";
        first = false;
        if (!flat) out += pad;
        dump_canonical(out, e, indent + 2);
      }
      out += flat ? "]" : "\n" + close_pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      dump_number(out, j.get<double>());
      return;
    default:
      out += j.dump(-1, ' ', false);
      return;
  }
}

}  // namespace detail

// Sorted keys, two-space indent, floats with 9 significant digits.
inline std::string dump_canonical(const nlohmann::json& j) {
  std::string out;
  detail::dump_canonical(out, j, 0);
  out += '\n';
  return out;
}

inline nlohmann::json report_json(const Analysis& a, const std::string& scenario_path) {
  using nlohmann::json;
  const int n = a.vocabulary.size();

  json meta;
  meta["scenario"] = scenario_path;
  meta["seed"] = a.options.rollout.seed;
  meta["rollouts"] = a.options.rollout.k;
  meta["m_max"] = a.options.m_max;
  meta["p_min"] = a.options.trigger.p_min;
  meta["r_fail"] = a.options.trigger.r_fail;
  meta["method"] = a.options.method == CoverMethod::ilp ? "ilp" : "qm";
  json modalities = json::array();
  for (Modality m : a.options.modalities) modalities.push_back(std::string(modality_code(m)));
  meta["modalities"] = modalities;
  json vocab = json::array();
  for (int i = 0; i < n; ++i) vocab.push_back(a.vocabulary.name(i));
  meta["predicates"] = vocab;
  meta["version"] = kVersion;

  json mixture;
  json comps = json::array();
  for (const auto& c : a.mixture.components) {
    comps.push_back({{"mean", c.mean}, {"variance", c.variance}, {"weight", c.weight}});
  }
  mixture["components"] = comps;
  mixture["log_likelihood"] = a.mixture.log_likelihood;
  mixture["bic"] = a.mixture.bic();
  mixture["iterations"] = a.mixture.iterations;
  mixture["n_samples"] = a.mixture.n_samples;
  mixture["variance_floor"] = a.mixture.variance_floor;

  json clusters = json::array();
  for (const auto& c : a.clusters) {
    std::map<std::string, int> outcomes;
    for (int idx : c.members) outcomes[std::string(to_string(a.results[static_cast<std::size_t>(idx)].outcome))]++;
    clusters.push_back({{"cluster_id", c.cluster_id},
                        {"frequency", c.frequency},
                        {"mean_reward", c.mean_reward},
                        {"mixture_weight", c.mixture_weight},
                        {"flagged", c.flagged},
                        {"size", c.members.size()},
                        {"outcomes", outcomes},
                        {"members", c.members}});
  }

  json labels = json::object();
  for (const auto& l : a.labels) {
    json clauses = json::array();
    for (const auto& c : l.label.clauses) clauses.push_back(signed_literals(c, a.vocabulary));
    labels[std::to_string(l.cluster_id)] = {{"clauses", clauses},
                                            {"cost", l.label.cost()},
                                            {"target_coverage", l.label.target_coverage},
                                            {"targets", l.instance.targets.size()},
                                            {"negatives", l.instance.negatives.size()}};
  }

  json explanations = json::object();
  for (const auto& e : a.explanations) {
    explanations[std::to_string(e.cluster_id)][std::string(modality_code(e.modality))] = {
        {"modality", std::string(to_string(e.modality))},
        {"text", e.text},
        {"object_token", detail::optional_string(e.object_token)},
        {"direction_token", detail::optional_string(e.direction_token)},
        {"probability", e.probability}};
  }

  json ambiguous = json::array();
  for (const auto& amb : a.ambiguous) {
    json minterms = json::array();
    for (Minterm m : amb.minterms) minterms.push_back(to_bitstring(m, n));
    ambiguous.push_back({{"cluster_id", amb.cluster_id}, {"labeled", amb.labeled}, {"minterms", minterms}});
  }

  return {{"meta", meta},     {"mixture", mixture},         {"clusters", clusters},
          {"labels", labels}, {"explanations", explanations}, {"ambiguous", ambiguous}};
}

inline std::string render_report(const Analysis& a, const std::string& scenario_path) {
  return dump_canonical(report_json(a, scenario_path));
}

}  // namespace sentinel
