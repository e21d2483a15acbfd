#pragma once

// Minimal DNF labels for failure clusters: cover instances built from
// rollout outcomes, Quine-McCluskey prime implicants, and two exact
// minimum-cost covers over those primes (Petrick's method and a weighted
// set-cover integer program solved by branch and bound).

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sentinel/clustering.hpp"
#include "sentinel/error.hpp"
#include "sentinel/logic.hpp"
#include "sentinel/random.hpp"
#include "sentinel/rollout.hpp"

namespace sentinel {

// Clause cost is 1 + 0.01 per literal; kept in integer hundredths so that
// costs from different solvers compare exactly.
inline constexpr int kClauseCostUnits = 100;

constexpr int clause_cost_units(const Implicant& c) noexcept { return kClauseCostUnits + c.literal_count(); }

struct CoverInstance {
  int n = 0;                       // predicate count
  std::vector<Minterm> targets;    // T, sorted and unique
  std::vector<Minterm> negatives;  // F, sorted and unique
  std::vector<Minterm> ambiguous;  // seen in both; removed from T

  // Covers no negative minterm.
  bool consistent(const Implicant& c) const noexcept {
    for (Minterm f : negatives) {
      if (c.covers(f)) return false;
    }
    return true;
  }
};

struct DnfLabel {
  std::vector<Implicant> clauses;          // canonical order
  std::vector<std::size_t> target_coverage;  // targets covered, per clause
  int cost_units = 0;

  double cost() const noexcept { return cost_units / static_cast<double>(kClauseCostUnits); }

  friend bool operator==(const DnfLabel&, const DnfLabel&) = default;
};

enum class CoverMethod : std::uint8_t { qm_petrick, ilp };

namespace detail {

inline void sort_unique(std::vector<Minterm>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

inline void check_size(int n) {
  if (n < 0 || n > kMaxPredicates) {
    throw InstanceTooLarge("cover instances support at most 24 predicates, got " + std::to_string(n));
  }
}

}  // namespace detail

// Moves T/F conflicts into `ambiguous`. Throws AmbiguousCluster if nothing
// is left in T.
inline CoverInstance make_cover_instance(int n, std::vector<Minterm> targets, std::vector<Minterm> negatives) {
  detail::check_size(n);
  CoverInstance inst;
  inst.n = n;
  detail::sort_unique(targets);
  detail::sort_unique(negatives);
  for (Minterm t : targets) {
    if (std::binary_search(negatives.begin(), negatives.end(), t)) {
      inst.ambiguous.push_back(t);
    } else {
      inst.targets.push_back(t);
    }
  }
  inst.negatives = std::move(negatives);
  if (inst.targets.empty()) {
    throw AmbiguousCluster("every target minterm also occurs outside the cluster (" +
                           std::to_string(inst.ambiguous.size()) + " ambiguous)");
  }
  return inst;
}

inline CoverInstance build_cover_instance(const ClusterSummary& flagged, std::span<const ClusterSummary> all_clusters,
                                          std::span<const RolloutResult> results, const PredicateVocabulary& vocab) {
  if (!flagged.flagged) throw Error("build_cover_instance needs a flagged cluster");
  std::unordered_map<int, const RolloutResult*> by_index;
  for (const auto& r : results) by_index.emplace(r.index, &r);
  auto minterm_of = [&](int index) {
    auto it = by_index.find(index);
    if (it == by_index.end()) throw Error("cluster member " + std::to_string(index) + " has no rollout result");
    return abstract_state(it->second->outcome_state, vocab);
  };

  std::vector<Minterm> targets;
  for (int idx : flagged.members) targets.push_back(minterm_of(idx));
  std::vector<Minterm> negatives;
  for (const auto& c : all_clusters) {
    if (c.flagged) continue;
    for (int idx : c.members) negatives.push_back(minterm_of(idx));
  }
  return make_cover_instance(vocab.size(), std::move(targets), std::move(negatives));
}

// Quine-McCluskey with every unobserved minterm as a don't-care. Cubes are
// merged level by level; a cube merges across a cared bit exactly when its
// partner cube is free of negatives, which is when the full QM table would
// hold that partner. Only cubes grown from targets are materialized, so the
// result is the QM prime set restricted to primes covering a target.
inline std::vector<Implicant> qm_prime_implicants(const CoverInstance& instance) {
  detail::check_size(instance.n);
  auto key = [](const Implicant& c) { return (static_cast<std::uint64_t>(c.care) << 32) | c.values; };

  std::vector<Implicant> level;
  level.reserve(instance.targets.size());
  for (Minterm t : instance.targets) level.push_back(Implicant::of(t, instance.n));

  std::vector<Implicant> primes;
  while (!level.empty()) {
    std::vector<Implicant> next;
    std::unordered_set<std::uint64_t> seen;
    for (const auto& cube : level) {
      bool merged = false;
      for (std::uint32_t rest = cube.care; rest != 0; rest &= rest - 1) {
        const int bit = std::countr_zero(rest);
        const Implicant partner{cube.care, cube.values ^ (1u << bit)};
        if (!instance.consistent(partner)) continue;
        merged = true;
        const Implicant up = cube.without(bit);
        if (seen.insert(key(up)).second) next.push_back(up);
      }
      if (!merged) primes.push_back(cube);
    }
    level = std::move(next);
  }
  std::sort(primes.begin(), primes.end(), ImplicantOrder{});
  return primes;
}

namespace detail {

class Bitset {
 public:
  Bitset() = default;
  explicit Bitset(std::size_t bits) : words_((bits + 63) / 64, 0) {}

  void set(std::size_t i) { words_[i / 64] |= 1ULL << (i % 64); }
  void reset(std::size_t i) { words_[i / 64] &= ~(1ULL << (i % 64)); }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1ULL; }

  std::size_t count() const {
    std::size_t c = 0;
    for (auto w : words_) c += static_cast<std::size_t>(std::popcount(w));
    return c;
  }
  bool any() const {
    for (auto w : words_) {
      if (w) return true;
    }
    return false;
  }
  std::size_t and_count(const Bitset& o) const {
    std::size_t c = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) c += static_cast<std::size_t>(std::popcount(words_[i] & o.words_[i]));
    return c;
  }
  bool subset_of(const Bitset& o) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (words_[i] & ~o.words_[i]) return false;
    }
    return true;
  }
  void and_mask(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= o.words_[i];
  }
  void and_not(const Bitset& o) {
    for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= ~o.words_[i];
  }

  template <typename F>
  void for_each(F&& f) const {
    for (std::size_t i = 0; i < words_.size(); ++i) {
      for (std::uint64_t w = words_[i]; w != 0; w &= w - 1) f(i * 64 + static_cast<std::size_t>(std::countr_zero(w)));
    }
  }

  friend bool operator==(const Bitset&, const Bitset&) = default;

 private:
  std::vector<std::uint64_t> words_;
};

// Equal-cost covers are ordered by their sorted column lists; for two sets
// of equal cost that is decided by the smallest column in exactly one of them.
inline bool lex_before(const std::vector<int>& a, const std::vector<int>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

inline void check_consistent(std::span<const Implicant> primes, const CoverInstance& instance) {
  for (const auto& p : primes) {
    if (!instance.consistent(p)) throw Error("prime implicant covers a negative minterm");
  }
}

// Target -> covering primes. Throws Infeasible for an uncoverable target.
inline std::vector<std::vector<int>> covering_columns(std::span<const Implicant> primes,
                                                      const CoverInstance& instance) {
  std::vector<std::vector<int>> rows(instance.targets.size());
  for (std::size_t r = 0; r < instance.targets.size(); ++r) {
    for (std::size_t j = 0; j < primes.size(); ++j) {
      if (primes[j].covers(instance.targets[r])) rows[r].push_back(static_cast<int>(j));
    }
    if (rows[r].empty()) {
      throw Infeasible("target minterm " + to_bitstring(instance.targets[r], instance.n) + " is covered by no prime");
    }
  }
  return rows;
}

// Open-addressing set of 64-bit hashes; a negative answer is exact.
class HashSet64 {
 public:
  explicit HashSet64(std::size_t n) {
    std::size_t cap = 16;
    while (cap < 2 * n) cap *= 2;
    slots_.assign(cap, 0);
    mask_ = cap - 1;
  }
  void insert(std::uint64_t h) {
    h = h == 0 ? 1 : h;
    for (std::size_t i = h & mask_;; i = (i + 1) & mask_) {
      if (slots_[i] == h) return;
      if (slots_[i] == 0) {
        slots_[i] = h;
        return;
      }
    }
  }
  bool contains(std::uint64_t h) const {
    h = h == 0 ? 1 : h;
    for (std::size_t i = h & mask_;; i = (i + 1) & mask_) {
      if (slots_[i] == h) return true;
      if (slots_[i] == 0) return false;
    }
  }

 private:
  std::vector<std::uint64_t> slots_;
  std::size_t mask_ = 0;
};

inline DnfLabel make_label(std::span<const Implicant> primes, std::vector<int> chosen, const CoverInstance& instance) {
  std::sort(chosen.begin(), chosen.end());
  DnfLabel label;
  for (int j : chosen) {
    const auto& c = primes[static_cast<std::size_t>(j)];
    label.clauses.push_back(c);
    label.cost_units += clause_cost_units(c);
    std::size_t covered = 0;
    for (Minterm t : instance.targets) covered += c.covers(t) ? 1 : 0;
    label.target_coverage.push_back(covered);
  }
  return label;
}

}  // namespace detail

struct PetrickOptions {
  std::size_t max_terms = 10'000'000;
};

// Petrick's method: multiply out the product of sums (one sum of covering
// primes per target) with absorption, then take the cheapest product term.
// `primes` must be in canonical order, as returned by qm_prime_implicants.
inline DnfLabel petrick_cover(std::span<const Implicant> primes, const CoverInstance& instance,
                              const PetrickOptions& options = {}) {
  detail::check_consistent(primes, instance);
  auto sums = detail::covering_columns(primes, instance);
  std::sort(sums.begin(), sums.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  sums.erase(std::unique(sums.begin(), sums.end()), sums.end());

  using detail::Bitset;
  // Zobrist keys: a term's hash is the xor of its primes' keys.
  std::vector<std::uint64_t> key(primes.size());
  {
    auto rng = CounterStream::derive(0x7065747269636bULL, primes.size());
    for (auto& k : key) k = rng.next_u64();
  }
  auto hash_of = [&](const Bitset& t) {
    std::uint64_t h = 0;
    t.for_each([&](std::size_t j) { h ^= key[j]; });
    return h;
  };

  std::vector<Bitset> terms{Bitset(primes.size())};
  for (const auto& sum : sums) {
    std::vector<Bitset> kept;
    std::vector<const Bitset*> extend;
    for (const auto& t : terms) {
      bool hit = false;
      for (int p : sum) hit = hit || t.test(static_cast<std::size_t>(p));
      if (hit) {
        kept.push_back(t);
      } else {
        extend.push_back(&t);
      }
    }
    const std::size_t predicted = kept.size() + extend.size() * sum.size();
    if (predicted > options.max_terms) {
      throw InstanceTooLarge("Petrick expansion exceeds " + std::to_string(options.max_terms) + " terms");
    }
    // Kept terms by hash, for absorption checks that enumerate subsets.
    std::vector<std::pair<std::uint64_t, std::size_t>> by_hash;
    by_hash.reserve(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) by_hash.emplace_back(hash_of(kept[i]), i);
    std::sort(by_hash.begin(), by_hash.end());
    detail::HashSet64 seen(kept.size());
    for (const auto& [h, i] : by_hash) seen.insert(h);

    // Within the extended terms nothing absorbs anything else; only a kept
    // term holding the same new prime can absorb an extended one. Such a
    // term is p plus a subset of the base, so either scan the holders of p
    // or look up every subset of the base, whichever is fewer.
    std::vector<Bitset> next = kept;
    std::vector<std::size_t> bits;
    for (int p : sum) {
      const auto pj = static_cast<std::size_t>(p);
      std::vector<const Bitset*> holders;
      for (const auto& t : kept) {
        if (t.test(pj)) holders.push_back(&t);
      }
      for (const Bitset* base : extend) {
        Bitset grown = *base;
        grown.set(pj);
        bool absorbed = false;
        bits.clear();
        base->for_each([&](std::size_t j) { bits.push_back(j); });
        if (!holders.empty() && bits.size() < 63 && (std::size_t{1} << bits.size()) < holders.size()) {
          const std::uint64_t subsets = std::uint64_t{1} << bits.size();
          std::uint64_t h = key[pj];
          for (std::uint64_t g = 0; g < subsets && !absorbed; ++g) {
            // Gray code order flips one base prime per step.
            if (g > 0) h ^= key[bits[static_cast<std::size_t>(std::countr_zero(g))]];
            if (!seen.contains(h)) continue;
            auto it = std::lower_bound(by_hash.begin(), by_hash.end(), std::make_pair(h, std::size_t{0}));
            for (; it != by_hash.end() && it->first == h && !absorbed; ++it) {
              const auto& cand = kept[it->second];
              absorbed = cand.test(pj) && cand.subset_of(grown);
            }
          }
        } else {
          for (const Bitset* holder : holders) {
            if (holder->subset_of(grown)) {
              absorbed = true;
              break;
            }
          }
        }
        if (!absorbed) next.push_back(std::move(grown));
      }
    }
    terms = std::move(next);
  }

  std::vector<int> best;
  int best_cost = std::numeric_limits<int>::max();
  for (const auto& t : terms) {
    std::vector<int> cols;
    int cost = 0;
    t.for_each([&](std::size_t j) {
      cols.push_back(static_cast<int>(j));
      cost += clause_cost_units(primes[j]);
    });
    if (cost < best_cost || (cost == best_cost && detail::lex_before(cols, best))) {
      best_cost = cost;
      best = std::move(cols);
    }
  }
  return detail::make_label(primes, std::move(best), instance);
}

namespace detail {

// Bound for the covering LP  min c.x  s.t.  A x >= b, 0 <= x <= 1, with some
// columns fixed at zero.
struct LpBound {
  double value = 0.0;           // valid lower bound; +inf when infeasible
  std::vector<double> x;        // primal values of the last basis
  std::vector<double> reduced;  // c_j - y.a_j for the returned duals
};

// Basis and its dense inverse. Any basis left by CoveringLp::solve stays
// dual feasible when right-hand sides change or columns get fixed at zero,
// so children of a search node start from their parent's basis.
struct LpBasis {
  std::vector<std::size_t> basis;  // per row: structural j < n or surplus n + i
  std::vector<char> in_basis;
  std::vector<double> binv;        // row-major m x m
};

// Columns have unit entries in the rows they list. Solved by the dual
// simplex method; every iterate has duals y >= 0, and the bound
// b.y + sum_j min(0, c_j - y.a_j) over free columns is valid whenever the
// loop stops. It stops at optimality, once the bound exceeds `stop_above`,
// or after `max_iter` pivots.
class CoveringLp {
 public:
  CoveringLp(std::size_t m, const std::vector<std::vector<int>>& cols, std::vector<double> cost)
      : m_(m), n_(cols.size()), c_(std::move(cost)) {
    start_.reserve(n_ + 1);
    start_.push_back(0);
    for (const auto& col : cols) {
      for (int i : col) rows_.push_back(static_cast<std::uint32_t>(i));
      start_.push_back(rows_.size());
    }
  }

  // All-surplus basis; dual feasible because costs are nonnegative.
  LpBasis slack_basis() const {
    LpBasis s;
    s.basis.resize(m_);
    s.in_basis.assign(n_ + m_, 0);
    s.binv.assign(m_ * m_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      s.basis[i] = n_ + i;
      s.in_basis[n_ + i] = 1;
      s.binv[i * m_ + i] = -1.0;
    }
    return s;
  }

  LpBound solve(LpBasis& s, const std::vector<double>& b, const std::vector<char>& fixed, double stop_above,
                int max_iter = 4000) const {
    const std::size_t m = m_;
    const std::size_t n = n_;
    constexpr double eps = 1e-9;
    constexpr double feas = 1e-7;
    LpBound out;
    // Candidates to enter: free structural columns, then every surplus.
    std::vector<std::size_t> free_vars;
    free_vars.reserve(n + m);
    for (std::size_t j = 0; j < n; ++j) {
      if (!fixed[j]) free_vars.push_back(j);
    }
    for (std::size_t i = 0; i < m; ++i) free_vars.push_back(n + i);

    std::vector<double> y(m), xb(m), d(n + m, 0.0), alpha(n + m, 0.0), w(m);
    auto cost_of = [&](std::size_t v) { return v < n ? c_[v] : 0.0; };
    auto dot = [&](std::size_t j, const double* v) {
      double sum = 0.0;
      for (std::size_t k = start_[j]; k < start_[j + 1]; ++k) sum += v[rows_[k]];
      return sum;
    };
    auto refresh = [&] {
      for (std::size_t i = 0; i < m; ++i) {
        double sum = 0.0;
        for (std::size_t p = 0; p < m; ++p) sum += cost_of(s.basis[p]) * s.binv[p * m + i];
        y[i] = sum;
      }
      for (std::size_t p = 0; p < m; ++p) {
        double sum = 0.0;
        for (std::size_t i = 0; i < m; ++i) sum += s.binv[p * m + i] * b[i];
        xb[p] = sum;
      }
      for (auto v : free_vars) d[v] = v < n ? c_[v] - dot(v, y.data()) : y[v - n];
    };
    auto safe_bound = [&] {
      double value = 0.0;
      std::vector<double> yp(m);
      for (std::size_t i = 0; i < m; ++i) {
        yp[i] = std::max(0.0, y[i]);
        value += b[i] * yp[i];
      }
      out.reduced.assign(n, 0.0);
      for (auto v : free_vars) {
        if (v >= n) break;
        const double r = c_[v] - dot(v, yp.data());
        out.reduced[v] = r;
        value += std::min(0.0, r);
      }
      return value;
    };
    auto is_fixed = [&](std::size_t v) { return v < n && fixed[v]; };

    refresh();
    for (int it = 1;; ++it) {
      if (it % 64 == 0) refresh();
      double dual = 0.0;
      for (std::size_t i = 0; i < m; ++i) dual += b[i] * y[i];
      if (dual > stop_above) {
        out.value = safe_bound();
        if (out.value > stop_above) return out;
      }
      // Leaving row: largest bound violation. A fixed column must reach 0
      // from either side; anything else only from below.
      std::size_t leave = m;
      double worst = feas;
      for (std::size_t p = 0; p < m; ++p) {
        const double v = is_fixed(s.basis[p]) ? std::abs(xb[p]) : -xb[p];
        if (v > worst) {
          worst = v;
          leave = p;
        }
      }
      if (leave == m || it > max_iter) break;
      const double dir = xb[leave] < 0.0 ? -1.0 : 1.0;

      const double* row = &s.binv[leave * m];
      std::size_t enter = n + m;
      double best_ratio = std::numeric_limits<double>::infinity();
      double best_alpha = 0.0;
      for (auto v : free_vars) {
        if (s.in_basis[v]) continue;
        const double a = v < n ? dot(v, row) : -row[v - n];
        alpha[v] = a;
        if (a * dir <= eps) continue;
        const double ratio = std::max(0.0, d[v]) / std::abs(a);
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && std::abs(a) > best_alpha)) {
          best_ratio = ratio;
          best_alpha = std::abs(a);
          enter = v;
        }
      }
      if (enter == n + m) {
        out.value = std::numeric_limits<double>::infinity();
        return out;
      }

      for (std::size_t p = 0; p < m; ++p) {
        const double* bp = &s.binv[p * m];
        w[p] = enter < n ? dot(enter, bp) : -bp[enter - n];
      }
      const double theta_d = std::max(0.0, d[enter]) / alpha[enter];
      for (std::size_t i = 0; i < m; ++i) y[i] += theta_d * row[i];
      for (auto v : free_vars) {
        if (!s.in_basis[v]) d[v] -= theta_d * alpha[v];
      }
      d[s.basis[leave]] = -theta_d;
      d[enter] = 0.0;
      const double theta_p = xb[leave] / w[leave];
      for (std::size_t p = 0; p < m; ++p) xb[p] -= theta_p * w[p];
      xb[leave] = theta_p;

      const double pivot = w[leave];
      double* prow = &s.binv[leave * m];
      for (std::size_t i = 0; i < m; ++i) prow[i] /= pivot;
      for (std::size_t p = 0; p < m; ++p) {
        if (p == leave || w[p] == 0.0) continue;
        const double f = w[p];
        double* target = &s.binv[p * m];
        for (std::size_t i = 0; i < m; ++i) target[i] -= f * prow[i];
      }
      s.in_basis[s.basis[leave]] = 0;
      s.in_basis[enter] = 1;
      s.basis[leave] = enter;
    }
    out.value = safe_bound();
    out.x.assign(n, 0.0);
    for (std::size_t p = 0; p < m; ++p) {
      if (s.basis[p] < n) out.x[s.basis[p]] = std::max(0.0, xb[p]);
    }
    return out;
  }

 private:
  std::size_t m_;
  std::size_t n_;
  std::vector<std::size_t> start_;  // column j holds rows_[start_[j] .. start_[j+1])
  std::vector<std::uint32_t> rows_;
  std::vector<double> c_;
};

// Weighted set cover: rows are targets, columns are primes.
class SetCoverSolver {
 public:
  SetCoverSolver(std::span<const Implicant> primes, const CoverInstance& instance)
      : n_rows_(instance.targets.size()), n_cols_(primes.size()) {
    rows_ = covering_columns(primes, instance);
    cols_.assign(n_cols_, Bitset(n_rows_));
    cost_.resize(n_cols_);
    for (std::size_t j = 0; j < n_cols_; ++j) cost_[j] = clause_cost_units(primes[j]);
    for (std::size_t r = 0; r < n_rows_; ++r) {
      for (int j : rows_[r]) cols_[static_cast<std::size_t>(j)].set(r);
    }
  }

  // Sorted column indices of the canonical optimal cover.
  std::vector<int> solve() {
    Bitset active_rows(n_rows_);
    for (std::size_t r = 0; r < n_rows_; ++r) active_rows.set(r);
    std::vector<bool> active_cols(n_cols_, true);
    std::vector<int> chosen;
    reduce(active_rows, active_cols, chosen);

    if (active_rows.any()) {
      // Optimal cost of the reduced problem.
      usable_.assign(active_cols.begin(), active_cols.end());
      setup_lp(active_cols);
      std::vector<int> best = greedy(active_rows);
      int best_cost = cost_of(best);
      std::vector<int> picked;
      limit_ = best_cost - 1;
      first_only_ = false;
      search(active_rows, picked, 0, best, best_cost, root_unit_, root_weighted_);
      search_nodes_ = nodes_;

      // Columns that cannot be part of any cover of the optimal cost are
      // dropped for good before the tie-break searches.
      limit_ = best_cost;
      std::vector<std::size_t> fixed;
      std::vector<std::pair<std::size_t, double>> unused;
      if (bound_node(active_rows, 0, fixed, unused, root_unit_, root_weighted_)) {
        for (auto j : fixed) active_cols[j] = false;
      }

      // Canonical tie-break: grow the lexicographically smallest optimal
      // column list one element at a time, each time taking the smallest
      // column that still extends to a cover of the optimal cost using only
      // larger columns.
      std::vector<int> order;
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (active_cols[j]) order.push_back(static_cast<int>(j));
      }
      Bitset uncovered = active_rows;
      int cost = 0;
      std::size_t start = 0;
      first_only_ = true;
      while (uncovered.any()) {
        bool extended = false;
        for (std::size_t pos = start; pos < order.size() && !extended; ++pos) {
          const auto j = static_cast<std::size_t>(order[pos]);
          if (cost + cost_[j] > best_cost || cols_[j].and_count(uncovered) == 0) continue;
          Bitset rest = uncovered;
          rest.and_not(cols_[j]);
          bool ok = !rest.any();
          if (!ok) {
            std::fill(usable_.begin(), usable_.end(), false);
            for (std::size_t q = pos + 1; q < order.size(); ++q) usable_[static_cast<std::size_t>(order[q])] = true;
            limit_ = best_cost - cost - cost_[j];
            std::vector<int> scratch;
            std::vector<int> found;
            int found_cost = 0;
            ok = search(rest, scratch, 0, found, found_cost, root_unit_, root_weighted_);
          }
          if (ok) {
            chosen.push_back(static_cast<int>(j));
            cost += cost_[j];
            uncovered = std::move(rest);
            start = pos + 1;
            extended = true;
          }
        }
        if (!extended) throw Error("internal: no cover found at the optimal cost");
      }
    }
    std::sort(chosen.begin(), chosen.end());
    return chosen;
  }

  std::size_t nodes() const noexcept { return nodes_; }
  std::size_t search_nodes() const noexcept { return search_nodes_; }

 private:
  // LPs over the columns that survived reduction, with one row per target
  // plus the clause-count cut as the last row. The root bases are solved
  // once so that every top-level search starts warm.
  void setup_lp(const std::vector<bool>& active_cols) {
    std::vector<std::vector<int>> lp_rows;
    std::vector<double> unit;
    std::vector<double> weight;
    lp_cols_.clear();
    live_rows_.assign(n_rows_, {});
    for (std::size_t j = 0; j < n_cols_; ++j) {
      if (!active_cols[j]) continue;
      cols_[j].for_each([&](std::size_t r) { live_rows_[r].push_back(lp_cols_.size()); });
      std::vector<int> rows;
      cols_[j].for_each([&](std::size_t r) { rows.push_back(static_cast<int>(r)); });
      rows.push_back(static_cast<int>(n_rows_));
      lp_rows.push_back(std::move(rows));
      unit.push_back(1.0);
      weight.push_back(cost_[j]);
      lp_cols_.push_back(j);
    }
    unit_lp_ = CoveringLp(n_rows_ + 1, lp_rows, std::move(unit));
    weighted_lp_ = CoveringLp(n_rows_ + 1, lp_rows, std::move(weight));
    root_unit_ = unit_lp_.slack_basis();
    root_weighted_ = weighted_lp_.slack_basis();
  }

  int cost_of(const std::vector<int>& cols) const {
    int c = 0;
    for (int j : cols) c += cost_[static_cast<std::size_t>(j)];
    return c;
  }

  // Essential columns, empty columns, dominated columns and dominated rows,
  // repeated to a fixed point. Column j goes when some k covers a superset
  // of its active rows and is cheaper, or equally cheap with a lower index,
  // so the canonical optimum survives.
  void reduce(Bitset& active_rows, std::vector<bool>& active_cols, std::vector<int>& forced) const {
    bool changed = true;
    while (changed && active_rows.any()) {
      changed = false;
      std::vector<std::size_t> live;
      active_rows.for_each([&](std::size_t r) { live.push_back(r); });

      for (auto r : live) {
        if (!active_rows.test(r)) continue;  // covered by a column forced earlier in this pass
        int only = -1;
        int count = 0;
        for (int j : rows_[r]) {
          if (active_cols[static_cast<std::size_t>(j)]) {
            only = j;
            ++count;
          }
        }
        if (count == 0) throw Infeasible("target left without a covering prime");
        if (count == 1) {
          forced.push_back(only);
          active_cols[static_cast<std::size_t>(only)] = false;
          active_rows.and_not(cols_[static_cast<std::size_t>(only)]);
          changed = true;
        }
      }
      if (changed) continue;

      std::vector<Bitset> cov(n_cols_);
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (!active_cols[j]) continue;
        cov[j] = active_rows;
        cov[j].and_mask(cols_[j]);
        if (!cov[j].any()) {
          active_cols[j] = false;
          changed = true;
        }
      }
      if (changed) continue;

      // Domination is transitive under (cost, index), so every dominated
      // column can go in one pass.
      std::vector<std::size_t> drop;
      for (std::size_t j = 0; j < n_cols_; ++j) {
        if (!active_cols[j]) continue;
        // A dominating column covers every row of j, in particular the one
        // with the fewest covering columns.
        std::size_t pivot = n_rows_;
        cov[j].for_each([&](std::size_t r) {
          if (pivot == n_rows_ || rows_[r].size() < rows_[pivot].size()) pivot = r;
        });
        for (int kk : rows_[pivot]) {
          const auto k = static_cast<std::size_t>(kk);
          if (k == j || !active_cols[k]) continue;
          const bool cheaper = cost_[k] < cost_[j] || (cost_[k] == cost_[j] && k < j);
          if (cheaper && cov[j].subset_of(cov[k])) {
            drop.push_back(j);
            break;
          }
        }
      }
      for (auto j : drop) active_cols[j] = false;
      if (!drop.empty()) {
        changed = true;
        continue;
      }

      // Row b is implied by row a when every column covering a covers b.
      std::vector<Bitset> rc;
      rc.reserve(live.size());
      for (auto r : live) {
        Bitset b(n_cols_);
        for (int j : rows_[r]) {
          if (active_cols[static_cast<std::size_t>(j)]) b.set(static_cast<std::size_t>(j));
        }
        rc.push_back(std::move(b));
      }
      for (std::size_t b = 0; b < live.size(); ++b) {
        for (std::size_t a = 0; a < live.size(); ++a) {
          if (a == b) continue;
          if (rc[a].subset_of(rc[b]) && (!(rc[a] == rc[b]) || a < b)) {
            active_rows.reset(live[b]);
            changed = true;
            break;
          }
        }
      }
    }
  }

  // Most uncovered rows per unit cost; ties to the lower index.
  std::vector<int> greedy(Bitset uncovered) const {
    std::vector<int> picked;
    while (uncovered.any()) {
      std::size_t best = n_cols_;
      std::size_t best_gain = 0;
      for (auto j : lp_cols_) {
        if (!usable_[j]) continue;
        const auto gain = cols_[j].and_count(uncovered);
        if (gain == 0) continue;
        // gain / cost > best_gain / best_cost, cross-multiplied
        if (best == n_cols_ || gain * static_cast<std::size_t>(cost_[best]) >
                                   best_gain * static_cast<std::size_t>(cost_[j])) {
          best = j;
          best_gain = gain;
        }
      }
      if (best == n_cols_) throw Infeasible("greedy cover stalled");
      picked.push_back(static_cast<int>(best));
      uncovered.and_not(cols_[best]);
    }
    return picked;
  }

  // Dual-feasible lower bound in cost units. Each uncovered row starts at its
  // cheapest cost share c_j / |j ∩ uncovered| over usable columns; rows are
  // then raised, fewest usable columns first, by the smallest remaining
  // column slack. Returns +inf when some row has no usable column.
  double lower_bound(const Bitset& uncovered) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    const std::size_t n = lp_cols_.size();
    std::vector<double> price(n_rows_, inf);
    std::vector<double> slack(n, 0.0);
    std::vector<std::size_t> gain(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      const auto j = lp_cols_[k];
      if (!usable_[j]) continue;
      gain[k] = cols_[j].and_count(uncovered);
      if (gain[k] == 0) continue;
      const double share = cost_[j] / static_cast<double>(gain[k]);
      cols_[j].for_each([&](std::size_t r) {
        if (uncovered.test(r)) price[r] = std::min(price[r], share);
      });
    }
    std::vector<std::pair<std::size_t, std::size_t>> order;  // (usable columns, row)
    bool stuck = false;
    uncovered.for_each([&](std::size_t r) {
      if (price[r] == inf) stuck = true;
      order.emplace_back(options(r), r);
    });
    if (stuck) return inf;
    for (std::size_t k = 0; k < n; ++k) {
      if (gain[k] == 0) continue;
      const auto j = lp_cols_[k];
      double used = 0.0;
      cols_[j].for_each([&](std::size_t r) {
        if (uncovered.test(r)) used += price[r];
      });
      slack[k] = std::max(0.0, cost_[j] - used);
    }
    std::sort(order.begin(), order.end());
    double lb = 0.0;
    for (auto [count, r] : order) {
      double raise = inf;
      for (auto k : live_rows_[r]) {
        if (usable_[lp_cols_[k]]) raise = std::min(raise, slack[k]);
      }
      for (auto k : live_rows_[r]) {
        if (usable_[lp_cols_[k]]) slack[k] -= raise;
      }
      lb += price[r] + raise;
    }
    return lb;
  }

  // Usable columns covering row r.
  std::size_t options(std::size_t r) const {
    std::size_t count = 0;
    for (auto k : live_rows_[r]) count += usable_[lp_cols_[k]] ? 1 : 0;
    return count;
  }

  // Whether a node with committed `cost` can still reach a cover costing at
  // most limit_. The unit-cost LP gives a minimum clause count K; the
  // weighted LP with the cut "at least K columns" bounds the cost. Columns
  // whose reduced cost alone would exceed the limit are banned and appended
  // to `fixed`. `x` receives the LP values of the remaining columns. Both
  // bases are updated in place.
  bool bound_node(const Bitset& uncovered, int cost, std::vector<std::size_t>& fixed,
                  std::vector<std::pair<std::size_t, double>>& x, LpBasis& unit_basis, LpBasis& weighted_basis) {
    const double room = static_cast<double>(limit_ - cost) + 1e-7;
    if (room < 0.0) return false;
    if (lower_bound(uncovered) > room) return false;

    std::vector<char> off(lp_cols_.size(), 1);
    int cheapest = std::numeric_limits<int>::max();
    for (std::size_t k = 0; k < lp_cols_.size(); ++k) {
      const auto j = lp_cols_[k];
      if (!usable_[j] || cols_[j].and_count(uncovered) == 0) continue;
      off[k] = 0;
      cheapest = std::min(cheapest, cost_[j]);
    }
    if (cheapest == std::numeric_limits<int>::max()) return false;

    std::vector<double> b(n_rows_ + 1, 0.0);
    uncovered.for_each([&](std::size_t r) { b[r] = 1.0; });
    const double clause_room = std::floor(room / static_cast<double>(cheapest));
    const auto lu = unit_lp_.solve(unit_basis, b, off, clause_room);
    const double clauses = std::ceil(lu.value - 1e-6);
    if (clauses * cheapest > room) return false;

    b[n_rows_] = clauses;
    const auto lw = weighted_lp_.solve(weighted_basis, b, off, room);
    if (lw.value > room) return false;
    x.clear();
    for (std::size_t k = 0; k < lp_cols_.size(); ++k) {
      if (off[k]) continue;
      const double rc = lw.reduced[k];
      if (rc > 0.0 && lw.value + rc > room) {
        usable_[lp_cols_[k]] = false;
        fixed.push_back(lp_cols_[k]);
      } else {
        x.emplace_back(lp_cols_[k], lw.x[k]);
      }
    }
    return true;
  }

  // Branch on the uncovered row with the fewest usable columns; each child
  // takes one of those columns, and later siblings exclude the columns
  // earlier siblings took, so every column subset is reached at most once.
  // Columns are tried by LP value, then coverage per unit cost, then index.
  // In optimizing mode a cover replaces `best` only when strictly cheaper;
  // in first-only mode the search stops at the first cover within limit_.
  bool search(const Bitset& uncovered, std::vector<int>& picked, int cost, std::vector<int>& best,
              int& best_cost, LpBasis unit_basis, LpBasis weighted_basis) {
    ++nodes_;
    if (!uncovered.any()) {
      best = picked;
      best_cost = cost;
      limit_ = cost - 1;
      return true;
    }
    std::vector<std::size_t> fixed;
    struct Unfix {
      std::vector<char>& usable;
      std::vector<std::size_t>& fixed;
      ~Unfix() {
        for (auto j : fixed) usable[j] = true;
      }
    } unfix{usable_, fixed};
    std::vector<std::pair<std::size_t, double>> lp_x;
    if (!bound_node(uncovered, cost, fixed, lp_x, unit_basis, weighted_basis)) return false;

    std::size_t row = n_rows_;
    std::size_t row_options = std::numeric_limits<std::size_t>::max();
    uncovered.for_each([&](std::size_t r) {
      const auto count = options(r);
      if (count < row_options) {
        row = r;
        row_options = count;
      }
    });
    if (row_options == 0) return false;

    std::vector<std::pair<std::size_t, int>> children;  // (gain, column)
    for (auto k : live_rows_[row]) {
      const auto j = lp_cols_[k];
      if (usable_[j]) children.emplace_back(cols_[j].and_count(uncovered), static_cast<int>(j));
    }
    std::vector<double> value(n_cols_, 0.0);
    for (auto [j, v] : lp_x) value[j] = v;
    std::sort(children.begin(), children.end(), [&](const auto& a, const auto& b) {
      const double va = value[static_cast<std::size_t>(a.second)];
      const double vb = value[static_cast<std::size_t>(b.second)];
      if (std::abs(va - vb) > 1e-9) return va > vb;
      const auto ca = static_cast<std::size_t>(cost_[static_cast<std::size_t>(a.second)]);
      const auto cb = static_cast<std::size_t>(cost_[static_cast<std::size_t>(b.second)]);
      if (a.first * cb != b.first * ca) return a.first * cb > b.first * ca;
      return a.second < b.second;
    });

    bool found = false;
    std::size_t tried = 0;
    for (const auto& [gain, j] : children) {
      const auto uj = static_cast<std::size_t>(j);
      if (cost + cost_[uj] > limit_) {
        usable_[uj] = false;
        ++tried;
        continue;
      }
      Bitset rest = uncovered;
      rest.and_not(cols_[uj]);
      usable_[uj] = false;
      ++tried;
      picked.push_back(j);
      const bool hit = search(rest, picked, cost + cost_[uj], best, best_cost, unit_basis, weighted_basis);
      picked.pop_back();
      found = found || hit;
      if (hit && first_only_) break;
    }
    for (std::size_t i = 0; i < tried; ++i) usable_[static_cast<std::size_t>(children[i].second)] = true;
    return found;
  }

  std::size_t n_rows_;
  std::size_t n_cols_;
  std::vector<std::vector<int>> rows_;
  std::vector<Bitset> cols_;
  std::vector<int> cost_;
  std::vector<char> usable_;
  std::vector<std::size_t> lp_cols_;  // LP column k is prime lp_cols_[k]
  std::vector<std::vector<std::size_t>> live_rows_;  // per row: LP columns covering it
  CoveringLp unit_lp_{0, {}, {}};
  CoveringLp weighted_lp_{0, {}, {}};
  LpBasis root_unit_;
  LpBasis root_weighted_;
  int limit_ = 0;
  bool first_only_ = false;
  std::size_t nodes_ = 0;
  std::size_t search_nodes_ = 0;
};

}  // namespace detail

// Exact weighted set cover over the primes: minimize sum c_j x_j subject to
// every target being covered, x binary. Ties resolve to the same canonical
// cover petrick_cover returns.
inline DnfLabel ilp_cover(std::span<const Implicant> primes, const CoverInstance& instance) {
  detail::check_consistent(primes, instance);
  detail::SetCoverSolver solver(primes, instance);
  return detail::make_label(primes, solver.solve(), instance);
}

inline DnfLabel label_cluster(const ClusterSummary& flagged, std::span<const ClusterSummary> all_clusters,
                              std::span<const RolloutResult> results, const PredicateVocabulary& vocab,
                              CoverMethod method, CoverInstance* instance_out = nullptr) {
  auto instance = build_cover_instance(flagged, all_clusters, results, vocab);
  const auto primes = qm_prime_implicants(instance);
  auto label = method == CoverMethod::ilp ? ilp_cover(primes, instance) : petrick_cover(primes, instance);
  if (instance_out) *instance_out = std::move(instance);
  return label;
}

// Soundness and completeness of a label against its instance.
inline bool label_is_valid(const DnfLabel& label, const CoverInstance& instance) {
  for (const auto& c : label.clauses) {
    if (!instance.consistent(c)) return false;
  }
  for (Minterm t : instance.targets) {
    bool covered = false;
    for (const auto& c : label.clauses) covered = covered || c.covers(t);
    if (!covered) return false;
  }
  for (std::size_t i = 0; i < label.clauses.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (label.clauses[i] == label.clauses[j]) return false;
    }
  }
  return true;
}

}  // namespace sentinel
