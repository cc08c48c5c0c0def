// Brute-force reference implementations used by the unit and acceptance
// suites. Everything here recomputes results from first principles and must
// stay independent of the library code paths it checks.

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <vector>

#include "recfair/types.hpp"

namespace oracle {

// Percentile of rating r in a profile: sort ascending, walk from the end to
// the last occurrence, 100 * (index+1) / (size+1).
inline double percentile(std::vector<double> profile, double r) {
  std::sort(profile.begin(), profile.end());
  int position = 0;
  for (int i = static_cast<int>(profile.size()) - 1; i >= 0; --i) {
    if (profile[i] == r) {
      position = i + 1;
      break;
    }
  }
  return 100.0 * position / (static_cast<double>(profile.size()) + 1.0);
}

inline std::map<int, long> appearance_counts(
    const recfair::RecommendationSet& recs) {
  std::map<int, long> counts;
  for (const auto& list : recs.lists) {
    for (const auto& s : list) ++counts[s.item];
  }
  return counts;
}

inline double precision(const recfair::RecommendationSet& recs,
                        const recfair::SparseMatrix& test) {
  double sum = 0.0;
  int users = 0;
  for (int u = 0; u < recs.n_users; ++u) {
    std::set<int> held;
    for (const auto& c : test.row(u)) held.insert(c.index);
    if (held.empty()) continue;
    int hits = 0;
    for (const auto& s : recs.lists[u]) hits += held.count(s.item) ? 1 : 0;
    sum += static_cast<double>(hits) / recs.k;
    ++users;
  }
  return users == 0 ? 0.0 : sum / users;
}

inline double ndcg(const recfair::RecommendationSet& recs,
                   const recfair::SparseMatrix& test) {
  double sum = 0.0;
  int users = 0;
  for (int u = 0; u < recs.n_users; ++u) {
    std::set<int> held;
    for (const auto& c : test.row(u)) held.insert(c.index);
    if (held.empty()) continue;
    double dcg = 0.0;
    for (std::size_t pos = 0; pos < recs.lists[u].size(); ++pos) {
      if (held.count(recs.lists[u][pos].item)) {
        dcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
      }
    }
    double idcg = 0.0;
    std::size_t ideal = std::min<std::size_t>(recs.k, held.size());
    for (std::size_t pos = 0; pos < ideal; ++pos) {
      idcg += 1.0 / std::log2(static_cast<double>(pos) + 2.0);
    }
    sum += idcg == 0.0 ? 0.0 : dcg / idcg;
    ++users;
  }
  return users == 0 ? 0.0 : sum / users;
}

inline double aggregate_diversity(const recfair::RecommendationSet& recs,
                                  int alpha,
                                  const std::vector<int>* restrict = nullptr) {
  auto counts = appearance_counts(recs);
  std::vector<int> reference;
  if (restrict) {
    reference = *restrict;
  } else {
    for (int i = 0; i < recs.n_items; ++i) reference.push_back(i);
  }
  long covered = 0;
  for (int i : reference) {
    auto it = counts.find(i);
    if (it != counts.end() && it->second >= alpha) ++covered;
  }
  return static_cast<double>(covered) / static_cast<double>(reference.size());
}

// Eq.-style Gini over ascending exposures with the 1/(m-1) normalizer.
inline std::pair<double, double> gini_ee(
    const recfair::RecommendationSet& recs) {
  auto counts = appearance_counts(recs);
  std::vector<double> exposure(recs.n_items, 0.0);
  double slots = static_cast<double>(recs.n_users) * recs.k;
  for (const auto& [item, c] : counts) exposure[item] = c / slots;
  std::sort(exposure.begin(), exposure.end());
  double m = static_cast<double>(recs.n_items);
  double g = 0.0;
  for (std::size_t k = 1; k <= exposure.size(); ++k) {
    g += (2.0 * static_cast<double>(k) - m - 1.0) * exposure[k - 1];
  }
  g /= m - 1.0;
  return {g, 1.0 - g};
}

// Exact binomial CDF with factorial-form coefficients.
inline double binomial_cdf(int t, int k, double p) {
  if (t < 0) return 0.0;
  double cdf = 0.0;
  for (int j = 0; j <= t && j <= k; ++j) {
    double comb = 1.0;
    for (int x = 0; x < j; ++x) {
      comb *= static_cast<double>(k - x) / static_cast<double>(x + 1);
    }
    cdf += comb * std::pow(p, j) * std::pow(1.0 - p, k - j);
  }
  return cdf;
}

inline std::vector<int> fastar_min_protected(int k, double p, double a_sig) {
  std::vector<int> m_min(k + 1, 0);
  for (int prefix = 1; prefix <= k; ++prefix) {
    int t = 0;
    while (t <= prefix && !(binomial_cdf(t - 1, prefix, p) > a_sig)) ++t;
    m_min[prefix] = std::min(t, prefix);
  }
  return m_min;
}

// Exhaustive DM assignment: every combination of per-user K-subsets of the
// initial lists, costed as sum of 1-based ranks plus overflow penalties.
struct DmInstance {
  const recfair::RecommendationSet* initial;
  int k;
  long long capacity;
  long long overflow_cost;
};

inline long long dm_cost_of(const DmInstance& inst,
                            const std::vector<std::vector<int>>& rank_choice) {
  std::map<int, long long> usage;
  long long cost = 0;
  for (int u = 0; u < inst.initial->n_users; ++u) {
    for (int r : rank_choice[u]) {
      cost += r + 1;
      ++usage[inst.initial->lists[u][r].item];
    }
  }
  for (const auto& [item, used] : usage) {
    if (used > inst.capacity) cost += (used - inst.capacity) * inst.overflow_cost;
  }
  return cost;
}

inline void dm_enumerate(const DmInstance& inst, int user,
                         std::vector<std::vector<int>>& choice,
                         long long& best) {
  if (user == inst.initial->n_users) {
    best = std::min(best, dm_cost_of(inst, choice));
    return;
  }
  int n = static_cast<int>(inst.initial->lists[user].size());
  int take = std::min(inst.k, n);
  std::vector<int> ranks(take);
  // iterate all rank subsets of size `take` via combinations
  std::vector<int> comb(take);
  for (int i = 0; i < take; ++i) comb[i] = i;
  for (;;) {
    choice[user] = comb;
    dm_enumerate(inst, user + 1, choice, best);
    int i = take - 1;
    while (i >= 0 && comb[i] == n - take + i) --i;
    if (i < 0) break;
    ++comb[i];
    for (int j = i + 1; j < take; ++j) comb[j] = comb[j - 1] + 1;
  }
}

inline long long dm_exhaustive_best(const DmInstance& inst) {
  std::vector<std::vector<int>> choice(inst.initial->n_users);
  long long best = std::numeric_limits<long long>::max();
  dm_enumerate(inst, 0, choice, best);
  return best;
}

// Cost of an actual reranked output under the same DM costing.
inline long long dm_output_cost(const DmInstance& inst,
                                const recfair::RecommendationSet& out) {
  std::vector<std::vector<int>> choice(inst.initial->n_users);
  for (int u = 0; u < inst.initial->n_users; ++u) {
    for (const auto& s : out.lists[u]) {
      const auto& list = inst.initial->lists[u];
      for (int r = 0; r < static_cast<int>(list.size()); ++r) {
        if (list[r].item == s.item) {
          choice[u].push_back(r);
          break;
        }
      }
    }
  }
  return dm_cost_of(inst, choice);
}

// Spearman rank correlation with average ranks for ties.
inline double spearman(const std::vector<double>& xs,
                       const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&v](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> r(v.size());
    std::size_t i = 0;
    while (i < idx.size()) {
      std::size_t j = i;
      while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
      double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (std::size_t t = i; t <= j; ++t) r[idx[t]] = avg;
      i = j + 1;
    }
    return r;
  };
  auto rx = ranks(xs);
  auto ry = ranks(ys);
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= rx.size();
  my /= ry.size();
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace oracle
