#include "recfair/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "recfair/error.hpp"

namespace recfair {

namespace {

// Compensated accumulation keeps per-user sums order-independent to ~1e-12.
struct KahanSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double x) {
    double y = x - carry;
    double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

std::vector<char> test_membership(const SparseMatrix& test, int user) {
  std::vector<char> in(test.n_items(), 0);
  for (const auto& c : test.row(user)) in[c.index] = 1;
  return in;
}

std::vector<long> appearance_counts(const RecommendationSet& recs) {
  std::vector<long> counts(recs.n_items, 0);
  for (const auto& list : recs.lists) {
    for (const auto& s : list) ++counts[s.item];
  }
  return counts;
}

void check_dims(const RecommendationSet& recs, const SparseMatrix& test) {
  if (recs.n_users != test.n_users() || recs.n_items != test.n_items()) {
    throw data_error("recommendation set and test matrix dimensions differ");
  }
}

}  // namespace

ExposureDistribution exposure_distribution(const RecommendationSet& recs) {
  ExposureDistribution d;
  d.exposure.assign(recs.n_items, 0.0);
  const double slots =
      static_cast<double>(recs.n_users) * static_cast<double>(recs.k);
  auto counts = appearance_counts(recs);
  for (int i = 0; i < recs.n_items; ++i) {
    d.exposure[i] = slots == 0.0 ? 0.0 : counts[i] / slots;
  }
  return d;
}

double precision_at_k(const RecommendationSet& recs, const SparseMatrix& test,
                      int* excluded_users) {
  check_dims(recs, test);
  if (recs.k <= 0) throw config_error("precision: k must be positive");
  KahanSum acc;
  int counted = 0;
  int excluded = 0;
  for (int u = 0; u < recs.n_users; ++u) {
    if (test.user_count(u) == 0) {
      ++excluded;
      continue;
    }
    auto in_test = test_membership(test, u);
    int hits = 0;
    for (const auto& s : recs.lists[u]) hits += in_test[s.item];
    acc.add(static_cast<double>(hits) / recs.k);
    ++counted;
  }
  if (excluded_users) *excluded_users = excluded;
  return counted == 0 ? 0.0 : acc.sum / counted;
}

double ndcg_at_k(const RecommendationSet& recs, const SparseMatrix& test,
                 int* excluded_users) {
  check_dims(recs, test);
  if (recs.k <= 0) throw config_error("ndcg: k must be positive");
  KahanSum acc;
  int counted = 0;
  int excluded = 0;
  for (int u = 0; u < recs.n_users; ++u) {
    int test_size = test.user_count(u);
    if (test_size == 0) {
      ++excluded;
      continue;
    }
    auto in_test = test_membership(test, u);
    double dcg = 0.0;
    int pos = 0;
    for (const auto& s : recs.lists[u]) {
      ++pos;
      if (in_test[s.item]) dcg += 1.0 / std::log2(pos + 1.0);
    }
    double idcg = 0.0;
    int ideal_hits = std::min(recs.k, test_size);
    for (int p = 1; p <= ideal_hits; ++p) idcg += 1.0 / std::log2(p + 1.0);
    acc.add(idcg == 0.0 ? 0.0 : dcg / idcg);
    ++counted;
  }
  if (excluded_users) *excluded_users = excluded;
  return counted == 0 ? 0.0 : acc.sum / counted;
}

double item_aggregate_diversity(const RecommendationSet& recs, int alpha,
                                const std::vector<int>* restrict) {
  if (alpha < 1) throw config_error("aggregate diversity: alpha must be >= 1");
  if (restrict && restrict->empty()) {
    throw data_error("aggregate diversity: empty reference item set");
  }
  auto counts = appearance_counts(recs);
  long covered = 0;
  long reference = 0;
  if (restrict) {
    reference = static_cast<long>(restrict->size());
    for (int i : *restrict) {
      if (counts[i] >= alpha) ++covered;
    }
  } else {
    reference = recs.n_items;
    for (long c : counts) {
      if (c >= alpha) ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(reference);
}

std::pair<double, double> equality_of_exposure(const RecommendationSet& recs) {
  if (recs.n_items < 2) {
    throw data_error("equality of exposure needs at least two items");
  }
  auto d = exposure_distribution(recs);
  std::sort(d.exposure.begin(), d.exposure.end());
  const double m = static_cast<double>(recs.n_items);
  KahanSum acc;
  for (std::size_t k = 1; k <= d.exposure.size(); ++k) {
    acc.add((2.0 * k - m - 1.0) * d.exposure[k - 1]);
  }
  double gini = acc.sum / (m - 1.0);
  return {gini, 1.0 - gini};
}

double relative_gain(double utility_a, double utility_b) {
  if (utility_b == 0.0) {
    throw data_error("relative gain undefined for zero baseline utility");
  }
  return (utility_a - utility_b) / utility_b * 100.0;
}

MetricReport evaluate(const RecommendationSet& recs, const SparseMatrix& test,
                      const EvalOptions& opts) {
  MetricReport r;
  r.labels.k = recs.k;
  int excluded = 0;
  r.precision = precision_at_k(recs, test, &excluded);
  r.ndcg = ndcg_at_k(recs, test);
  r.excluded_users = excluded;
  for (int alpha : opts.alphas) {
    r.ia[alpha] = item_aggregate_diversity(recs, alpha);
    if (opts.segmentation && !opts.segmentation->tail.empty()) {
      r.lia[alpha] =
          item_aggregate_diversity(recs, alpha, &opts.segmentation->tail);
    }
  }
  auto [gini, ee] = equality_of_exposure(recs);
  r.gini = gini;
  r.ee = ee;
  return r;
}

}  // namespace recfair
