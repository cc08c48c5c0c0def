#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "recfair/types.hpp"

namespace recfair {

// Share of all recommendation slots each item receives: appearances divided
// by |U| * K. Sums to 1 when every list has full length K.
struct ExposureDistribution {
  std::vector<double> exposure;  // indexed by item id
};

ExposureDistribution exposure_distribution(const RecommendationSet& recs);

struct MetricLabels {
  std::string pipeline;
  std::string algorithm;
  std::string input;  // "rating" | "percentile"
  int n = 0;          // initial list size (0 when no reranker)
  int k = 0;
};

struct MetricReport {
  MetricLabels labels;
  double precision = 0.0;
  double ndcg = 0.0;
  std::map<int, double> ia;   // alpha -> value
  std::map<int, double> lia;  // alpha -> value (tail-restricted)
  double gini = 0.0;
  double ee = 0.0;
  double runtime_seconds = 0.0;
  int excluded_users = 0;     // users with empty test profiles
  std::vector<std::string> notes;
};

// Mean over users with non-empty test profiles of |L_u cap test_u| / K.
double precision_at_k(const RecommendationSet& recs, const SparseMatrix& test,
                      int* excluded_users = nullptr);

// Binary-relevance nDCG with log2(position+1) discounts; ideal DCG uses
// min(K, |test_u|) hits.
double ndcg_at_k(const RecommendationSet& recs, const SparseMatrix& test,
                 int* excluded_users = nullptr);

// Fraction of the reference set appearing at least alpha times across all
// lists. restrict narrows the reference set (tail items for LIA).
double item_aggregate_diversity(const RecommendationSet& recs, int alpha,
                                const std::vector<int>* restrict = nullptr);

// Gini index over ascending exposures with the 1/(m-1) normalizer, and
// EE = 1 - Gini.
std::pair<double, double> equality_of_exposure(const RecommendationSet& recs);

// (a - b) / b * 100; b must be nonzero.
double relative_gain(double utility_a, double utility_b);

struct EvalOptions {
  std::vector<int> alphas = {1};
  const ItemSegmentation* segmentation = nullptr;  // enables LIA
};

MetricReport evaluate(const RecommendationSet& recs, const SparseMatrix& test,
                      const EvalOptions& opts = {});

}  // namespace recfair
