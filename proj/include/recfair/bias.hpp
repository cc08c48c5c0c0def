#pragma once

#include <string>
#include <vector>

#include "recfair/types.hpp"

namespace recfair {

// Lorenz curve over count-descending items, rating-level histogram, and
// per-item (count, mean) stats.
BiasDiagnostics diagnose(const RatingMatrix& m);

// Items sorted count-descending (ties by ascending id); head is the shortest
// prefix whose cumulative rating share reaches target_fraction.
ItemSegmentation segment_head_tail(const SparseMatrix& data,
                                   double target_fraction = 0.2);

// On the ceil(beta * m) most popular items, replaces every max-scale rating
// with the min-scale rating. Popularity counts are unchanged.
RatingMatrix flip_positivity(const RatingMatrix& m, double beta);

// Per-item percentile transform: profile sorted ascending, tied ratings take
// the position of their last occurrence, Per = 100 * position / (size + 1).
PercentileMatrix percentile_transform(const RatingMatrix& m);

// Item profile sizes, so experimenters can spot items where the percentile
// transform degenerates (size 1, or uniform profiles).
std::vector<int> item_profile_sizes(const RatingMatrix& m);

// Writes lorenz.csv, rating_hist.csv, item_stats.csv under out_dir.
void write_diagnostics(const BiasDiagnostics& d, const std::string& out_dir);

}  // namespace recfair
