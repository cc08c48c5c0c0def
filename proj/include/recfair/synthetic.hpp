#pragma once

#include <cstdint>

#include "recfair/types.hpp"

namespace recfair {

// Desk-scale fixture with the three bias characteristics dialed in:
// power-law item popularity, ratings tilted toward the top of the scale,
// and the tilt strengthened on popular items.
struct SyntheticSpec {
  int n_users = 500;
  int n_items = 300;
  double mean_profile = 40.0;       // mean ratings per user
  int min_profile = 10;
  double popularity_exponent = 1.0; // item weight ~ rank^-exponent
  double positivity_skew = 0.6;     // upward tilt of the rating distribution
  double coupling = 1.2;            // extra tilt on popular items
  RatingScale scale = RatingScale::one_to_five();
  std::uint64_t seed = 1;
};

RatingMatrix generate_synthetic(const SyntheticSpec& spec);

}  // namespace recfair
