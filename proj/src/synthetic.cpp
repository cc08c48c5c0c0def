#include "recfair/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "recfair/rng.hpp"

namespace recfair {

RatingMatrix generate_synthetic(const SyntheticSpec& spec) {
  if (spec.n_users < 1 || spec.n_items < 2) {
    throw config_error("synthetic fixture needs >= 1 user and >= 2 items");
  }
  if (spec.min_profile < 1 || spec.mean_profile < spec.min_profile) {
    throw config_error("synthetic profile sizes are inconsistent");
  }
  spec.scale.check();

  const int m = spec.n_items;
  const int levels = spec.scale.n_levels();

  // item popularity weights ~ rank^-exponent; item 0 is the head of the head
  std::vector<double> cumulative(m);
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    total += std::pow(static_cast<double>(i + 1), -spec.popularity_exponent);
    cumulative[i] = total;
  }
  // popularity factor in [0,1] driving the multifactorial tilt
  std::vector<double> pop(m);
  const double log_m = std::log(static_cast<double>(m));
  for (int i = 0; i < m; ++i) {
    pop[i] = 1.0 - std::log(static_cast<double>(i + 1)) / log_m;
  }

  std::vector<Entry> entries;
  std::vector<double> level_cdf(levels);
  for (int u = 0; u < spec.n_users; ++u) {
    Rng rng(mix_seed(spec.seed, static_cast<std::uint64_t>(u)));
    double extra = spec.mean_profile - spec.min_profile;
    int size = spec.min_profile +
               static_cast<int>(std::floor(-std::log(1.0 - rng.uniform()) * extra));
    size = std::min(size, m);

    std::unordered_set<int> chosen;
    while (static_cast<int>(chosen.size()) < size) {
      double x = rng.uniform() * total;
      int item = static_cast<int>(
          std::lower_bound(cumulative.begin(), cumulative.end(), x) -
          cumulative.begin());
      if (item >= m) item = m - 1;
      chosen.insert(item);
    }

    std::vector<int> items(chosen.begin(), chosen.end());
    std::sort(items.begin(), items.end());
    for (int item : items) {
      double tilt = spec.positivity_skew + spec.coupling * pop[item];
      double z = 0.0;
      for (int j = 0; j < levels; ++j) {
        z += std::exp(tilt * j);
        level_cdf[j] = z;
      }
      double x = rng.uniform() * z;
      int level = static_cast<int>(
          std::lower_bound(level_cdf.begin(), level_cdf.end(), x) -
          level_cdf.begin());
      if (level >= levels) level = levels - 1;
      entries.push_back(Entry{u, item, spec.scale.levels[level]});
    }
  }

  RatingMatrix out;
  out.scale = spec.scale;
  out.data = SparseMatrix(spec.n_users, spec.n_items, std::move(entries));
  return out;
}

}  // namespace recfair
