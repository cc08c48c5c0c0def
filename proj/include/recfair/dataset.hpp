#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recfair/types.hpp"

namespace recfair {

struct LoadOptions {
  char delimiter = '\t';
  bool skip_header = false;
  std::optional<RatingScale> scale;  // inferred from the data when absent
};

// Reads `<user> <delim> <item> <delim> <rating>` lines. External ids become
// dense internal ids in first-appearance order; labels are kept on the
// matrix. Duplicate (user,item) pairs with equal values collapse to one
// entry; conflicting values are rejected with both line numbers.
RatingMatrix load_ratings(const std::string& path, const LoadOptions& opts = {});

// Same construction path for in-memory data (tests, synthetic fixtures).
RatingMatrix ratings_from_entries(int n_users, int n_items,
                                  std::vector<Entry> entries,
                                  std::optional<RatingScale> scale = {},
                                  std::vector<std::string> user_labels = {},
                                  std::vector<std::string> item_labels = {});

void save_ratings(const RatingMatrix& m, const std::string& path,
                  char delimiter = '\t');
void save_percentiles(const PercentileMatrix& m, const std::string& path,
                      char delimiter = '\t');

// Two-column `<external_id> <internal_id>` remap table.
void save_id_map(const std::vector<std::string>& labels,
                 const std::string& path);

// Iterated k-core: drops users below min_user_ratings and items below
// min_item_ratings until both constraints hold, then recompacts ids.
RatingMatrix filter_kcore(const RatingMatrix& m, int min_user_ratings,
                          int min_item_ratings);

// Per-user holdout. round-half-up(ratio * profile) entries go to train,
// clamped so users with >=2 ratings keep at least one entry in each half
// whenever ratio*profile >= 1; single-rating users train-only.
SplitPair split_per_user(const RatingMatrix& m, double ratio,
                         std::uint64_t seed);

// FNV-1a over the canonical entry stream; used for provenance.
std::uint64_t dataset_hash(const RatingMatrix& m);

}  // namespace recfair
