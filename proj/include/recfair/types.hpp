#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "recfair/error.hpp"

namespace recfair {

struct Entry {
  int user = 0;
  int item = 0;
  double value = 0.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Admissible rating levels, strictly increasing. min/max are the scale
// bounds a and b; O = levels.size().
struct RatingScale {
  std::vector<double> levels;

  double min_value() const { return levels.front(); }
  double max_value() const { return levels.back(); }
  int n_levels() const { return static_cast<int>(levels.size()); }

  bool contains(double v) const {
    return std::binary_search(levels.begin(), levels.end(), v);
  }

  void check() const {
    if (levels.size() < 2) {
      throw data_error("rating scale needs at least two levels");
    }
    for (std::size_t i = 1; i < levels.size(); ++i) {
      if (!(levels[i - 1] < levels[i])) {
        throw data_error("rating scale levels must be strictly increasing");
      }
    }
  }

  static RatingScale infer(const std::vector<Entry>& entries) {
    std::vector<double> vals;
    vals.reserve(entries.size());
    for (const auto& e : entries) vals.push_back(e.value);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    RatingScale s{std::move(vals)};
    s.check();
    return s;
  }

  static RatingScale one_to_five() { return RatingScale{{1, 2, 3, 4, 5}}; }
};

// Immutable sparse user x item matrix with both row (user) and column (item)
// access. Entries are unique per (user, item) and sorted.
class SparseMatrix {
 public:
  struct Cell {
    int index;     // item id in rows, user id in columns
    double value;
  };

  SparseMatrix() = default;
  SparseMatrix(int n_users, int n_items, std::vector<Entry> entries);

  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  std::size_t n_entries() const { return entries_.size(); }

  const std::vector<Entry>& entries() const { return entries_; }

  std::span<const Cell> row(int user) const {
    return {row_cells_.data() + row_ptr_[user],
            row_cells_.data() + row_ptr_[user + 1]};
  }
  std::span<const Cell> col(int item) const {
    return {col_cells_.data() + col_ptr_[item],
            col_cells_.data() + col_ptr_[item + 1]};
  }

  int user_count(int user) const {
    return static_cast<int>(row_ptr_[user + 1] - row_ptr_[user]);
  }
  int item_count(int item) const {
    return static_cast<int>(col_ptr_[item + 1] - col_ptr_[item]);
  }

  bool has(int user, int item) const;

  double global_mean() const { return global_mean_; }

 private:
  int n_users_ = 0;
  int n_items_ = 0;
  std::vector<Entry> entries_;       // sorted by (user, item)
  std::vector<std::size_t> row_ptr_;
  std::vector<Cell> row_cells_;
  std::vector<std::size_t> col_ptr_;
  std::vector<Cell> col_cells_;
  double global_mean_ = 0.0;
};

// Explicit ratings plus the scale they live on. Labels map internal dense
// ids back to the external ids seen at load time; empty means ids are
// already external.
struct RatingMatrix {
  SparseMatrix data;
  RatingScale scale;
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;

  int n_users() const { return data.n_users(); }
  int n_items() const { return data.n_items(); }

  std::string user_label(int u) const {
    return user_labels.empty() ? std::to_string(u) : user_labels[u];
  }
  std::string item_label(int i) const {
    return item_labels.empty() ? std::to_string(i) : item_labels[i];
  }

  void check_values() const {
    for (const auto& e : data.entries()) {
      if (!scale.contains(e.value)) {
        throw data_error("rating value outside the declared scale");
      }
    }
  }
};

// Per-item percentile transform of a rating matrix. Same sparsity pattern,
// values strictly inside (0, 100).
struct PercentileMatrix {
  SparseMatrix data;
  RatingScale source_scale;
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;

  int n_users() const { return data.n_users(); }
  int n_items() const { return data.n_items(); }
};

enum class InputKind { kRatings, kPercentiles };

inline const char* input_kind_name(InputKind k) {
  return k == InputKind::kRatings ? "rating" : "percentile";
}

// Lightweight view handed to trainers; constructible from either matrix type.
struct TrainInput {
  const SparseMatrix* data;
  InputKind kind;
  const std::vector<std::string>* user_labels = nullptr;
  const std::vector<std::string>* item_labels = nullptr;

  TrainInput(const RatingMatrix& r)
      : data(&r.data),
        kind(InputKind::kRatings),
        user_labels(&r.user_labels),
        item_labels(&r.item_labels) {}
  TrainInput(const PercentileMatrix& p)
      : data(&p.data),
        kind(InputKind::kPercentiles),
        user_labels(&p.user_labels),
        item_labels(&p.item_labels) {}
  TrainInput(const SparseMatrix& m, InputKind k) : data(&m), kind(k) {}
};

struct SplitPair {
  RatingMatrix train;
  RatingMatrix test;
  std::uint64_t seed = 0;
  double ratio = 0.8;
};

// Pareto head/tail split of the catalog by cumulative rating share.
struct ItemSegmentation {
  std::vector<int> head;   // prefix of the count-descending order
  std::vector<int> tail;
  double coverage = 0.0;   // achieved head share of all ratings

  bool is_head(int item) const { return head_flag_[item]; }
  int n_items() const { return static_cast<int>(head_flag_.size()); }

  static ItemSegmentation make(std::vector<int> head, std::vector<int> tail,
                               double coverage, int n_items);

 private:
  std::vector<char> head_flag_;
};

inline ItemSegmentation ItemSegmentation::make(std::vector<int> head,
                                               std::vector<int> tail,
                                               double coverage, int n_items) {
  ItemSegmentation s;
  s.head = std::move(head);
  s.tail = std::move(tail);
  s.coverage = coverage;
  s.head_flag_.assign(n_items, 0);
  for (int i : s.head) s.head_flag_[i] = 1;
  return s;
}

struct BiasDiagnostics {
  struct ItemStat {
    int item;
    int count;
    double mean_rating;
  };

  // (item fraction, cumulative rating fraction), items in count-descending
  // order; starts at (0,0), ends at (1,1).
  std::vector<std::pair<double, double>> lorenz;
  // (rating level, fraction of all entries)
  std::vector<std::pair<double, double>> rating_histogram;
  std::vector<ItemStat> item_stats;
};

struct ScoredItem {
  int item;
  double score;

  friend bool operator==(const ScoredItem&, const ScoredItem&) = default;
};

// Ranked lists, one per user. Position is the ranking; the attached score
// is the base model's score for the item (rerankers may reorder).
struct RecommendationSet {
  int n_users = 0;
  int n_items = 0;
  int k = 0;                                   // nominal list length
  std::vector<std::vector<ScoredItem>> lists;  // size n_users
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;
  std::vector<int> shortened_users;            // lists cut below k, flagged
};

}  // namespace recfair
