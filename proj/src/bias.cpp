#include "recfair/bias.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace recfair {

namespace {

// Item ids sorted by rating count descending, ties by ascending id. The
// shared popularity order for segmentation and flipping.
std::vector<int> popularity_order(const SparseMatrix& data) {
  std::vector<int> order(data.n_items());
  for (int i = 0; i < data.n_items(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&data](int a, int b) {
    int ca = data.item_count(a);
    int cb = data.item_count(b);
    return ca != cb ? ca > cb : a < b;
  });
  return order;
}

void write_csv_header(std::ofstream& out, const char* header) {
  out << header << '\n';
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

BiasDiagnostics diagnose(const RatingMatrix& m) {
  if (m.data.n_entries() == 0) throw data_error("diagnose: empty matrix");
  BiasDiagnostics d;

  const double total = static_cast<double>(m.data.n_entries());
  auto order = popularity_order(m.data);
  d.lorenz.reserve(order.size() + 1);
  d.lorenz.emplace_back(0.0, 0.0);
  double cum = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    cum += m.data.item_count(order[k]);
    d.lorenz.emplace_back(static_cast<double>(k + 1) / order.size(),
                          cum / total);
  }

  std::vector<double> level_counts(m.scale.levels.size(), 0.0);
  for (const auto& e : m.data.entries()) {
    auto it = std::lower_bound(m.scale.levels.begin(), m.scale.levels.end(),
                               e.value);
    level_counts[it - m.scale.levels.begin()] += 1.0;
  }
  for (std::size_t l = 0; l < m.scale.levels.size(); ++l) {
    d.rating_histogram.emplace_back(m.scale.levels[l], level_counts[l] / total);
  }

  d.item_stats.reserve(m.n_items());
  for (int i = 0; i < m.n_items(); ++i) {
    auto col = m.data.col(i);
    double sum = 0.0;
    for (const auto& c : col) sum += c.value;
    int count = static_cast<int>(col.size());
    d.item_stats.push_back(
        {i, count, count == 0 ? 0.0 : sum / count});
  }
  return d;
}

ItemSegmentation segment_head_tail(const SparseMatrix& data,
                                   double target_fraction) {
  if (!(target_fraction > 0.0 && target_fraction < 1.0)) {
    throw config_error("head target fraction must be in (0, 1)");
  }
  auto order = popularity_order(data);
  const double total = static_cast<double>(data.n_entries());
  std::vector<int> head;
  std::vector<int> tail;
  double cum = 0.0;
  double coverage = 0.0;
  bool done = total == 0.0;
  for (int item : order) {
    if (!done) {
      head.push_back(item);
      cum += data.item_count(item);
      if (cum / total >= target_fraction) {
        coverage = cum / total;
        done = true;
      }
    } else {
      tail.push_back(item);
    }
  }
  return ItemSegmentation::make(std::move(head), std::move(tail), coverage,
                                data.n_items());
}

RatingMatrix flip_positivity(const RatingMatrix& m, double beta) {
  if (!(beta > 0.0 && beta <= 1.0)) {
    throw config_error("flip beta must be in (0, 1]");
  }
  auto order = popularity_order(m.data);
  int flipped_items = static_cast<int>(
      std::ceil(beta * static_cast<double>(m.n_items())));
  if (flipped_items > m.n_items()) flipped_items = m.n_items();
  std::vector<char> flip(m.n_items(), 0);
  for (int k = 0; k < flipped_items; ++k) flip[order[k]] = 1;

  const double hi = m.scale.max_value();
  const double lo = m.scale.min_value();
  std::vector<Entry> entries = m.data.entries();
  for (auto& e : entries) {
    if (flip[e.item] && e.value == hi) e.value = lo;
  }

  RatingMatrix out;
  out.scale = m.scale;
  out.user_labels = m.user_labels;
  out.item_labels = m.item_labels;
  out.data = SparseMatrix(m.n_users(), m.n_items(), std::move(entries));
  return out;
}

PercentileMatrix percentile_transform(const RatingMatrix& m) {
  std::vector<Entry> entries = m.data.entries();
  // per item: sorted profile, then value -> last-occurrence position
  for (int i = 0; i < m.n_items(); ++i) {
    auto col = m.data.col(i);
    if (col.empty()) continue;
    std::vector<double> profile;
    profile.reserve(col.size());
    for (const auto& c : col) profile.push_back(c.value);
    std::sort(profile.begin(), profile.end());
    const double denom = static_cast<double>(profile.size() + 1);
    for (const auto& c : col) {
      auto last = std::upper_bound(profile.begin(), profile.end(), c.value);
      double position = static_cast<double>(last - profile.begin());
      double per = 100.0 * position / denom;
      // rewrite the matching entry; entries are (user, item) sorted so we
      // locate by binary search over the user's row segment
      auto lo = std::lower_bound(
          entries.begin(), entries.end(), Entry{c.index, i, 0.0},
          [](const Entry& a, const Entry& b) {
            return a.user != b.user ? a.user < b.user : a.item < b.item;
          });
      lo->value = per;
    }
  }

  PercentileMatrix out;
  out.source_scale = m.scale;
  out.user_labels = m.user_labels;
  out.item_labels = m.item_labels;
  out.data = SparseMatrix(m.n_users(), m.n_items(), std::move(entries));
  return out;
}

std::vector<int> item_profile_sizes(const RatingMatrix& m) {
  std::vector<int> sizes(m.n_items());
  for (int i = 0; i < m.n_items(); ++i) sizes[i] = m.data.item_count(i);
  return sizes;
}

void write_diagnostics(const BiasDiagnostics& d, const std::string& out_dir) {
  {
    std::ofstream out(out_dir + "/lorenz.csv");
    if (!out) throw data_error("cannot write " + out_dir + "/lorenz.csv");
    write_csv_header(out, "item_fraction,rating_fraction");
    for (const auto& [x, y] : d.lorenz) out << num(x) << ',' << num(y) << '\n';
  }
  {
    std::ofstream out(out_dir + "/rating_hist.csv");
    if (!out) throw data_error("cannot write " + out_dir + "/rating_hist.csv");
    write_csv_header(out, "rating,fraction");
    for (const auto& [r, f] : d.rating_histogram) {
      out << num(r) << ',' << num(f) << '\n';
    }
  }
  {
    std::ofstream out(out_dir + "/item_stats.csv");
    if (!out) throw data_error("cannot write " + out_dir + "/item_stats.csv");
    write_csv_header(out, "item,count,mean_rating");
    for (const auto& s : d.item_stats) {
      out << s.item << ',' << s.count << ',' << num(s.mean_rating) << '\n';
    }
  }
}

}  // namespace recfair
