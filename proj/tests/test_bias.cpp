#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "recfair/bias.hpp"
#include "recfair/dataset.hpp"
#include "recfair/rng.hpp"
#include "recfair/synthetic.hpp"

using namespace recfair;

namespace {

// counts[i] ratings for item i, values cycling through the scale
RatingMatrix matrix_with_counts(const std::vector<int>& counts) {
  std::vector<Entry> entries;
  int max_count = 0;
  for (int c : counts) max_count = std::max(max_count, c);
  for (int i = 0; i < static_cast<int>(counts.size()); ++i) {
    for (int u = 0; u < counts[i]; ++u) {
      entries.push_back({u, i, static_cast<double>(1 + (u + i) % 5)});
    }
  }
  return ratings_from_entries(max_count, static_cast<int>(counts.size()),
                              entries, RatingScale::one_to_five());
}

RatingMatrix item_profile(const std::vector<double>& values) {
  std::vector<Entry> entries;
  for (int u = 0; u < static_cast<int>(values.size()); ++u) {
    entries.push_back({u, 0, values[u]});
  }
  return ratings_from_entries(static_cast<int>(values.size()), 1, entries,
                              RatingScale::one_to_five());
}

}  // namespace

TEST_CASE("lorenz curve accumulates count-descending shares") {
  auto m = matrix_with_counts({65, 20, 10, 5});
  auto d = diagnose(m);
  // points: (0,0) then one per item
  REQUIRE(d.lorenz.size() == 5);
  CHECK(d.lorenz.front() == std::pair<double, double>{0.0, 0.0});
  CHECK(d.lorenz[1].first == doctest::Approx(0.25));
  CHECK(d.lorenz[1].second == doctest::Approx(0.65));
  CHECK(d.lorenz.back().first == doctest::Approx(1.0));
  CHECK(d.lorenz.back().second == doctest::Approx(1.0));
}

TEST_CASE("equal-count items give the diagonal lorenz curve") {
  auto m = matrix_with_counts({10, 10, 10, 10});
  auto d = diagnose(m);
  for (const auto& [x, y] : d.lorenz) CHECK(y == doctest::Approx(x));
}

TEST_CASE("rating histogram fractions sum to one") {
  SyntheticSpec spec;
  spec.n_users = 80;
  spec.n_items = 50;
  spec.seed = 5;
  auto m = generate_synthetic(spec);
  auto d = diagnose(m);
  double sum = 0.0;
  for (const auto& [level, frac] : d.rating_histogram) sum += frac;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(d.item_stats.size() == static_cast<std::size_t>(m.n_items()));
}

TEST_CASE("diagnostics files carry the documented columns") {
  auto m = matrix_with_counts({8, 4, 2});
  std::filesystem::create_directories("/tmp/recfair_diag");
  write_diagnostics(diagnose(m), "/tmp/recfair_diag");
  auto first_line = [](const std::string& path) {
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    return line;
  };
  CHECK(first_line("/tmp/recfair_diag/lorenz.csv") ==
        "item_fraction,rating_fraction");
  CHECK(first_line("/tmp/recfair_diag/rating_hist.csv") == "rating,fraction");
  CHECK(first_line("/tmp/recfair_diag/item_stats.csv") ==
        "item,count,mean_rating");
}

TEST_CASE("head is the shortest prefix reaching the target share") {
  auto m = matrix_with_counts({50, 30, 10, 5, 5});
  auto seg = segment_head_tail(m.data, 0.2);
  CHECK(seg.head == std::vector<int>{0});
  CHECK(seg.coverage == doctest::Approx(0.5));
  CHECK(seg.tail.size() == 4);
}

TEST_CASE("single item catalog puts everything in head") {
  auto m = matrix_with_counts({7});
  auto seg = segment_head_tail(m.data, 0.2);
  CHECK(seg.head == std::vector<int>{0});
  CHECK(seg.tail.empty());
}

TEST_CASE("uniform counts break ties by ascending item id") {
  auto m = matrix_with_counts({10, 10, 10, 10, 10});
  auto seg = segment_head_tail(m.data, 0.2);
  CHECK(seg.head == std::vector<int>{0});
  CHECK(seg.coverage == doctest::Approx(0.2));
}

TEST_CASE("head and tail partition the catalog") {
  SyntheticSpec spec;
  spec.n_users = 100;
  spec.n_items = 60;
  spec.seed = 11;
  auto m = generate_synthetic(spec);
  auto seg = segment_head_tail(m.data, 0.2);
  CHECK(seg.head.size() + seg.tail.size() ==
        static_cast<std::size_t>(m.n_items()));
  for (int i : seg.head) CHECK(seg.is_head(i));
  for (int i : seg.tail) CHECK_FALSE(seg.is_head(i));
  // head items, sorted by count descending, are a prefix of that ordering:
  // every head item's count is >= every tail item's count
  int min_head = std::numeric_limits<int>::max();
  for (int i : seg.head) min_head = std::min(min_head, m.data.item_count(i));
  for (int i : seg.tail) CHECK(m.data.item_count(i) <= min_head);
}

TEST_CASE("flip_positivity rewrites max ratings on the popular item") {
  // item 0 is most popular and holds ratings {5,5,4,1}
  std::vector<Entry> entries = {
      {0, 0, 5}, {1, 0, 5}, {2, 0, 4}, {3, 0, 1}, {0, 1, 5}, {1, 1, 3}};
  auto m = ratings_from_entries(4, 2, entries, RatingScale::one_to_five());
  auto flipped = flip_positivity(m, 0.5);  // ceil(0.5*2)=1 item: item 0
  std::vector<double> item0;
  for (const auto& c : flipped.data.col(0)) item0.push_back(c.value);
  CHECK(item0 == std::vector<double>{1, 1, 4, 1});
  // item 1 untouched, including its rating 5
  CHECK(flipped.data.col(1)[0].value == 5.0);
}

TEST_CASE("flip with no max-value ratings on covered items is the identity") {
  std::vector<Entry> entries = {{0, 0, 4}, {1, 0, 3}, {0, 1, 5}};
  auto m = ratings_from_entries(2, 2, entries, RatingScale::one_to_five());
  auto flipped = flip_positivity(m, 0.5);  // covers item 0 only, which has no 5
  CHECK(flipped.data.entries() == m.data.entries());
}

TEST_CASE("beta one flips every max rating") {
  std::vector<Entry> entries = {{0, 0, 5}, {0, 1, 5}, {1, 0, 5}};
  auto m = ratings_from_entries(2, 2, entries, RatingScale::one_to_five());
  auto flipped = flip_positivity(m, 1.0);
  for (const auto& e : flipped.data.entries()) CHECK(e.value == 1.0);
}

TEST_CASE("flip preserves popularity counts and is idempotent") {
  SyntheticSpec spec;
  spec.n_users = 120;
  spec.n_items = 80;
  spec.seed = 21;
  auto m = generate_synthetic(spec);
  for (double beta : {0.01, 0.1, 0.3, 0.5}) {
    auto once = flip_positivity(m, beta);
    for (int i = 0; i < m.n_items(); ++i) {
      CHECK(once.data.item_count(i) == m.data.item_count(i));
    }
    auto twice = flip_positivity(once, beta);
    CHECK(twice.data.entries() == once.data.entries());
  }
}

TEST_CASE("percentile transform reproduces the worked vector") {
  auto m = item_profile({1, 2, 2, 2, 2, 3, 3, 4, 5, 5});
  auto p = percentile_transform(m);
  // last-occurrence positions over the sorted profile of size 10
  for (std::size_t i = 0; i < p.data.entries().size(); ++i) {
    double source = m.data.entries()[i].value;
    double per = p.data.entries()[i].value;
    if (source == 2.0) CHECK(per == doctest::Approx(100.0 * 5 / 11));
    if (source == 5.0) CHECK(per == doctest::Approx(100.0 * 10 / 11));
    if (source == 1.0) CHECK(per == doctest::Approx(100.0 * 1 / 11));
  }
}

TEST_CASE("degenerate profiles get the documented values") {
  auto single = percentile_transform(item_profile({4}));
  CHECK(single.data.entries()[0].value == doctest::Approx(50.0));

  auto uniform = percentile_transform(item_profile({3, 3, 3}));
  for (const auto& e : uniform.data.entries()) {
    CHECK(e.value == doctest::Approx(75.0));
  }
}

TEST_CASE("percentile transform matches the brute-force oracle exactly") {
  Rng rng(20240817);
  for (int trial = 0; trial < 1000; ++trial) {
    int size = 1 + static_cast<int>(rng.bounded(12));
    std::vector<double> profile;
    for (int i = 0; i < size; ++i) {
      profile.push_back(1.0 + static_cast<double>(rng.bounded(5)));
    }
    auto m = item_profile(profile);
    auto p = percentile_transform(m);
    for (std::size_t i = 0; i < p.data.entries().size(); ++i) {
      double expected = oracle::percentile(profile, profile[i]);
      CHECK(p.data.entries()[i].value == expected);
    }
  }
}

TEST_CASE("percentile bounds, ties, and monotonicity hold per item") {
  SyntheticSpec spec;
  spec.n_users = 90;
  spec.n_items = 40;
  spec.seed = 33;
  auto m = generate_synthetic(spec);
  auto p = percentile_transform(m);
  CHECK(p.data.n_entries() == m.data.n_entries());
  for (std::size_t i = 0; i < p.data.entries().size(); ++i) {
    const auto& e = p.data.entries()[i];
    CHECK(e.user == m.data.entries()[i].user);
    CHECK(e.item == m.data.entries()[i].item);
    CHECK(e.value > 0.0);
    CHECK(e.value < 100.0);
  }
  for (int i = 0; i < m.n_items(); ++i) {
    auto source = m.data.col(i);
    auto trans = p.data.col(i);
    for (std::size_t a = 0; a < source.size(); ++a) {
      for (std::size_t b = 0; b < source.size(); ++b) {
        if (source[a].value < source[b].value) {
          CHECK(trans[a].value < trans[b].value);
        }
        if (source[a].value == source[b].value) {
          CHECK(trans[a].value == trans[b].value);
        }
      }
    }
  }
}

TEST_CASE("item profile size report counts ratings per item") {
  auto m = matrix_with_counts({4, 2, 1});
  CHECK(item_profile_sizes(m) == std::vector<int>{4, 2, 1});
}
