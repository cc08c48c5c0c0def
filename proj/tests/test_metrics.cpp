#include <doctest.h>

#include "oracles.hpp"
#include "recfair/bias.hpp"
#include "recfair/dataset.hpp"
#include "recfair/metrics.hpp"
#include "recfair/rng.hpp"

using namespace recfair;

namespace {

RecommendationSet recs_from(int n_users, int n_items, int k,
                            std::vector<std::vector<int>> lists) {
  RecommendationSet r;
  r.n_users = n_users;
  r.n_items = n_items;
  r.k = k;
  for (auto& list : lists) {
    std::vector<ScoredItem> scored;
    double s = 1.0;
    for (int item : list) scored.push_back({item, s -= 0.01});
    r.lists.push_back(std::move(scored));
  }
  return r;
}

SparseMatrix test_matrix(int n_users, int n_items,
                         std::vector<std::vector<int>> held) {
  std::vector<Entry> entries;
  for (int u = 0; u < static_cast<int>(held.size()); ++u) {
    for (int i : held[u]) entries.push_back({u, i, 5.0});
  }
  return SparseMatrix(n_users, n_items, std::move(entries));
}

}  // namespace

TEST_CASE("precision counts hits over list slots") {
  // L = [A,B], test = {A, X}
  auto recs = recs_from(1, 4, 2, {{0, 1}});
  auto test = test_matrix(1, 4, {{0, 3}});
  CHECK(precision_at_k(recs, test) == doctest::Approx(0.5));

  auto superset = test_matrix(1, 4, {{0, 1, 2}});
  CHECK(precision_at_k(recs, superset) == doctest::Approx(1.0));

  auto disjoint = test_matrix(1, 4, {{2, 3}});
  CHECK(precision_at_k(recs, disjoint) == doctest::Approx(0.0));
}

TEST_CASE("users without test ratings are excluded but counted") {
  auto recs = recs_from(2, 4, 2, {{0, 1}, {2, 3}});
  auto test = test_matrix(2, 4, {{0}, {}});
  int excluded = 0;
  double p = precision_at_k(recs, test, &excluded);
  CHECK(excluded == 1);
  CHECK(p == doctest::Approx(0.5));
}

TEST_CASE("ndcg discounts a single hit at rank two") {
  auto recs = recs_from(1, 3, 2, {{0, 1}});
  auto test = test_matrix(1, 3, {{1}});
  CHECK(ndcg_at_k(recs, test) == doctest::Approx(1.0 / std::log2(3.0)));

  auto top = test_matrix(1, 3, {{0}});
  CHECK(ndcg_at_k(recs, top) == doctest::Approx(1.0));

  auto miss = test_matrix(1, 3, {{2}});
  CHECK(ndcg_at_k(recs, miss) == doctest::Approx(0.0));
}

TEST_CASE("aggregate diversity counts items reaching alpha appearances") {
  // lists {A,B}, {A,C} over catalog {A,B,C,D}
  auto recs = recs_from(2, 4, 2, {{0, 1}, {0, 2}});
  CHECK(item_aggregate_diversity(recs, 1) == doctest::Approx(0.75));
  CHECK(item_aggregate_diversity(recs, 2) == doctest::Approx(0.25));

  std::vector<int> tail = {3};
  CHECK(item_aggregate_diversity(recs, 1, &tail) == doctest::Approx(0.0));
  std::vector<int> empty;
  CHECK_THROWS_AS(item_aggregate_diversity(recs, 1, &empty), Error);
  CHECK_THROWS_AS(item_aggregate_diversity(recs, 0), Error);
}

TEST_CASE("exposure equality matches the worked examples") {
  // uniform: 4 users, K=1, items 0..3 each once
  auto uniform = recs_from(4, 4, 1, {{0}, {1}, {2}, {3}});
  auto [g1, e1] = equality_of_exposure(uniform);
  CHECK(g1 == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(e1 == doctest::Approx(1.0).epsilon(1e-12));

  // all exposure on one item
  auto single = recs_from(4, 4, 1, {{0}, {0}, {0}, {0}});
  auto [g2, e2] = equality_of_exposure(single);
  CHECK(g2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e2 == doctest::Approx(0.0).epsilon(1e-12));

  // exposures (0, 0, 0.5, 0.5)
  auto half = recs_from(2, 4, 1, {{2}, {3}});
  auto [g3, e3] = equality_of_exposure(half);
  CHECK(g3 == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(e3 == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("exposures sum to one for full lists") {
  auto recs = recs_from(3, 5, 2, {{0, 1}, {1, 2}, {3, 4}});
  auto d = exposure_distribution(recs);
  double sum = 0.0;
  for (double e : d.exposure) sum += e;
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("relative gain is a percentage of the baseline") {
  CHECK(relative_gain(0.3, 0.3) == doctest::Approx(0.0));
  CHECK(relative_gain(0.2, 0.1) == doctest::Approx(100.0));
  CHECK(relative_gain(0.1, 0.2) == doctest::Approx(-50.0));
  CHECK_THROWS_AS(relative_gain(0.1, 0.0), Error);
}

TEST_CASE("metrics match the brute-force recount on random instances") {
  Rng rng(424242);
  for (int trial = 0; trial < 250; ++trial) {
    int n_users = 2 + static_cast<int>(rng.bounded(5));   // <= 6
    int n_items = 2 + static_cast<int>(rng.bounded(7));   // <= 8
    int k = 1 + static_cast<int>(rng.bounded(std::min(3, n_items)));

    RecommendationSet recs;
    recs.n_users = n_users;
    recs.n_items = n_items;
    recs.k = k;
    for (int u = 0; u < n_users; ++u) {
      auto items = rng.sample_indices(n_items, k);
      std::vector<ScoredItem> list;
      double s = 2.0;
      for (int i : items) list.push_back({i, s -= 0.1});
      recs.lists.push_back(std::move(list));
    }

    std::vector<Entry> held;
    for (int u = 0; u < n_users; ++u) {
      for (int i = 0; i < n_items; ++i) {
        if (rng.uniform() < 0.3) held.push_back({u, i, 4.0});
      }
    }
    SparseMatrix test(n_users, n_items, std::move(held));

    CHECK(precision_at_k(recs, test) ==
          doctest::Approx(oracle::precision(recs, test)).epsilon(1e-12));
    CHECK(ndcg_at_k(recs, test) ==
          doctest::Approx(oracle::ndcg(recs, test)).epsilon(1e-12));
    for (int alpha = 1; alpha <= 3; ++alpha) {
      CHECK(item_aggregate_diversity(recs, alpha) ==
            doctest::Approx(oracle::aggregate_diversity(recs, alpha))
                .epsilon(1e-12));
    }
    auto [gini, ee] = equality_of_exposure(recs);
    auto [ogini, oee] = oracle::gini_ee(recs);
    CHECK(gini == doctest::Approx(ogini).epsilon(1e-12));
    CHECK(ee == doctest::Approx(oee).epsilon(1e-12));
    CHECK(ee == doctest::Approx(1.0 - gini).epsilon(1e-12));
    CHECK(gini >= -1e-12);
    CHECK(gini <= 1.0 + 1e-12);
  }
}

TEST_CASE("IA is non-increasing in alpha and LIA uses only tail items") {
  auto recs = recs_from(3, 6, 2, {{0, 1}, {0, 2}, {0, 3}});
  double prev = 1.1;
  for (int alpha = 1; alpha <= 4; ++alpha) {
    double ia = item_aggregate_diversity(recs, alpha);
    CHECK(ia <= prev);
    prev = ia;
  }

  std::vector<int> tail = {3, 4, 5};
  double lia = item_aggregate_diversity(recs, 1, &tail);
  CHECK(lia == doctest::Approx(1.0 / 3.0));  // only item 3 appears
}

TEST_CASE("metrics are invariant under consistent item relabeling") {
  auto recs = recs_from(2, 4, 2, {{0, 1}, {2, 3}});
  auto test = test_matrix(2, 4, {{1}, {2}});

  // relabel items by the permutation i -> 3 - i; reverse user order too
  auto perm = [](int i) { return 3 - i; };
  RecommendationSet relabeled;
  relabeled.n_users = 2;
  relabeled.n_items = 4;
  relabeled.k = 2;
  relabeled.lists.resize(2);
  for (int u = 0; u < 2; ++u) {
    for (const auto& s : recs.lists[u]) {
      relabeled.lists[1 - u].push_back({perm(s.item), s.score});
    }
  }
  std::vector<Entry> held;
  for (const auto& e : test.entries()) {
    held.push_back({1 - e.user, perm(e.item), e.value});
  }
  SparseMatrix relabeled_test(2, 4, std::move(held));

  CHECK(precision_at_k(recs, test) ==
        doctest::Approx(precision_at_k(relabeled, relabeled_test)));
  CHECK(ndcg_at_k(recs, test) ==
        doctest::Approx(ndcg_at_k(relabeled, relabeled_test)));
  CHECK(equality_of_exposure(recs).first ==
        doctest::Approx(equality_of_exposure(relabeled).first));
}

TEST_CASE("evaluate assembles a consistent report") {
  std::vector<Entry> train_entries;
  for (int u = 0; u < 6; ++u) {
    for (int i = 0; i <= u; ++i) {
      train_entries.push_back({u, i, static_cast<double>(1 + (u + i) % 5)});
    }
  }
  auto train = ratings_from_entries(6, 6, train_entries,
                                    RatingScale::one_to_five());
  auto seg = segment_head_tail(train.data, 0.2);

  auto recs = recs_from(6, 6, 2,
                        {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 0}});
  auto test = test_matrix(6, 6, {{1}, {2}, {0}, {4}, {5}, {3}});
  EvalOptions opts;
  opts.alphas = {1, 2};
  opts.segmentation = &seg;
  auto report = evaluate(recs, test, opts);
  CHECK(report.ee == doctest::Approx(1.0 - report.gini).epsilon(1e-12));
  CHECK(report.ia.size() == 2);
  CHECK(report.lia.size() == 2);
  CHECK(report.precision >= 0.0);
  CHECK(report.precision <= 1.0);
  CHECK(report.ndcg >= 0.0);
  CHECK(report.ndcg <= 1.0);
  for (auto& [alpha, v] : report.lia) CHECK(v <= 1.0);
}
