#include <doctest.h>

#include <cstdio>
#include <fstream>

#include "recfair/dataset.hpp"
#include "recfair/rng.hpp"
#include "recfair/synthetic.hpp"

using namespace recfair;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
  std::string path = "/tmp/recfair_test_" + name;
  std::ofstream out(path);
  out << content;
  return path;
}

}  // namespace

TEST_CASE("load_ratings parses a three-line whitespace file") {
  auto path = write_temp("tiny.txt", "u1 i1 5\nu1 i2 3\nu2 i1 4\n");
  LoadOptions opts;
  opts.delimiter = ' ';
  auto m = load_ratings(path, opts);
  CHECK(m.n_users() == 2);
  CHECK(m.n_items() == 2);
  CHECK(m.data.n_entries() == 3);
  CHECK(m.user_labels == std::vector<std::string>{"u1", "u2"});
  CHECK(m.data.row(0)[0].value == 5.0);
}

TEST_CASE("load_ratings infers the MovieLens one-to-five scale") {
  std::string content;
  for (int r = 1; r <= 5; ++r) {
    content += "u" + std::to_string(r) + "\ti" + std::to_string(r) + "\t" +
               std::to_string(r) + "\n";
  }
  auto path = write_temp("ml.tsv", content);
  auto m = load_ratings(path);
  CHECK(m.scale.levels == std::vector<double>{1, 2, 3, 4, 5});
  CHECK(m.scale.min_value() == 1.0);
  CHECK(m.scale.max_value() == 5.0);
}

TEST_CASE("load_ratings rejects conflicting duplicates with both lines") {
  auto path = write_temp("dup.tsv", "a\tx\t5\nb\tx\t4\na\tx\t3\n");
  try {
    load_ratings(path);
    FAIL("expected data error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kData);
    std::string msg = e.what();
    CHECK(msg.find("1") != std::string::npos);
    CHECK(msg.find("3") != std::string::npos);
  }
}

TEST_CASE("load_ratings collapses identical duplicates") {
  auto path = write_temp("dup_same.tsv", "a\tx\t5\na\tx\t5\nb\tx\t4\n");
  auto m = load_ratings(path);
  CHECK(m.data.n_entries() == 2);
}

TEST_CASE("load_ratings reports malformed lines and empty files") {
  auto bad = write_temp("bad.tsv", "a\tx\t5\na\tx\n");
  CHECK_THROWS_AS(load_ratings(bad), Error);
  auto nonnum = write_temp("nonnum.tsv", "a\tx\tfive\n");
  try {
    load_ratings(nonnum);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  auto empty = write_temp("empty.tsv", "");
  CHECK_THROWS_AS(load_ratings(empty), Error);
}

TEST_CASE("load_ratings honors header skipping and explicit scale") {
  auto path = write_temp("hdr.tsv", "user\titem\trating\na\tx\t4\nb\ty\t2\n");
  LoadOptions opts;
  opts.skip_header = true;
  opts.scale = RatingScale::one_to_five();
  auto m = load_ratings(path, opts);
  CHECK(m.data.n_entries() == 2);
  CHECK(m.scale.levels.size() == 5);

  // value outside the declared scale is a data error
  auto bad = write_temp("off_scale.tsv", "a\tx\t9\nb\ty\t2\n");
  LoadOptions strict;
  strict.scale = RatingScale::one_to_five();
  CHECK_THROWS_AS(load_ratings(bad, strict), Error);
}

TEST_CASE("filter_kcore with thresholds 1,1 is the identity") {
  SyntheticSpec spec;
  spec.n_users = 40;
  spec.n_items = 25;
  spec.mean_profile = 12;
  spec.seed = 7;
  auto m = generate_synthetic(spec);
  auto filtered = filter_kcore(m, 1, 1);
  CHECK(filtered.data.n_entries() == m.data.n_entries());
  CHECK(filtered.n_users() == m.n_users());
}

TEST_CASE("filter_kcore cascades to a fixed point") {
  // u3 only reaches threshold through i3; dropping i3 cascades to u3, and
  // dropping u3 starves i2
  std::vector<Entry> entries = {
      {0, 0, 5}, {0, 1, 4}, {1, 0, 3}, {1, 1, 5},
      {2, 0, 4}, {2, 1, 4}, {2, 2, 5}, {3, 2, 3}, {3, 3, 4},
  };
  auto m = ratings_from_entries(4, 4, entries);
  auto filtered = filter_kcore(m, 2, 2);
  CHECK(filtered.n_users() == 3);
  CHECK(filtered.n_items() == 2);
  CHECK(filtered.data.n_entries() == 6);
  for (int u = 0; u < filtered.n_users(); ++u) {
    CHECK(filtered.data.user_count(u) >= 2);
  }
  for (int i = 0; i < filtered.n_items(); ++i) {
    CHECK(filtered.data.item_count(i) >= 2);
  }

  // fixed point: running again changes nothing
  auto again = filter_kcore(filtered, 2, 2);
  CHECK(again.data.entries() == filtered.data.entries());
}

TEST_CASE("filter_kcore signals over-filtering") {
  std::vector<Entry> entries = {{0, 0, 5}, {1, 1, 3}};
  auto m = ratings_from_entries(2, 2, entries);
  CHECK_THROWS_AS(filter_kcore(m, 5, 5), Error);
}

TEST_CASE("k-core keeps external labels aligned") {
  auto path = write_temp("labels.tsv",
                         "alice\tbook\t5\nalice\tfilm\t4\nbob\tbook\t3\n"
                         "bob\tfilm\t2\ncarol\tsong\t1\n");
  auto m = load_ratings(path);
  auto filtered = filter_kcore(m, 2, 2);
  CHECK(filtered.user_labels == std::vector<std::string>{"alice", "bob"});
  CHECK(filtered.item_labels == std::vector<std::string>{"book", "film"});
}

TEST_CASE("split_per_user follows round-half-up and the one-rating rule") {
  std::vector<Entry> entries;
  // user 0: 10 ratings, user 1: 5 ratings, user 2: 1 rating
  for (int i = 0; i < 10; ++i) entries.push_back({0, i, 3});
  for (int i = 0; i < 5; ++i) entries.push_back({1, i, 4});
  entries.push_back({2, 0, 5});
  auto m = ratings_from_entries(3, 10, entries);
  auto pair = split_per_user(m, 0.8, 13);
  CHECK(pair.train.data.user_count(0) == 8);
  CHECK(pair.test.data.user_count(0) == 2);
  CHECK(pair.train.data.user_count(1) == 4);
  CHECK(pair.test.data.user_count(1) == 1);
  CHECK(pair.train.data.user_count(2) == 1);
  CHECK(pair.test.data.user_count(2) == 0);
}

TEST_CASE("split_per_user keeps both halves non-empty for high ratios") {
  std::vector<Entry> entries = {{0, 0, 3}, {0, 1, 4}};
  auto m = ratings_from_entries(1, 2, entries);
  // round-half-up(0.8 * 2) = 2 would empty the test half; clamp to 1
  auto pair = split_per_user(m, 0.8, 1);
  CHECK(pair.train.data.user_count(0) == 1);
  CHECK(pair.test.data.user_count(0) == 1);
}

TEST_CASE("split_per_user is deterministic and conserves entries") {
  SyntheticSpec spec;
  spec.n_users = 60;
  spec.n_items = 40;
  spec.seed = 3;
  auto m = generate_synthetic(spec);
  auto a = split_per_user(m, 0.8, 99);
  auto b = split_per_user(m, 0.8, 99);
  CHECK(a.train.data.entries() == b.train.data.entries());
  CHECK(a.test.data.entries() == b.test.data.entries());
  CHECK(a.train.data.n_entries() + a.test.data.n_entries() ==
        m.data.n_entries());

  // disjointness
  for (const auto& e : a.test.data.entries()) {
    CHECK_FALSE(a.train.data.has(e.user, e.item));
  }

  auto c = split_per_user(m, 0.8, 100);
  CHECK(c.train.data.entries() != a.train.data.entries());
}

TEST_CASE("split rejects out-of-range ratios") {
  auto m = ratings_from_entries(1, 2, {{0, 0, 1}, {0, 1, 2}});
  CHECK_THROWS_AS(split_per_user(m, 0.0, 1), Error);
  CHECK_THROWS_AS(split_per_user(m, 1.0, 1), Error);
}

TEST_CASE("save and reload ratings round-trips entries and labels") {
  auto path = write_temp("roundtrip.tsv", "");
  std::vector<Entry> entries = {{0, 0, 5}, {0, 1, 3}, {1, 0, 2}};
  auto m = ratings_from_entries(2, 2, entries, RatingScale::one_to_five(),
                                {"u-a", "u-b"}, {"i-a", "i-b"});
  save_ratings(m, path);
  auto back = load_ratings(path);
  CHECK(back.data.entries() == m.data.entries());
  CHECK(back.user_labels == m.user_labels);
  CHECK(back.item_labels == m.item_labels);
}

TEST_CASE("id maps list every label once") {
  auto path = write_temp("idmap.tsv", "");
  save_id_map({"x", "y", "z"}, path);
  std::ifstream in(path);
  std::string label;
  int id;
  int rows = 0;
  while (in >> label >> id) {
    CHECK(id == rows);
    ++rows;
  }
  CHECK(rows == 3);
}

TEST_CASE("dataset_hash tracks content") {
  auto a = ratings_from_entries(2, 2, {{0, 0, 5}, {1, 1, 3}});
  auto b = ratings_from_entries(2, 2, {{0, 0, 5}, {1, 1, 3}});
  auto c = ratings_from_entries(2, 2, {{0, 0, 5}, {1, 1, 4}});
  CHECK(dataset_hash(a) == dataset_hash(b));
  CHECK(dataset_hash(a) != dataset_hash(c));
}
