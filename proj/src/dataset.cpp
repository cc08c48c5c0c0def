#include "recfair/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "recfair/rng.hpp"

namespace recfair {

namespace {

std::string format_rating(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) {
    return std::to_string(static_cast<long long>(v));
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  if (delim == ' ') {
    // whitespace mode: any run of spaces/tabs separates fields
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
  }
  std::string cur;
  for (char c : line) {
    if (c == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

RatingMatrix load_ratings(const std::string& path, const LoadOptions& opts) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open ratings file: " + path);

  std::unordered_map<std::string, int> user_ids;
  std::unordered_map<std::string, int> item_ids;
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;
  std::vector<Entry> entries;
  // pair -> (entry index, line of first occurrence) for duplicate reports
  std::unordered_map<std::uint64_t, std::pair<std::size_t, std::size_t>> seen;

  std::string line;
  std::size_t line_no = 0;
  bool skipped_header = !opts.skip_header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!skipped_header) {
      skipped_header = true;
      continue;
    }
    std::string t = trim(line);
    if (t.empty()) continue;
    auto fields = split_fields(t, opts.delimiter);
    if (fields.size() < 3) {
      throw data_error("line " + std::to_string(line_no) +
                       ": expected user, item, rating");
    }
    std::string user = trim(fields[0]);
    std::string item = trim(fields[1]);
    std::string rating = trim(fields[2]);
    double value = 0.0;
    try {
      std::size_t used = 0;
      value = std::stod(rating, &used);
      if (used != rating.size()) throw std::invalid_argument(rating);
    } catch (const std::exception&) {
      throw data_error("line " + std::to_string(line_no) +
                       ": rating does not parse as a number: " + rating);
    }

    auto [uit, unew] = user_ids.try_emplace(user, static_cast<int>(user_labels.size()));
    if (unew) user_labels.push_back(user);
    auto [iit, inew] = item_ids.try_emplace(item, static_cast<int>(item_labels.size()));
    if (inew) item_labels.push_back(item);
    int u = uit->second;
    int i = iit->second;

    std::uint64_t key = (static_cast<std::uint64_t>(u) << 32) |
                        static_cast<std::uint32_t>(i);
    auto [it, fresh] = seen.try_emplace(key, entries.size(), line_no);
    if (!fresh) {
      // equal-value duplicates collapse; conflicting values are an error
      const Entry& prev = entries[it->second.first];
      if (prev.value != value) {
        throw data_error("conflicting duplicate rating for (" + user + ", " +
                         item + ") at lines " + std::to_string(it->second.second) +
                         " and " + std::to_string(line_no));
      }
      continue;
    }
    entries.push_back(Entry{u, i, value});
  }
  if (entries.empty()) throw data_error("empty ratings file: " + path);

  RatingMatrix m;
  m.scale = opts.scale ? *opts.scale : RatingScale::infer(entries);
  m.scale.check();
  m.data = SparseMatrix(static_cast<int>(user_labels.size()),
                        static_cast<int>(item_labels.size()), std::move(entries));
  m.user_labels = std::move(user_labels);
  m.item_labels = std::move(item_labels);
  m.check_values();
  return m;
}

RatingMatrix ratings_from_entries(int n_users, int n_items,
                                  std::vector<Entry> entries,
                                  std::optional<RatingScale> scale,
                                  std::vector<std::string> user_labels,
                                  std::vector<std::string> item_labels) {
  RatingMatrix m;
  m.scale = scale ? *scale : RatingScale::infer(entries);
  m.scale.check();
  m.data = SparseMatrix(n_users, n_items, std::move(entries));
  m.user_labels = std::move(user_labels);
  m.item_labels = std::move(item_labels);
  m.check_values();
  return m;
}

void save_ratings(const RatingMatrix& m, const std::string& path,
                  char delimiter) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write ratings file: " + path);
  for (const auto& e : m.data.entries()) {
    out << m.user_label(e.user) << delimiter << m.item_label(e.item)
        << delimiter << format_rating(e.value) << '\n';
  }
}

void save_percentiles(const PercentileMatrix& m, const std::string& path,
                      char delimiter) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write percentile file: " + path);
  char buf[32];
  for (const auto& e : m.data.entries()) {
    std::snprintf(buf, sizeof(buf), "%.10g", e.value);
    std::string user = m.user_labels.empty() ? std::to_string(e.user)
                                             : m.user_labels[e.user];
    std::string item = m.item_labels.empty() ? std::to_string(e.item)
                                             : m.item_labels[e.item];
    out << user << delimiter << item << delimiter << buf << '\n';
  }
}

void save_id_map(const std::vector<std::string>& labels,
                 const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot write id map: " + path);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out << labels[i] << '\t' << i << '\n';
  }
}

RatingMatrix filter_kcore(const RatingMatrix& m, int min_user_ratings,
                          int min_item_ratings) {
  if (min_user_ratings < 1 || min_item_ratings < 1) {
    throw config_error("k-core thresholds must be >= 1");
  }
  const auto& entries = m.data.entries();
  std::vector<char> user_alive(m.n_users(), 1);
  std::vector<char> item_alive(m.n_items(), 1);
  std::vector<int> user_count(m.n_users(), 0);
  std::vector<int> item_count(m.n_items(), 0);
  for (const auto& e : entries) {
    ++user_count[e.user];
    ++item_count[e.item];
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (int u = 0; u < m.n_users(); ++u) {
      if (user_alive[u] && user_count[u] < min_user_ratings) {
        user_alive[u] = 0;
        changed = true;
        for (const auto& c : m.data.row(u)) {
          if (item_alive[c.index]) --item_count[c.index];
        }
      }
    }
    for (int i = 0; i < m.n_items(); ++i) {
      if (item_alive[i] && item_count[i] < min_item_ratings) {
        item_alive[i] = 0;
        changed = true;
        for (const auto& c : m.data.col(i)) {
          if (user_alive[c.index]) --user_count[c.index];
        }
      }
    }
  }

  std::vector<int> user_map(m.n_users(), -1);
  std::vector<int> item_map(m.n_items(), -1);
  std::vector<std::string> user_labels;
  std::vector<std::string> item_labels;
  for (int u = 0; u < m.n_users(); ++u) {
    if (user_alive[u]) {
      user_map[u] = static_cast<int>(user_labels.size());
      user_labels.push_back(m.user_label(u));
    }
  }
  for (int i = 0; i < m.n_items(); ++i) {
    if (item_alive[i]) {
      item_map[i] = static_cast<int>(item_labels.size());
      item_labels.push_back(m.item_label(i));
    }
  }

  std::vector<Entry> kept;
  for (const auto& e : entries) {
    if (user_alive[e.user] && item_alive[e.item]) {
      kept.push_back(Entry{user_map[e.user], item_map[e.item], e.value});
    }
  }
  if (kept.empty()) {
    throw data_error("k-core filtering removed every rating (over-filtered)");
  }

  RatingMatrix out;
  out.scale = m.scale;
  out.data = SparseMatrix(static_cast<int>(user_labels.size()),
                          static_cast<int>(item_labels.size()), std::move(kept));
  out.user_labels = std::move(user_labels);
  out.item_labels = std::move(item_labels);
  return out;
}

SplitPair split_per_user(const RatingMatrix& m, double ratio,
                         std::uint64_t seed) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw config_error("split ratio must be in (0, 1)");
  }
  std::vector<Entry> train_entries;
  std::vector<Entry> test_entries;
  train_entries.reserve(m.data.n_entries());

  for (int u = 0; u < m.n_users(); ++u) {
    auto cells = m.data.row(u);
    int p = static_cast<int>(cells.size());
    if (p == 0) continue;
    int take = static_cast<int>(std::floor(ratio * p + 0.5));
    if (p == 1) {
      take = 1;  // single-rating profile: train gets it, test stays empty
    } else {
      if (ratio * p >= 1.0 && take < 1) take = 1;
      if (take > p - 1) take = p - 1;
      if (take < 0) take = 0;
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(u)));
    std::vector<int> picked = rng.sample_indices(p, take);
    std::vector<char> in_train(p, 0);
    for (int idx : picked) in_train[idx] = 1;
    for (int idx = 0; idx < p; ++idx) {
      Entry e{u, cells[idx].index, cells[idx].value};
      (in_train[idx] ? train_entries : test_entries).push_back(e);
    }
  }

  SplitPair pair;
  pair.seed = seed;
  pair.ratio = ratio;
  pair.train.scale = m.scale;
  pair.train.user_labels = m.user_labels;
  pair.train.item_labels = m.item_labels;
  pair.train.data = SparseMatrix(m.n_users(), m.n_items(), std::move(train_entries));
  pair.test.scale = m.scale;
  pair.test.user_labels = m.user_labels;
  pair.test.item_labels = m.item_labels;
  pair.test.data = SparseMatrix(m.n_users(), m.n_items(), std::move(test_entries));
  return pair;
}

std::uint64_t dataset_hash(const RatingMatrix& m) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(m.n_users()));
  mix(static_cast<std::uint64_t>(m.n_items()));
  for (const auto& e : m.data.entries()) {
    mix(static_cast<std::uint64_t>(e.user));
    mix(static_cast<std::uint64_t>(e.item));
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(e.value));
    std::memcpy(&bits, &e.value, sizeof(bits));
    mix(bits);
  }
  return h;
}

}  // namespace recfair
