#include <algorithm>
#include <cmath>
#include <sstream>

#include "models_internal.hpp"
#include "recfair/rng.hpp"

namespace recfair {

const char* algorithm_name(Algorithm a) {
  switch (a) {
    case Algorithm::kBiasedMF: return "BiasedMF";
    case Algorithm::kSVDpp: return "SVDpp";
    case Algorithm::kWRMF: return "WRMF";
    case Algorithm::kListRankMF: return "ListRankMF";
    case Algorithm::kUserKNN: return "UserKNN";
    case Algorithm::kItemKNN: return "ItemKNN";
  }
  return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
  if (name == "BiasedMF") return Algorithm::kBiasedMF;
  if (name == "SVDpp" || name == "SVD++") return Algorithm::kSVDpp;
  if (name == "WRMF") return Algorithm::kWRMF;
  if (name == "ListRankMF" || name == "ListRank") return Algorithm::kListRankMF;
  if (name == "UserKNN") return Algorithm::kUserKNN;
  if (name == "ItemKNN") return Algorithm::kItemKNN;
  throw config_error("unknown algorithm: " + name);
}

void ModelConfig::check() const {
  if (factors < 1) throw config_error("factors must be >= 1");
  if (iterations < 1) throw config_error("iterations must be >= 1");
  if (neighbors < 1) throw config_error("neighbors must be >= 1");
  if (learning_rate < 0 || regularization < 0 || shrinkage < 0 ||
      confidence_alpha < 0) {
    throw config_error("rates and coefficients must be >= 0");
  }
}

std::string ModelConfig::describe() const {
  std::ostringstream ss;
  ss << algorithm_name(algorithm);
  switch (algorithm) {
    case Algorithm::kUserKNN:
    case Algorithm::kItemKNN:
      ss << "(neighbors=" << neighbors << ",shrinkage=" << shrinkage << ")";
      break;
    case Algorithm::kWRMF:
      ss << "(factors=" << factors << ",iterations=" << iterations
         << ",alpha=" << confidence_alpha << ",reg=" << regularization << ")";
      break;
    default:
      ss << "(factors=" << factors << ",iterations=" << iterations
         << ",lr=" << learning_rate << ",reg=" << regularization << ")";
  }
  return ss.str();
}

void TrainedModel::init_base(const ModelConfig& cfg, const TrainInput& input) {
  cfg.check();
  if (input.data->n_entries() == 0) {
    throw data_error("cannot train on an empty matrix");
  }
  config_ = cfg;
  kind_ = input.kind;
  n_users_ = input.data->n_users();
  n_items_ = input.data->n_items();
  global_mean_ = input.data->global_mean();
  fallback_score_ = global_mean_;

  rated_ptr_.assign(n_users_ + 1, 0);
  rated_items_.clear();
  rated_items_.reserve(input.data->n_entries());
  for (int u = 0; u < n_users_; ++u) {
    for (const auto& c : input.data->row(u)) rated_items_.push_back(c.index);
    rated_ptr_[u + 1] = rated_items_.size();
  }
  item_cold_.assign(n_items_, 0);
  for (int i = 0; i < n_items_; ++i) {
    item_cold_[i] = input.data->item_count(i) == 0 ? 1 : 0;
  }
  if (input.user_labels) user_labels_ = *input.user_labels;
  if (input.item_labels) item_labels_ = *input.item_labels;
}

double TrainedModel::score(int user, int item) const {
  if (user_is_cold(user) || item_is_cold(item)) {
    ++fallback_count_;
    return fallback_score_;
  }
  return score_impl(user, item);
}

std::unique_ptr<TrainedModel> train(const ModelConfig& cfg,
                                    const TrainInput& input) {
  switch (cfg.algorithm) {
    case Algorithm::kBiasedMF: return detail::train_biasedmf(cfg, input);
    case Algorithm::kSVDpp: return detail::train_svdpp(cfg, input);
    case Algorithm::kWRMF: return detail::train_wrmf(cfg, input);
    case Algorithm::kListRankMF: return detail::train_listrank(cfg, input);
    case Algorithm::kUserKNN: return detail::train_userknn(cfg, input);
    case Algorithm::kItemKNN: return detail::train_itemknn(cfg, input);
  }
  throw config_error("unknown algorithm tag");
}

RecommendationSet recommend(const TrainedModel& model, int k,
                            bool exclude_train) {
  if (k < 1) throw config_error("recommendation list size must be >= 1");
  RecommendationSet recs;
  recs.n_users = model.n_users();
  recs.n_items = model.n_items();
  recs.k = k;
  recs.user_labels = model.user_labels();
  recs.item_labels = model.item_labels();
  recs.lists.resize(model.n_users());

  std::vector<ScoredItem> scored;
  scored.reserve(model.n_items());
  for (int u = 0; u < model.n_users(); ++u) {
    scored.clear();
    auto rated = model.rated_items(u);
    std::size_t r = 0;
    for (int i = 0; i < model.n_items(); ++i) {
      if (exclude_train) {
        while (r < rated.size() && rated[r] < i) ++r;
        if (r < rated.size() && rated[r] == i) continue;
      }
      double s = model.score(u, i);
      if (!std::isfinite(s)) {
        throw run_error("non-finite score for user " + std::to_string(u) +
                        ", item " + std::to_string(i));
      }
      scored.push_back({i, s});
    }
    int take = std::min<int>(k, static_cast<int>(scored.size()));
    auto by_rank = [](const ScoredItem& a, const ScoredItem& b) {
      return a.score != b.score ? a.score > b.score : a.item < b.item;
    };
    std::partial_sort(scored.begin(), scored.begin() + take, scored.end(),
                      by_rank);
    recs.lists[u].assign(scored.begin(), scored.begin() + take);
    if (take < k) recs.shortened_users.push_back(u);
  }
  return recs;
}

double metric_by_name(const MetricReport& report, const std::string& name) {
  if (name == "ndcg") return report.ndcg;
  if (name == "precision") return report.precision;
  if (name == "ee") return report.ee;
  if (name == "gini") return report.gini;
  auto at = name.find('@');
  if (at != std::string::npos) {
    std::string base = name.substr(0, at);
    int alpha = std::stoi(name.substr(at + 1));
    const auto& map = base == "ia" ? report.ia : report.lia;
    if (base == "ia" || base == "lia") {
      auto it = map.find(alpha);
      if (it != map.end()) return it->second;
    }
  }
  throw config_error("unknown metric name: " + name);
}

GridSearchResult grid_search(const std::vector<ModelConfig>& grid,
                             const TrainInput& train_input,
                             const SparseMatrix& test,
                             const std::string& objective, int k,
                             const EvalOptions& eval_opts) {
  if (grid.empty()) throw config_error("grid search needs at least one config");
  GridSearchResult result;
  double best_value = 0.0;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    GridSearchResult::Row row;
    row.config = grid[g];
    try {
      auto model = train(grid[g], train_input);
      auto recs = recommend(*model, k);
      row.report = evaluate(recs, test, eval_opts);
      row.report.labels.algorithm = algorithm_name(grid[g].algorithm);
      row.report.labels.input = input_kind_name(train_input.kind);
      double value = metric_by_name(row.report, objective);
      if (result.best_index < 0 || value > best_value) {
        best_value = value;
        result.best_index = static_cast<int>(g);
        result.best = grid[g];
      }
    } catch (const std::exception& ex) {
      row.failed = true;
      row.error = ex.what();
    }
    result.rows.push_back(std::move(row));
  }
  if (result.best_index < 0) {
    throw run_error("every grid configuration failed to train");
  }
  return result;
}

std::vector<ModelConfig> paper_grid(Algorithm a, std::uint64_t seed) {
  std::vector<ModelConfig> grid;
  if (a == Algorithm::kUserKNN || a == Algorithm::kItemKNN) {
    for (double shrinkage : {50.0, 100.0, 200.0}) {
      for (int neighbors : {10, 20, 30, 50, 70, 100, 200}) {
        ModelConfig c;
        c.algorithm = a;
        c.shrinkage = shrinkage;
        c.neighbors = neighbors;
        c.seed = seed;
        grid.push_back(c);
      }
    }
  } else {
    for (int factors : {30, 50, 100, 200}) {
      for (int iterations : {30, 50, 100, 150, 200}) {
        for (double lr : {0.0001, 0.001, 0.01}) {
          ModelConfig c;
          c.algorithm = a;
          c.factors = factors;
          c.iterations = iterations;
          c.learning_rate = lr;
          c.seed = seed;
          grid.push_back(c);
        }
      }
    }
  }
  return grid;
}

namespace detail {

void init_factors(std::vector<double>& v, std::size_t count, int factors,
                  Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(factors));
  v.resize(count);
  for (auto& x : v) x = rng.uniform(-bound, bound);
}

double mean_train_score(const TrainedModel& model, const SparseMatrix& data) {
  if (data.n_entries() == 0) return 0.0;
  double sum = 0.0;
  for (const auto& e : data.entries()) {
    sum += ModelAccess::raw_score(model, e.user, e.item);
  }
  return sum / static_cast<double>(data.n_entries());
}

}  // namespace detail

}  // namespace recfair
