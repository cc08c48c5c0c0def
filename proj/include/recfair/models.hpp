#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "recfair/metrics.hpp"
#include "recfair/types.hpp"

namespace recfair {

namespace detail {
struct ModelAccess;
}

enum class Algorithm {
  kBiasedMF,
  kSVDpp,
  kWRMF,
  kListRankMF,
  kUserKNN,
  kItemKNN,
};

const char* algorithm_name(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

// One bag of knobs for all six algorithms; fields irrelevant to the chosen
// algorithm are ignored but still recorded in reports.
struct ModelConfig {
  Algorithm algorithm = Algorithm::kBiasedMF;
  int factors = 30;
  int iterations = 50;
  double learning_rate = 0.01;
  double regularization = 0.01;
  int neighbors = 50;
  double shrinkage = 100.0;
  double confidence_alpha = 1.0;
  std::uint64_t seed = 0;

  void check() const;
  std::string describe() const;
};

// Immutable once trained; scoring is deterministic and finite. Users or
// items with empty training profiles score at the model's mean predicted
// score (fallbacks are counted).
class TrainedModel {
 public:
  virtual ~TrainedModel() = default;

  Algorithm algorithm() const { return config_.algorithm; }
  const ModelConfig& config() const { return config_; }
  InputKind input_kind() const { return kind_; }
  int n_users() const { return n_users_; }
  int n_items() const { return n_items_; }
  const std::vector<double>& loss_trace() const { return loss_trace_; }
  double fallback_score() const { return fallback_score_; }
  long fallback_count() const { return fallback_count_; }

  double score(int user, int item) const;

  // Training-set items of a user, ascending; drives train exclusion and the
  // SVD++ implicit term.
  std::span<const int> rated_items(int user) const {
    return {rated_items_.data() + rated_ptr_[user],
            rated_items_.data() + rated_ptr_[user + 1]};
  }
  bool user_is_cold(int user) const { return rated_ptr_[user + 1] == rated_ptr_[user]; }
  bool item_is_cold(int item) const { return item_cold_[item] != 0; }

  const std::vector<std::string>& user_labels() const { return user_labels_; }
  const std::vector<std::string>& item_labels() const { return item_labels_; }

 protected:
  virtual double score_impl(int user, int item) const = 0;

  void init_base(const ModelConfig& cfg, const TrainInput& input);

  ModelConfig config_;
  InputKind kind_ = InputKind::kRatings;
  int n_users_ = 0;
  int n_items_ = 0;
  double global_mean_ = 0.0;
  double fallback_score_ = 0.0;
  std::vector<double> loss_trace_;
  std::vector<std::size_t> rated_ptr_;
  std::vector<int> rated_items_;
  std::vector<char> item_cold_;
  std::vector<std::string> user_labels_;
  std::vector<std::string> item_labels_;
  mutable long fallback_count_ = 0;

  friend struct detail::ModelAccess;
};

std::unique_ptr<TrainedModel> train(const ModelConfig& cfg,
                                    const TrainInput& input);

// Top-k unseen items per user, scores non-increasing, ties broken by
// ascending item id. Infeasible k shortens the list and flags the user.
RecommendationSet recommend(const TrainedModel& model, int k,
                            bool exclude_train = true);

// Versioned binary checkpoint: algorithm tag, config, parameter blocks.
void save_model(const TrainedModel& model, const std::string& path);
std::unique_ptr<TrainedModel> load_model(const std::string& path);

// Pulls a metric out of a report by name: "ndcg", "precision", "ee",
// "gini", "ia@1", "lia@2".
double metric_by_name(const MetricReport& report, const std::string& name);

struct GridSearchResult {
  struct Row {
    ModelConfig config;
    MetricReport report;
    bool failed = false;
    std::string error;
  };
  ModelConfig best;
  int best_index = -1;
  std::vector<Row> rows;
};

// Trains and evaluates every config, returns the argmax by objective (ties
// resolve to the earliest grid entry). Single-config failures are recorded
// and skipped.
GridSearchResult grid_search(const std::vector<ModelConfig>& grid,
                             const TrainInput& train_input,
                             const SparseMatrix& test,
                             const std::string& objective, int k,
                             const EvalOptions& eval_opts = {});

// The paper's hyperparameter grids.
std::vector<ModelConfig> paper_grid(Algorithm a, std::uint64_t seed);

namespace gradcheck {

// Flat views of the factor models for analytic-vs-numeric gradient tests.
struct BiasedMFParams {
  std::vector<double> user_bias;      // n
  std::vector<double> item_bias;      // m
  std::vector<double> user_factors;   // n * f, row-major
  std::vector<double> item_factors;   // m * f
  int factors = 0;
};

double biasedmf_objective(const SparseMatrix& data, double mu,
                          const BiasedMFParams& p, double reg);
BiasedMFParams biasedmf_gradient(const SparseMatrix& data, double mu,
                                 const BiasedMFParams& p, double reg);

struct ListRankParams {
  std::vector<double> user_factors;  // n * f
  std::vector<double> item_factors;  // m * f
  int factors = 0;
};

double listrank_objective(const SparseMatrix& data, InputKind kind,
                          const ListRankParams& p, double reg);
ListRankParams listrank_gradient(const SparseMatrix& data, InputKind kind,
                                 const ListRankParams& p, double reg);

// Full confidence-weighted objective over every (user, item) cell.
double wrmf_objective(const SparseMatrix& data, double confidence_alpha,
                      double reg, const std::vector<double>& user_factors,
                      const std::vector<double>& item_factors, int factors);

}  // namespace gradcheck

}  // namespace recfair
