#pragma once

#include <memory>
#include <vector>

#include "recfair/models.hpp"
#include "recfair/rng.hpp"

namespace recfair::detail {

class BiasedMFModel : public TrainedModel {
 public:
  double mu = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;  // n * f
  std::vector<double> item_factors;  // m * f

 protected:
  double score_impl(int user, int item) const override;
};

class SVDppModel : public TrainedModel {
 public:
  double mu = 0.0;
  std::vector<double> user_bias;
  std::vector<double> item_bias;
  std::vector<double> user_factors;      // p_u
  std::vector<double> item_factors;      // q_i
  std::vector<double> implicit_factors;  // y_j
  std::vector<double> effective_user;    // p_u + |N(u)|^-1/2 sum y_j

  void rebuild_effective();

 protected:
  double score_impl(int user, int item) const override;
};

class WRMFModel : public TrainedModel {
 public:
  std::vector<double> user_factors;
  std::vector<double> item_factors;

 protected:
  double score_impl(int user, int item) const override;
};

class ListRankModel : public TrainedModel {
 public:
  std::vector<double> user_factors;
  std::vector<double> item_factors;

 protected:
  double score_impl(int user, int item) const override;
};

class UserKNNModel : public TrainedModel {
 public:
  std::vector<double> similarity;  // n x n, shrunk Pearson, diagonal 0
  std::vector<double> user_mean;
  std::shared_ptr<const SparseMatrix> train;

 protected:
  double score_impl(int user, int item) const override;
};

class ItemKNNModel : public TrainedModel {
 public:
  std::vector<double> similarity;  // m x m, shrunk cosine, diagonal 0
  std::vector<double> user_mean;
  std::shared_ptr<const SparseMatrix> train;

 protected:
  double score_impl(int user, int item) const override;
};

std::unique_ptr<TrainedModel> train_biasedmf(const ModelConfig&,
                                             const TrainInput&);
std::unique_ptr<TrainedModel> train_svdpp(const ModelConfig&,
                                          const TrainInput&);
std::unique_ptr<TrainedModel> train_wrmf(const ModelConfig&,
                                         const TrainInput&);
std::unique_ptr<TrainedModel> train_listrank(const ModelConfig&,
                                             const TrainInput&);
std::unique_ptr<TrainedModel> train_userknn(const ModelConfig&,
                                            const TrainInput&);
std::unique_ptr<TrainedModel> train_itemknn(const ModelConfig&,
                                            const TrainInput&);

// Construction-time access to the immutable base; trainers and the
// checkpoint reader go through here.
struct ModelAccess {
  static void init_base(TrainedModel& m, const ModelConfig& cfg,
                        const TrainInput& input) {
    m.init_base(cfg, input);
  }
  static void set_fallback(TrainedModel& m, double v) { m.fallback_score_ = v; }
  static void set_global_mean(TrainedModel& m, double v) { m.global_mean_ = v; }
  static double global_mean(const TrainedModel& m) { return m.global_mean_; }
  static std::vector<double>& trace(TrainedModel& m) { return m.loss_trace_; }
  static double raw_score(const TrainedModel& m, int u, int i) {
    return m.score_impl(u, i);
  }

  // Direct base restore for the checkpoint reader.
  struct BaseState {
    ModelConfig config;
    InputKind kind;
    int n_users;
    int n_items;
    double global_mean;
    double fallback_score;
    std::vector<double> loss_trace;
    std::vector<std::size_t> rated_ptr;
    std::vector<int> rated_items;
    std::vector<char> item_cold;
    std::vector<std::string> user_labels;
    std::vector<std::string> item_labels;
  };
  static void restore_base(TrainedModel& m, BaseState s) {
    m.config_ = s.config;
    m.kind_ = s.kind;
    m.n_users_ = s.n_users;
    m.n_items_ = s.n_items;
    m.global_mean_ = s.global_mean;
    m.fallback_score_ = s.fallback_score;
    m.loss_trace_ = std::move(s.loss_trace);
    m.rated_ptr_ = std::move(s.rated_ptr);
    m.rated_items_ = std::move(s.rated_items);
    m.item_cold_ = std::move(s.item_cold);
    m.user_labels_ = std::move(s.user_labels);
    m.item_labels_ = std::move(s.item_labels);
  }
  static BaseState snapshot_base(const TrainedModel& m) {
    return BaseState{m.config_,     m.kind_,        m.n_users_,
                     m.n_items_,    m.global_mean_, m.fallback_score_,
                     m.loss_trace_, m.rated_ptr_,   m.rated_items_,
                     m.item_cold_,  m.user_labels_, m.item_labels_};
  }
};

// Uniform init in [-1/sqrt(f), 1/sqrt(f)], consuming the run-seeded rng.
void init_factors(std::vector<double>& v, std::size_t count, int factors,
                  class Rng& rng);

// Mean predicted score over the observed training cells (used as the
// cold-profile fallback for the factor models).
double mean_train_score(const TrainedModel& model, const SparseMatrix& data);

}  // namespace recfair::detail
