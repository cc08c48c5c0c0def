#include <algorithm>
#include <cmath>

#include "models_internal.hpp"
#include "recfair/rng.hpp"

namespace recfair {

namespace gradcheck {

namespace {

// Percentile inputs are scaled into [0,1] before the softmax so exponents
// stay bounded; raw ratings are used as-is.
double target_value(double v, InputKind kind) {
  return kind == InputKind::kPercentiles ? v / 100.0 : v;
}

// Softmax over a user's profile values (observed or predicted), stabilized
// by max subtraction.
void softmax_inplace(std::vector<double>& v) {
  double mx = *std::max_element(v.begin(), v.end());
  double sum = 0.0;
  for (auto& x : v) {
    x = std::exp(x - mx);
    sum += x;
  }
  for (auto& x : v) x /= sum;
}

}  // namespace

double listrank_objective(const SparseMatrix& data, InputKind kind,
                          const ListRankParams& p, double reg) {
  const int f = p.factors;
  double loss = 0.0;
  std::vector<double> target;
  std::vector<double> predicted;
  for (int u = 0; u < data.n_users(); ++u) {
    auto cells = data.row(u);
    if (cells.empty()) continue;
    target.resize(cells.size());
    predicted.resize(cells.size());
    const double* pu = &p.user_factors[static_cast<std::size_t>(u) * f];
    for (std::size_t j = 0; j < cells.size(); ++j) {
      target[j] = target_value(cells[j].value, kind);
      const double* qi = &p.item_factors[static_cast<std::size_t>(cells[j].index) * f];
      double dot = 0.0;
      for (int k = 0; k < f; ++k) dot += pu[k] * qi[k];
      predicted[j] = dot;
    }
    softmax_inplace(target);
    softmax_inplace(predicted);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      loss -= target[j] * std::log(predicted[j]);
    }
  }
  double norms = 0.0;
  for (double v : p.user_factors) norms += v * v;
  for (double v : p.item_factors) norms += v * v;
  return loss + 0.5 * reg * norms;
}

ListRankParams listrank_gradient(const SparseMatrix& data, InputKind kind,
                                 const ListRankParams& p, double reg) {
  const int f = p.factors;
  ListRankParams g;
  g.factors = f;
  g.user_factors.assign(p.user_factors.size(), 0.0);
  g.item_factors.assign(p.item_factors.size(), 0.0);
  std::vector<double> target;
  std::vector<double> predicted;
  for (int u = 0; u < data.n_users(); ++u) {
    auto cells = data.row(u);
    if (cells.empty()) continue;
    target.resize(cells.size());
    predicted.resize(cells.size());
    const std::size_t uo = static_cast<std::size_t>(u) * f;
    for (std::size_t j = 0; j < cells.size(); ++j) {
      target[j] = target_value(cells[j].value, kind);
      const double* qi = &p.item_factors[static_cast<std::size_t>(cells[j].index) * f];
      double dot = 0.0;
      for (int k = 0; k < f; ++k) dot += p.user_factors[uo + k] * qi[k];
      predicted[j] = dot;
    }
    softmax_inplace(target);
    softmax_inplace(predicted);
    // d loss / d score_j = predicted_j - target_j
    for (std::size_t j = 0; j < cells.size(); ++j) {
      double delta = predicted[j] - target[j];
      const std::size_t io = static_cast<std::size_t>(cells[j].index) * f;
      for (int k = 0; k < f; ++k) {
        g.user_factors[uo + k] += delta * p.item_factors[io + k];
        g.item_factors[io + k] += delta * p.user_factors[uo + k];
      }
    }
  }
  for (std::size_t k = 0; k < p.user_factors.size(); ++k) {
    g.user_factors[k] += reg * p.user_factors[k];
  }
  for (std::size_t k = 0; k < p.item_factors.size(); ++k) {
    g.item_factors[k] += reg * p.item_factors[k];
  }
  return g;
}

}  // namespace gradcheck

namespace detail {

double ListRankModel::score_impl(int user, int item) const {
  const int f = config_.factors;
  const double* pu = &user_factors[static_cast<std::size_t>(user) * f];
  const double* qi = &item_factors[static_cast<std::size_t>(item) * f];
  double dot = 0.0;
  for (int k = 0; k < f; ++k) dot += pu[k] * qi[k];
  return dot;
}

std::unique_ptr<TrainedModel> train_listrank(const ModelConfig& cfg,
                                             const TrainInput& input) {
  auto model = std::make_unique<ListRankModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int f = cfg.factors;

  Rng rng(mix_seed(cfg.seed, 0x115Au));
  init_factors(model->user_factors, static_cast<std::size_t>(data.n_users()) * f,
               f, rng);
  init_factors(model->item_factors, static_cast<std::size_t>(data.n_items()) * f,
               f, rng);

  gradcheck::ListRankParams params;
  params.factors = f;
  params.user_factors = std::move(model->user_factors);
  params.item_factors = std::move(model->item_factors);

  auto& trace = ModelAccess::trace(*model);
  for (int epoch = 0; epoch < cfg.iterations; ++epoch) {
    auto grad = gradcheck::listrank_gradient(data, input.kind, params,
                                             cfg.regularization);
    for (std::size_t k = 0; k < params.user_factors.size(); ++k) {
      params.user_factors[k] -= cfg.learning_rate * grad.user_factors[k];
    }
    for (std::size_t k = 0; k < params.item_factors.size(); ++k) {
      params.item_factors[k] -= cfg.learning_rate * grad.item_factors[k];
    }
    double loss = gradcheck::listrank_objective(data, input.kind, params,
                                                cfg.regularization);
    if (!std::isfinite(loss)) {
      throw run_error("ListRankMF diverged at epoch " + std::to_string(epoch) +
                      " (loss not finite); lower the learning rate");
    }
    trace.push_back(loss);
  }

  model->user_factors = std::move(params.user_factors);
  model->item_factors = std::move(params.item_factors);
  ModelAccess::set_fallback(*model, mean_train_score(*model, data));
  return model;
}

}  // namespace detail

}  // namespace recfair
