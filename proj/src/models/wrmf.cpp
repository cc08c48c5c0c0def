#include <Eigen/Dense>
#include <cmath>

#include "models_internal.hpp"
#include "recfair/rng.hpp"

namespace recfair {

namespace gradcheck {

// Full confidence-weighted objective over all n*m cells: observed cells
// carry preference 1 with confidence 1 + alpha*v, unobserved preference 0
// with confidence 1. The dense part collapses to a Gram-matrix identity.
double wrmf_objective(const SparseMatrix& data, double confidence_alpha,
                      double reg, const std::vector<double>& user_factors,
                      const std::vector<double>& item_factors, int factors) {
  using Eigen::MatrixXd;
  Eigen::Map<const MatrixXd> x(user_factors.data(), factors, data.n_users());
  Eigen::Map<const MatrixXd> y(item_factors.data(), factors, data.n_items());

  MatrixXd gram = y * y.transpose();  // f x f
  double dense = 0.0;
  for (int u = 0; u < data.n_users(); ++u) {
    dense += x.col(u).dot(gram * x.col(u));
  }
  double observed = 0.0;
  for (const auto& e : data.entries()) {
    double pred = x.col(e.user).dot(y.col(e.item));
    double c = 1.0 + confidence_alpha * e.value;
    observed += c * (1.0 - pred) * (1.0 - pred) - pred * pred;
  }
  double norms = x.squaredNorm() + y.squaredNorm();
  return dense + observed + reg * norms;
}

}  // namespace gradcheck

namespace detail {

double WRMFModel::score_impl(int user, int item) const {
  const int f = config_.factors;
  const double* xu = &user_factors[static_cast<std::size_t>(user) * f];
  const double* yi = &item_factors[static_cast<std::size_t>(item) * f];
  double dot = 0.0;
  for (int k = 0; k < f; ++k) dot += xu[k] * yi[k];
  return dot;
}

namespace {

// One ALS half-step: rebuilds the `target` side against the fixed side.
// rows(i) must yield the cells of unit i on the target side.
template <typename RowsFn>
void als_half_step(Eigen::Map<Eigen::MatrixXd> target,
                   Eigen::Map<const Eigen::MatrixXd> fixed, int n_target,
                   double alpha, double reg, RowsFn rows) {
  const int f = static_cast<int>(target.rows());
  Eigen::MatrixXd gram =
      fixed * fixed.transpose() + reg * Eigen::MatrixXd::Identity(f, f);
  Eigen::MatrixXd a(f, f);
  Eigen::VectorXd b(f);
  for (int t = 0; t < n_target; ++t) {
    a = gram;
    b.setZero();
    for (const auto& c : rows(t)) {
      double cw = 1.0 + alpha * c.value;
      a.noalias() += (cw - 1.0) * fixed.col(c.index) * fixed.col(c.index).transpose();
      b.noalias() += cw * fixed.col(c.index);
    }
    target.col(t) = a.llt().solve(b);
  }
}

}  // namespace

std::unique_ptr<TrainedModel> train_wrmf(const ModelConfig& cfg,
                                         const TrainInput& input) {
  auto model = std::make_unique<WRMFModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int f = cfg.factors;
  const double alpha = cfg.confidence_alpha;
  const double reg = cfg.regularization;

  Rng rng(mix_seed(cfg.seed, 0x3A15u));
  init_factors(model->user_factors, static_cast<std::size_t>(data.n_users()) * f,
               f, rng);
  init_factors(model->item_factors, static_cast<std::size_t>(data.n_items()) * f,
               f, rng);

  Eigen::Map<Eigen::MatrixXd> x(model->user_factors.data(), f, data.n_users());
  Eigen::Map<Eigen::MatrixXd> y(model->item_factors.data(), f, data.n_items());
  Eigen::Map<const Eigen::MatrixXd> xc(model->user_factors.data(), f,
                                       data.n_users());
  Eigen::Map<const Eigen::MatrixXd> yc(model->item_factors.data(), f,
                                       data.n_items());

  auto objective = [&]() {
    return gradcheck::wrmf_objective(data, alpha, reg, model->user_factors,
                                     model->item_factors, f);
  };

  auto& trace = ModelAccess::trace(*model);
  trace.push_back(objective());
  for (int it = 0; it < cfg.iterations; ++it) {
    als_half_step(x, yc, data.n_users(), alpha, reg,
                  [&data](int u) { return data.row(u); });
    trace.push_back(objective());
    als_half_step(y, xc, data.n_items(), alpha, reg,
                  [&data](int i) { return data.col(i); });
    trace.push_back(objective());
    if (!std::isfinite(trace.back())) {
      throw run_error("WRMF objective not finite at iteration " +
                      std::to_string(it));
    }
  }

  ModelAccess::set_fallback(*model, mean_train_score(*model, data));
  return model;
}

}  // namespace detail

}  // namespace recfair
