#include <cmath>

#include "models_internal.hpp"
#include "recfair/rng.hpp"

namespace recfair {

namespace gradcheck {

// Per-entry regularized squared error; the SGD steps below are stochastic
// gradients of exactly this objective.
double biasedmf_objective(const SparseMatrix& data, double mu,
                          const BiasedMFParams& p, double reg) {
  const int f = p.factors;
  double loss = 0.0;
  for (const auto& e : data.entries()) {
    const double* pu = &p.user_factors[static_cast<std::size_t>(e.user) * f];
    const double* qi = &p.item_factors[static_cast<std::size_t>(e.item) * f];
    double dot = 0.0;
    double pn = 0.0;
    double qn = 0.0;
    for (int k = 0; k < f; ++k) {
      dot += pu[k] * qi[k];
      pn += pu[k] * pu[k];
      qn += qi[k] * qi[k];
    }
    double err = e.value - (mu + p.user_bias[e.user] + p.item_bias[e.item] + dot);
    loss += 0.5 * err * err;
    loss += 0.5 * reg *
            (p.user_bias[e.user] * p.user_bias[e.user] +
             p.item_bias[e.item] * p.item_bias[e.item] + pn + qn);
  }
  return loss;
}

BiasedMFParams biasedmf_gradient(const SparseMatrix& data, double mu,
                                 const BiasedMFParams& p, double reg) {
  const int f = p.factors;
  BiasedMFParams g;
  g.factors = f;
  g.user_bias.assign(p.user_bias.size(), 0.0);
  g.item_bias.assign(p.item_bias.size(), 0.0);
  g.user_factors.assign(p.user_factors.size(), 0.0);
  g.item_factors.assign(p.item_factors.size(), 0.0);
  for (const auto& e : data.entries()) {
    const std::size_t uo = static_cast<std::size_t>(e.user) * f;
    const std::size_t io = static_cast<std::size_t>(e.item) * f;
    double dot = 0.0;
    for (int k = 0; k < f; ++k) dot += p.user_factors[uo + k] * p.item_factors[io + k];
    double err = e.value - (mu + p.user_bias[e.user] + p.item_bias[e.item] + dot);
    g.user_bias[e.user] += -err + reg * p.user_bias[e.user];
    g.item_bias[e.item] += -err + reg * p.item_bias[e.item];
    for (int k = 0; k < f; ++k) {
      g.user_factors[uo + k] += -err * p.item_factors[io + k] + reg * p.user_factors[uo + k];
      g.item_factors[io + k] += -err * p.user_factors[uo + k] + reg * p.item_factors[io + k];
    }
  }
  return g;
}

}  // namespace gradcheck

namespace detail {

double BiasedMFModel::score_impl(int user, int item) const {
  const int f = config_.factors;
  const double* pu = &user_factors[static_cast<std::size_t>(user) * f];
  const double* qi = &item_factors[static_cast<std::size_t>(item) * f];
  double dot = 0.0;
  for (int k = 0; k < f; ++k) dot += pu[k] * qi[k];
  return mu + user_bias[user] + item_bias[item] + dot;
}

std::unique_ptr<TrainedModel> train_biasedmf(const ModelConfig& cfg,
                                             const TrainInput& input) {
  auto model = std::make_unique<BiasedMFModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int f = cfg.factors;
  const double lr = cfg.learning_rate;
  const double reg = cfg.regularization;
  model->mu = data.global_mean();
  model->user_bias.assign(data.n_users(), 0.0);
  model->item_bias.assign(data.n_items(), 0.0);

  Rng rng(mix_seed(cfg.seed, 0xB1A5u));
  init_factors(model->user_factors, static_cast<std::size_t>(data.n_users()) * f,
               f, rng);
  init_factors(model->item_factors, static_cast<std::size_t>(data.n_items()) * f,
               f, rng);

  std::vector<int> order(data.n_entries());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  auto& trace = ModelAccess::trace(*model);
  const auto& entries = data.entries();
  for (int epoch = 0; epoch < cfg.iterations; ++epoch) {
    rng.shuffle(order);
    for (int idx : order) {
      const Entry& e = entries[idx];
      const std::size_t uo = static_cast<std::size_t>(e.user) * f;
      const std::size_t io = static_cast<std::size_t>(e.item) * f;
      double* pu = &model->user_factors[uo];
      double* qi = &model->item_factors[io];
      double dot = 0.0;
      for (int k = 0; k < f; ++k) dot += pu[k] * qi[k];
      double err = e.value -
                   (model->mu + model->user_bias[e.user] + model->item_bias[e.item] + dot);
      model->user_bias[e.user] += lr * (err - reg * model->user_bias[e.user]);
      model->item_bias[e.item] += lr * (err - reg * model->item_bias[e.item]);
      for (int k = 0; k < f; ++k) {
        double pk = pu[k];
        pu[k] += lr * (err * qi[k] - reg * pk);
        qi[k] += lr * (err * pk - reg * qi[k]);
      }
    }
    gradcheck::BiasedMFParams view{model->user_bias, model->item_bias,
                                   model->user_factors, model->item_factors, f};
    double loss = gradcheck::biasedmf_objective(data, model->mu, view, reg);
    if (!std::isfinite(loss)) {
      throw run_error("BiasedMF diverged at epoch " + std::to_string(epoch) +
                      " (loss not finite); lower the learning rate");
    }
    trace.push_back(loss);
  }

  ModelAccess::set_fallback(*model, mean_train_score(*model, data));
  return model;
}

double SVDppModel::score_impl(int user, int item) const {
  const int f = config_.factors;
  const double* pu = &effective_user[static_cast<std::size_t>(user) * f];
  const double* qi = &item_factors[static_cast<std::size_t>(item) * f];
  double dot = 0.0;
  for (int k = 0; k < f; ++k) dot += pu[k] * qi[k];
  return mu + user_bias[user] + item_bias[item] + dot;
}

void SVDppModel::rebuild_effective() {
  const int f = config_.factors;
  effective_user.assign(user_factors.size(), 0.0);
  for (int u = 0; u < n_users_; ++u) {
    auto rated = rated_items(u);
    const std::size_t uo = static_cast<std::size_t>(u) * f;
    double nf = rated.empty() ? 0.0 : 1.0 / std::sqrt(static_cast<double>(rated.size()));
    for (int k = 0; k < f; ++k) effective_user[uo + k] = user_factors[uo + k];
    for (int j : rated) {
      const std::size_t jo = static_cast<std::size_t>(j) * f;
      for (int k = 0; k < f; ++k) {
        effective_user[uo + k] += nf * implicit_factors[jo + k];
      }
    }
  }
}

std::unique_ptr<TrainedModel> train_svdpp(const ModelConfig& cfg,
                                          const TrainInput& input) {
  auto model = std::make_unique<SVDppModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int f = cfg.factors;
  const double lr = cfg.learning_rate;
  const double reg = cfg.regularization;
  model->mu = data.global_mean();
  model->user_bias.assign(data.n_users(), 0.0);
  model->item_bias.assign(data.n_items(), 0.0);

  Rng rng(mix_seed(cfg.seed, 0x57DDu));
  init_factors(model->user_factors, static_cast<std::size_t>(data.n_users()) * f,
               f, rng);
  init_factors(model->item_factors, static_cast<std::size_t>(data.n_items()) * f,
               f, rng);
  init_factors(model->implicit_factors,
               static_cast<std::size_t>(data.n_items()) * f, f, rng);

  std::vector<int> user_order(data.n_users());
  for (int u = 0; u < data.n_users(); ++u) user_order[u] = u;

  std::vector<double> imp(f);
  std::vector<double> acc(f);
  std::vector<double> p_eff(f);
  std::vector<int> profile_order;

  auto& trace = ModelAccess::trace(*model);
  for (int epoch = 0; epoch < cfg.iterations; ++epoch) {
    rng.shuffle(user_order);
    double sse = 0.0;
    for (int u : user_order) {
      auto cells = data.row(u);
      if (cells.empty()) continue;
      const double nf = 1.0 / std::sqrt(static_cast<double>(cells.size()));
      const std::size_t uo = static_cast<std::size_t>(u) * f;

      std::fill(imp.begin(), imp.end(), 0.0);
      for (const auto& c : cells) {
        const std::size_t jo = static_cast<std::size_t>(c.index) * f;
        for (int k = 0; k < f; ++k) imp[k] += model->implicit_factors[jo + k];
      }

      profile_order.resize(cells.size());
      for (std::size_t i = 0; i < cells.size(); ++i) {
        profile_order[i] = static_cast<int>(i);
      }
      rng.shuffle(profile_order);

      std::fill(acc.begin(), acc.end(), 0.0);
      for (int idx : profile_order) {
        const auto& c = cells[idx];
        const std::size_t io = static_cast<std::size_t>(c.index) * f;
        double* qi = &model->item_factors[io];
        double dot = 0.0;
        for (int k = 0; k < f; ++k) {
          p_eff[k] = model->user_factors[uo + k] + nf * imp[k];
          dot += p_eff[k] * qi[k];
        }
        double err = c.value - (model->mu + model->user_bias[u] +
                                model->item_bias[c.index] + dot);
        sse += err * err;
        model->user_bias[u] += lr * (err - reg * model->user_bias[u]);
        model->item_bias[c.index] += lr * (err - reg * model->item_bias[c.index]);
        for (int k = 0; k < f; ++k) {
          double qk = qi[k];
          qi[k] += lr * (err * p_eff[k] - reg * qk);
          model->user_factors[uo + k] += lr * (err * qk - reg * model->user_factors[uo + k]);
          acc[k] += err * qk;
        }
      }
      for (const auto& c : cells) {
        const std::size_t jo = static_cast<std::size_t>(c.index) * f;
        for (int k = 0; k < f; ++k) {
          model->implicit_factors[jo + k] +=
              lr * (nf * acc[k] - reg * model->implicit_factors[jo + k]);
        }
      }
    }
    if (!std::isfinite(sse)) {
      throw run_error("SVD++ diverged at epoch " + std::to_string(epoch) +
                      " (loss not finite); lower the learning rate");
    }
    trace.push_back(sse);
  }

  model->rebuild_effective();
  ModelAccess::set_fallback(*model, mean_train_score(*model, data));
  return model;
}

}  // namespace detail

}  // namespace recfair
