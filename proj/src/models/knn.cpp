#include <algorithm>
#include <cmath>

#include "models_internal.hpp"

namespace recfair {

namespace detail {

namespace {

struct Neighbor {
  double sim;
  int id;
  double value;
};

// Deterministic neighborhood order: similarity descending, id ascending.
bool neighbor_order(const Neighbor& a, const Neighbor& b) {
  return a.sim != b.sim ? a.sim > b.sim : a.id < b.id;
}

std::vector<double> compute_user_means(const SparseMatrix& data) {
  std::vector<double> mean(data.n_users(), 0.0);
  for (int u = 0; u < data.n_users(); ++u) {
    auto cells = data.row(u);
    if (cells.empty()) continue;
    double sum = 0.0;
    for (const auto& c : cells) sum += c.value;
    mean[u] = sum / static_cast<double>(cells.size());
  }
  return mean;
}

double shrink(double raw, long overlap, double shrinkage) {
  return raw * static_cast<double>(overlap) /
         (static_cast<double>(overlap) + shrinkage);
}

}  // namespace

double UserKNNModel::score_impl(int user, int item) const {
  const SparseMatrix& data = *train;
  const double* sim_row = &similarity[static_cast<std::size_t>(user) * n_users_];
  std::vector<Neighbor> candidates;
  for (const auto& c : data.col(item)) {
    if (c.index == user) continue;
    double s = sim_row[c.index];
    if (s > 0.0) candidates.push_back({s, c.index, c.value});
  }
  if (candidates.empty()) return user_mean[user];
  int k = std::min<int>(config_.neighbors, static_cast<int>(candidates.size()));
  std::partial_sort(candidates.begin(), candidates.begin() + k,
                    candidates.end(), neighbor_order);
  double num = 0.0;
  double den = 0.0;
  for (int j = 0; j < k; ++j) {
    num += candidates[j].sim * (candidates[j].value - user_mean[candidates[j].id]);
    den += std::abs(candidates[j].sim);
  }
  return den == 0.0 ? user_mean[user] : user_mean[user] + num / den;
}

std::unique_ptr<TrainedModel> train_userknn(const ModelConfig& cfg,
                                            const TrainInput& input) {
  auto model = std::make_unique<UserKNNModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int n = data.n_users();
  model->train = std::make_shared<SparseMatrix>(data);
  model->user_mean = compute_user_means(data);
  model->similarity.assign(static_cast<std::size_t>(n) * n, 0.0);

  // Pearson over co-rated items, accumulated row by row so memory stays
  // O(n) per user instead of O(n^2) pair state.
  std::vector<long> overlap(n);
  std::vector<double> sx(n), sy(n), sxy(n), sxx(n), syy(n);
  std::vector<int> touched;
  for (int a = 0; a < n; ++a) {
    std::fill(overlap.begin(), overlap.end(), 0L);
    touched.clear();
    for (const auto& ic : data.row(a)) {
      for (const auto& uc : data.col(ic.index)) {
        int b = uc.index;
        if (b <= a) continue;  // symmetric; fill the upper triangle
        if (overlap[b] == 0) {
          sx[b] = sy[b] = sxy[b] = sxx[b] = syy[b] = 0.0;
          touched.push_back(b);
        }
        ++overlap[b];
        sx[b] += ic.value;
        sy[b] += uc.value;
        sxy[b] += ic.value * uc.value;
        sxx[b] += ic.value * ic.value;
        syy[b] += uc.value * uc.value;
      }
    }
    for (int b : touched) {
      long c = overlap[b];
      if (c < 2) continue;
      double cov = sxy[b] - sx[b] * sy[b] / c;
      double varx = sxx[b] - sx[b] * sx[b] / c;
      double vary = syy[b] - sy[b] * sy[b] / c;
      if (varx <= 0.0 || vary <= 0.0) continue;
      double pearson = cov / std::sqrt(varx * vary);
      double s = shrink(pearson, c, cfg.shrinkage);
      model->similarity[static_cast<std::size_t>(a) * n + b] = s;
      model->similarity[static_cast<std::size_t>(b) * n + a] = s;
    }
  }

  ModelAccess::set_fallback(*model, data.global_mean());
  return model;
}

double ItemKNNModel::score_impl(int user, int item) const {
  const SparseMatrix& data = *train;
  const double* sim_row = &similarity[static_cast<std::size_t>(item) * n_items_];
  std::vector<Neighbor> candidates;
  for (const auto& c : data.row(user)) {
    if (c.index == item) continue;
    double s = sim_row[c.index];
    if (s > 0.0) candidates.push_back({s, c.index, c.value});
  }
  if (candidates.empty()) return user_mean[user];
  int k = std::min<int>(config_.neighbors, static_cast<int>(candidates.size()));
  std::partial_sort(candidates.begin(), candidates.begin() + k,
                    candidates.end(), neighbor_order);
  double num = 0.0;
  double den = 0.0;
  for (int j = 0; j < k; ++j) {
    num += candidates[j].sim * candidates[j].value;
    den += std::abs(candidates[j].sim);
  }
  return den == 0.0 ? user_mean[user] : num / den;
}

std::unique_ptr<TrainedModel> train_itemknn(const ModelConfig& cfg,
                                            const TrainInput& input) {
  auto model = std::make_unique<ItemKNNModel>();
  ModelAccess::init_base(*model, cfg, input);
  const SparseMatrix& data = *input.data;
  const int m = data.n_items();
  model->train = std::make_shared<SparseMatrix>(data);
  model->user_mean = compute_user_means(data);
  model->similarity.assign(static_cast<std::size_t>(m) * m, 0.0);

  std::vector<double> norm(m, 0.0);
  for (int i = 0; i < m; ++i) {
    for (const auto& c : data.col(i)) norm[i] += c.value * c.value;
    norm[i] = std::sqrt(norm[i]);
  }

  // Cosine of item columns over co-raters, same row-by-row accumulation.
  std::vector<long> overlap(m);
  std::vector<double> dot(m);
  std::vector<int> touched;
  for (int a = 0; a < m; ++a) {
    std::fill(overlap.begin(), overlap.end(), 0L);
    touched.clear();
    for (const auto& uc : data.col(a)) {
      for (const auto& ic : data.row(uc.index)) {
        int b = ic.index;
        if (b <= a) continue;
        if (overlap[b] == 0) {
          dot[b] = 0.0;
          touched.push_back(b);
        }
        ++overlap[b];
        dot[b] += uc.value * ic.value;
      }
    }
    for (int b : touched) {
      if (norm[a] == 0.0 || norm[b] == 0.0) continue;
      double cosine = dot[b] / (norm[a] * norm[b]);
      double s = shrink(cosine, overlap[b], cfg.shrinkage);
      model->similarity[static_cast<std::size_t>(a) * m + b] = s;
      model->similarity[static_cast<std::size_t>(b) * m + a] = s;
    }
  }

  ModelAccess::set_fallback(*model, data.global_mean());
  return model;
}

}  // namespace detail

}  // namespace recfair
