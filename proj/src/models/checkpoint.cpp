#include <cstdint>
#include <fstream>

#include "models_internal.hpp"

namespace recfair {

namespace {

constexpr char kMagic[8] = {'R', 'F', 'M', 'O', 'D', 'E', 'L', '1'};

void put_bytes(std::ostream& out, const void* p, std::size_t n) {
  out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

template <typename T>
void put(std::ostream& out, T v) {
  put_bytes(out, &v, sizeof(v));
}

void put_doubles(std::ostream& out, const std::vector<double>& v) {
  put<std::uint64_t>(out, v.size());
  if (!v.empty()) put_bytes(out, v.data(), v.size() * sizeof(double));
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  put_bytes(out, s.data(), s.size());
}

void put_strings(std::ostream& out, const std::vector<std::string>& v) {
  put<std::uint64_t>(out, v.size());
  for (const auto& s : v) put_string(out, s);
}

void get_bytes(std::istream& in, void* p, std::size_t n) {
  in.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!in) throw data_error("truncated model checkpoint");
}

template <typename T>
T get(std::istream& in) {
  T v;
  get_bytes(in, &v, sizeof(v));
  return v;
}

std::vector<double> get_doubles(std::istream& in) {
  auto n = get<std::uint64_t>(in);
  std::vector<double> v(n);
  if (n) get_bytes(in, v.data(), n * sizeof(double));
  return v;
}

std::string get_string(std::istream& in) {
  auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  if (n) get_bytes(in, s.data(), n);
  return s;
}

std::vector<std::string> get_strings(std::istream& in) {
  auto n = get<std::uint64_t>(in);
  std::vector<std::string> v;
  v.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) v.push_back(get_string(in));
  return v;
}

void put_matrix(std::ostream& out, const SparseMatrix& m) {
  put<std::int32_t>(out, m.n_users());
  put<std::int32_t>(out, m.n_items());
  put<std::uint64_t>(out, m.n_entries());
  for (const auto& e : m.entries()) {
    put<std::int32_t>(out, e.user);
    put<std::int32_t>(out, e.item);
    put<double>(out, e.value);
  }
}

SparseMatrix get_matrix(std::istream& in) {
  int n = get<std::int32_t>(in);
  int m = get<std::int32_t>(in);
  auto count = get<std::uint64_t>(in);
  std::vector<Entry> entries(count);
  for (auto& e : entries) {
    e.user = get<std::int32_t>(in);
    e.item = get<std::int32_t>(in);
    e.value = get<double>(in);
  }
  return SparseMatrix(n, m, std::move(entries));
}

}  // namespace

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write model checkpoint: " + path);
  put_bytes(out, kMagic, sizeof(kMagic));

  auto base = detail::ModelAccess::snapshot_base(model);
  put<std::int32_t>(out, static_cast<std::int32_t>(base.config.algorithm));
  put<std::int32_t>(out, static_cast<std::int32_t>(base.kind));
  put<std::int32_t>(out, base.config.factors);
  put<std::int32_t>(out, base.config.iterations);
  put<std::int32_t>(out, base.config.neighbors);
  put<double>(out, base.config.learning_rate);
  put<double>(out, base.config.regularization);
  put<double>(out, base.config.shrinkage);
  put<double>(out, base.config.confidence_alpha);
  put<std::uint64_t>(out, base.config.seed);
  put<std::int32_t>(out, base.n_users);
  put<std::int32_t>(out, base.n_items);
  put<double>(out, base.global_mean);
  put<double>(out, base.fallback_score);
  put_doubles(out, base.loss_trace);
  put<std::uint64_t>(out, base.rated_items.size());
  for (std::size_t p : base.rated_ptr) put<std::uint64_t>(out, p);
  for (int i : base.rated_items) put<std::int32_t>(out, i);
  put<std::uint64_t>(out, base.item_cold.size());
  put_bytes(out, base.item_cold.data(), base.item_cold.size());
  put_strings(out, base.user_labels);
  put_strings(out, base.item_labels);

  using namespace detail;
  switch (model.algorithm()) {
    case Algorithm::kBiasedMF: {
      const auto& m = static_cast<const BiasedMFModel&>(model);
      put<double>(out, m.mu);
      put_doubles(out, m.user_bias);
      put_doubles(out, m.item_bias);
      put_doubles(out, m.user_factors);
      put_doubles(out, m.item_factors);
      break;
    }
    case Algorithm::kSVDpp: {
      const auto& m = static_cast<const SVDppModel&>(model);
      put<double>(out, m.mu);
      put_doubles(out, m.user_bias);
      put_doubles(out, m.item_bias);
      put_doubles(out, m.user_factors);
      put_doubles(out, m.item_factors);
      put_doubles(out, m.implicit_factors);
      break;
    }
    case Algorithm::kWRMF: {
      const auto& m = static_cast<const WRMFModel&>(model);
      put_doubles(out, m.user_factors);
      put_doubles(out, m.item_factors);
      break;
    }
    case Algorithm::kListRankMF: {
      const auto& m = static_cast<const ListRankModel&>(model);
      put_doubles(out, m.user_factors);
      put_doubles(out, m.item_factors);
      break;
    }
    case Algorithm::kUserKNN: {
      const auto& m = static_cast<const UserKNNModel&>(model);
      put_doubles(out, m.similarity);
      put_doubles(out, m.user_mean);
      put_matrix(out, *m.train);
      break;
    }
    case Algorithm::kItemKNN: {
      const auto& m = static_cast<const ItemKNNModel&>(model);
      put_doubles(out, m.similarity);
      put_doubles(out, m.user_mean);
      put_matrix(out, *m.train);
      break;
    }
  }
}

std::unique_ptr<TrainedModel> load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open model checkpoint: " + path);
  char magic[8];
  get_bytes(in, magic, sizeof(magic));
  if (!std::equal(magic, magic + 8, kMagic)) {
    throw data_error("not a recfair model checkpoint: " + path);
  }

  detail::ModelAccess::BaseState base;
  base.config.algorithm = static_cast<Algorithm>(get<std::int32_t>(in));
  base.kind = static_cast<InputKind>(get<std::int32_t>(in));
  base.config.factors = get<std::int32_t>(in);
  base.config.iterations = get<std::int32_t>(in);
  base.config.neighbors = get<std::int32_t>(in);
  base.config.learning_rate = get<double>(in);
  base.config.regularization = get<double>(in);
  base.config.shrinkage = get<double>(in);
  base.config.confidence_alpha = get<double>(in);
  base.config.seed = get<std::uint64_t>(in);
  base.n_users = get<std::int32_t>(in);
  base.n_items = get<std::int32_t>(in);
  base.global_mean = get<double>(in);
  base.fallback_score = get<double>(in);
  base.loss_trace = get_doubles(in);
  auto rated_count = get<std::uint64_t>(in);
  base.rated_ptr.resize(base.n_users + 1);
  for (auto& p : base.rated_ptr) p = get<std::uint64_t>(in);
  base.rated_items.resize(rated_count);
  for (auto& i : base.rated_items) i = get<std::int32_t>(in);
  auto cold_count = get<std::uint64_t>(in);
  base.item_cold.resize(cold_count);
  get_bytes(in, base.item_cold.data(), cold_count);
  base.user_labels = get_strings(in);
  base.item_labels = get_strings(in);

  using namespace detail;
  std::unique_ptr<TrainedModel> model;
  switch (base.config.algorithm) {
    case Algorithm::kBiasedMF: {
      auto m = std::make_unique<BiasedMFModel>();
      m->mu = get<double>(in);
      m->user_bias = get_doubles(in);
      m->item_bias = get_doubles(in);
      m->user_factors = get_doubles(in);
      m->item_factors = get_doubles(in);
      model = std::move(m);
      break;
    }
    case Algorithm::kSVDpp: {
      auto m = std::make_unique<SVDppModel>();
      m->mu = get<double>(in);
      m->user_bias = get_doubles(in);
      m->item_bias = get_doubles(in);
      m->user_factors = get_doubles(in);
      m->item_factors = get_doubles(in);
      m->implicit_factors = get_doubles(in);
      ModelAccess::restore_base(*m, base);
      m->rebuild_effective();
      model = std::move(m);
      return model;
    }
    case Algorithm::kWRMF: {
      auto m = std::make_unique<WRMFModel>();
      m->user_factors = get_doubles(in);
      m->item_factors = get_doubles(in);
      model = std::move(m);
      break;
    }
    case Algorithm::kListRankMF: {
      auto m = std::make_unique<ListRankModel>();
      m->user_factors = get_doubles(in);
      m->item_factors = get_doubles(in);
      model = std::move(m);
      break;
    }
    case Algorithm::kUserKNN: {
      auto m = std::make_unique<UserKNNModel>();
      m->similarity = get_doubles(in);
      m->user_mean = get_doubles(in);
      m->train = std::make_shared<SparseMatrix>(get_matrix(in));
      model = std::move(m);
      break;
    }
    case Algorithm::kItemKNN: {
      auto m = std::make_unique<ItemKNNModel>();
      m->similarity = get_doubles(in);
      m->user_mean = get_doubles(in);
      m->train = std::make_shared<SparseMatrix>(get_matrix(in));
      model = std::move(m);
      break;
    }
    default:
      throw data_error("unknown algorithm tag in checkpoint");
  }
  detail::ModelAccess::restore_base(*model, std::move(base));
  return model;
}

}  // namespace recfair
