#include "recfair.h"

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <variant>

#include <json.hpp>

#include "recfair/bias.hpp"
#include "recfair/dataset.hpp"
#include "recfair/models.hpp"
#include "recfair/rerank.hpp"
#include "recfair/study.hpp"
#include "recfair/version.hpp"

using nlohmann::json;

// Handle bodies. rf_matrix erases the rating/percentile distinction behind
// a kind tag; the C++ core keeps the two types separate.
struct rf_matrix {
  std::variant<recfair::RatingMatrix, recfair::PercentileMatrix> value;

  const recfair::SparseMatrix& data() const {
    return std::visit([](const auto& m) -> const recfair::SparseMatrix& {
      return m.data;
    }, value);
  }
  recfair::InputKind kind() const {
    return std::holds_alternative<recfair::RatingMatrix>(value)
               ? recfair::InputKind::kRatings
               : recfair::InputKind::kPercentiles;
  }
  const recfair::RatingMatrix& ratings() const {
    if (!std::holds_alternative<recfair::RatingMatrix>(value)) {
      throw recfair::data_error("operation needs a rating matrix, got percentiles");
    }
    return std::get<recfair::RatingMatrix>(value);
  }
  recfair::TrainInput train_input() const {
    return std::visit([](const auto& m) { return recfair::TrainInput(m); },
                      value);
  }
  const std::vector<std::string>& user_labels() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& {
      return m.user_labels;
    }, value);
  }
  const std::vector<std::string>& item_labels() const {
    return std::visit([](const auto& m) -> const std::vector<std::string>& {
      return m.item_labels;
    }, value);
  }
};

struct rf_model {
  std::unique_ptr<recfair::TrainedModel> value;
};

struct rf_recs {
  recfair::RecommendationSet value;
};

namespace {

thread_local std::string g_last_error;

rf_status set_error(const std::exception& ex) {
  g_last_error = ex.what();
  if (const auto* e = dynamic_cast<const recfair::Error*>(&ex)) {
    return static_cast<rf_status>(static_cast<int>(e->code()));
  }
  return RF_ERROR_RUN;
}

template <typename Fn>
rf_status guarded(Fn&& fn) {
  try {
    fn();
    return RF_OK;
  } catch (const std::exception& ex) {
    return set_error(ex);
  } catch (...) {
    g_last_error = "unknown error";
    return RF_ERROR_RUN;
  }
}

json parse_json(const char* text, const char* what) {
  if (!text || !*text) return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) {
    throw recfair::config_error(std::string("invalid JSON in ") + what);
  }
  return j;
}

recfair::LoadOptions load_options_from_json(const json& j) {
  recfair::LoadOptions opts;
  if (j.contains("delimiter")) {
    std::string d = j["delimiter"].get<std::string>();
    if (d.size() != 1) {
      throw recfair::config_error("delimiter must be one character");
    }
    opts.delimiter = d[0];
  }
  opts.skip_header = j.value("skip_header", false);
  if (j.contains("scale")) {
    recfair::RatingScale s;
    for (const auto& v : j["scale"]) s.levels.push_back(v.get<double>());
    s.check();
    opts.scale = s;
  }
  return opts;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

void require(bool ok, const char* what) {
  if (!ok) throw recfair::config_error(std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

const char* rf_version(void) { return recfair::kVersion; }

const char* rf_last_error(void) { return g_last_error.c_str(); }

void rf_string_free(char* s) { std::free(s); }

rf_status rf_matrix_load(const char* path, const char* opts_json,
                         rf_matrix** out) {
  return guarded([&]() {
    require(path && out, "rf_matrix_load");
    auto opts = load_options_from_json(parse_json(opts_json, "load options"));
    *out = new rf_matrix{recfair::load_ratings(path, opts)};
  });
}

rf_status rf_matrix_synthetic(const char* params_json, rf_matrix** out) {
  return guarded([&]() {
    require(out, "rf_matrix_synthetic");
    auto spec = recfair::synthetic_spec_from_json(
        parse_json(params_json, "synthetic params"));
    *out = new rf_matrix{recfair::generate_synthetic(spec)};
  });
}

rf_status rf_matrix_save(const rf_matrix* m, const char* path,
                         const char* opts_json) {
  return guarded([&]() {
    require(m && path, "rf_matrix_save");
    json j = parse_json(opts_json, "save options");
    char delim = '\t';
    if (j.contains("delimiter")) {
      std::string d = j["delimiter"].get<std::string>();
      if (d.size() != 1) {
        throw recfair::config_error("delimiter must be one character");
      }
      delim = d[0];
    }
    if (std::holds_alternative<recfair::RatingMatrix>(m->value)) {
      recfair::save_ratings(std::get<recfair::RatingMatrix>(m->value), path,
                            delim);
    } else {
      recfair::save_percentiles(
          std::get<recfair::PercentileMatrix>(m->value), path, delim);
    }
  });
}

rf_status rf_matrix_save_id_maps(const rf_matrix* m, const char* users_path,
                                 const char* items_path) {
  return guarded([&]() {
    require(m && users_path && items_path, "rf_matrix_save_id_maps");
    std::vector<std::string> users = m->user_labels();
    std::vector<std::string> items = m->item_labels();
    if (users.empty()) {
      for (int u = 0; u < m->data().n_users(); ++u) {
        users.push_back(std::to_string(u));
      }
    }
    if (items.empty()) {
      for (int i = 0; i < m->data().n_items(); ++i) {
        items.push_back(std::to_string(i));
      }
    }
    recfair::save_id_map(users, users_path);
    recfair::save_id_map(items, items_path);
  });
}

rf_status rf_matrix_info_get(const rf_matrix* m, rf_matrix_info* out) {
  return guarded([&]() {
    require(m && out, "rf_matrix_info_get");
    out->n_users = m->data().n_users();
    out->n_items = m->data().n_items();
    out->n_entries = static_cast<int64_t>(m->data().n_entries());
    out->kind = m->kind() == recfair::InputKind::kRatings
                    ? RF_MATRIX_RATINGS
                    : RF_MATRIX_PERCENTILES;
  });
}

rf_status rf_matrix_kcore(const rf_matrix* m, int32_t min_user_ratings,
                          int32_t min_item_ratings, rf_matrix** out) {
  return guarded([&]() {
    require(m && out, "rf_matrix_kcore");
    *out = new rf_matrix{
        recfair::filter_kcore(m->ratings(), min_user_ratings, min_item_ratings)};
  });
}

rf_status rf_matrix_split(const rf_matrix* m, double ratio, uint64_t seed,
                          rf_matrix** train, rf_matrix** test) {
  return guarded([&]() {
    require(m && train && test, "rf_matrix_split");
    auto pair = recfair::split_per_user(m->ratings(), ratio, seed);
    *train = new rf_matrix{std::move(pair.train)};
    *test = new rf_matrix{std::move(pair.test)};
  });
}

rf_status rf_matrix_percentile(const rf_matrix* m, rf_matrix** out) {
  return guarded([&]() {
    require(m && out, "rf_matrix_percentile");
    *out = new rf_matrix{recfair::percentile_transform(m->ratings())};
  });
}

rf_status rf_matrix_flip_positivity(const rf_matrix* m, double beta,
                                    rf_matrix** out) {
  return guarded([&]() {
    require(m && out, "rf_matrix_flip_positivity");
    *out = new rf_matrix{recfair::flip_positivity(m->ratings(), beta)};
  });
}

rf_status rf_matrix_diagnose(const rf_matrix* m, const char* out_dir) {
  return guarded([&]() {
    require(m && out_dir, "rf_matrix_diagnose");
    recfair::write_diagnostics(recfair::diagnose(m->ratings()), out_dir);
  });
}

void rf_matrix_free(rf_matrix* m) { delete m; }

rf_status rf_train(const rf_matrix* train, const char* config_json,
                   rf_model** out) {
  return guarded([&]() {
    require(train && out, "rf_train");
    auto cfg = recfair::model_config_from_json(
        parse_json(config_json, "model config"));
    *out = new rf_model{recfair::train(cfg, train->train_input())};
  });
}

rf_status rf_model_save(const rf_model* m, const char* path) {
  return guarded([&]() {
    require(m && path, "rf_model_save");
    recfair::save_model(*m->value, path);
  });
}

rf_status rf_model_load(const char* path, rf_model** out) {
  return guarded([&]() {
    require(path && out, "rf_model_load");
    *out = new rf_model{recfair::load_model(path)};
  });
}

void rf_model_free(rf_model* m) { delete m; }

rf_status rf_recommend(const rf_model* m, int32_t k, int32_t exclude_train,
                       rf_recs** out) {
  return guarded([&]() {
    require(m && out, "rf_recommend");
    *out = new rf_recs{recfair::recommend(*m->value, k, exclude_train != 0)};
  });
}

rf_status rf_recs_save(const rf_recs* r, const char* path) {
  return guarded([&]() {
    require(r && path, "rf_recs_save");
    std::ofstream out(path);
    if (!out) throw recfair::data_error(std::string("cannot write ") + path);
    const auto& recs = r->value;
    char buf[40];
    for (int u = 0; u < recs.n_users; ++u) {
      int rank = 0;
      for (const auto& s : recs.lists[u]) {
        std::snprintf(buf, sizeof(buf), "%.10g", s.score);
        std::string user = recs.user_labels.empty() ? std::to_string(u)
                                                    : recs.user_labels[u];
        std::string item = recs.item_labels.empty()
                               ? std::to_string(s.item)
                               : recs.item_labels[s.item];
        out << user << '\t' << item << '\t' << ++rank << '\t' << buf << '\n';
      }
    }
  });
}

rf_status rf_recs_load(const char* path, const rf_matrix* context,
                       rf_recs** out) {
  return guarded([&]() {
    require(path && context && out, "rf_recs_load");
    std::ifstream in(path);
    if (!in) throw recfair::data_error(std::string("cannot open ") + path);

    const auto& users = context->user_labels();
    const auto& items = context->item_labels();
    std::unordered_map<std::string, int> user_ids;
    std::unordered_map<std::string, int> item_ids;
    for (std::size_t i = 0; i < users.size(); ++i) user_ids[users[i]] = i;
    for (std::size_t i = 0; i < items.size(); ++i) item_ids[items[i]] = i;
    auto to_user = [&](const std::string& s) {
      if (user_ids.empty()) return std::stoi(s);
      auto it = user_ids.find(s);
      if (it == user_ids.end()) {
        throw recfair::data_error("unknown user label: " + s);
      }
      return it->second;
    };
    auto to_item = [&](const std::string& s) {
      if (item_ids.empty()) return std::stoi(s);
      auto it = item_ids.find(s);
      if (it == item_ids.end()) {
        throw recfair::data_error("unknown item label: " + s);
      }
      return it->second;
    };

    recfair::RecommendationSet recs;
    recs.n_users = context->data().n_users();
    recs.n_items = context->data().n_items();
    recs.user_labels = users;
    recs.item_labels = items;
    recs.lists.resize(recs.n_users);
    std::string user, item;
    int rank;
    double score;
    std::size_t line = 0;
    while (in >> user >> item >> rank >> score) {
      ++line;
      int u = to_user(user);
      int i = to_item(item);
      if (u < 0 || u >= recs.n_users || i < 0 || i >= recs.n_items) {
        throw recfair::data_error("recommendation id out of range at line " +
                                  std::to_string(line));
      }
      recs.lists[u].push_back({i, score});
    }
    for (const auto& list : recs.lists) {
      recs.k = std::max<int>(recs.k, static_cast<int>(list.size()));
    }
    *out = new rf_recs{std::move(recs)};
  });
}

void rf_recs_free(rf_recs* r) { delete r; }

rf_status rf_rerank(const rf_recs* initial, const rf_matrix* train,
                    const char* config_json, rf_recs** out,
                    double* runtime_seconds) {
  return guarded([&]() {
    require(initial && train && out, "rf_rerank");
    json j = parse_json(config_json, "reranker config");
    double head_fraction = 0.2;
    if (j.contains("head_fraction")) {
      head_fraction = j["head_fraction"].get<double>();
      j.erase("head_fraction");
    }
    auto cfg = recfair::rerank_config_from_json(j);
    auto seg = recfair::segment_head_tail(train->data(), head_fraction);
    recfair::RerankContext ctx{&seg, &train->data()};
    auto [result, seconds] = recfair::run_timed(initial->value, cfg, ctx);
    if (runtime_seconds) *runtime_seconds = seconds;
    *out = new rf_recs{std::move(result.recs)};
  });
}

rf_status rf_evaluate(const rf_recs* recs, const rf_matrix* test,
                      const rf_matrix* train, const char* opts_json,
                      char** report_json) {
  return guarded([&]() {
    require(recs && test && report_json, "rf_evaluate");
    json j = parse_json(opts_json, "evaluate options");
    recfair::EvalOptions opts;
    if (j.contains("alphas")) {
      opts.alphas.clear();
      for (const auto& a : j["alphas"]) opts.alphas.push_back(a.get<int>());
    }
    recfair::ItemSegmentation seg;
    if (train) {
      seg = recfair::segment_head_tail(train->data(),
                                       j.value("head_fraction", 0.2));
      opts.segmentation = &seg;
    }
    auto report = recfair::evaluate(recs->value, test->data(), opts);
    if (j.contains("labels")) {
      const json& labels = j["labels"];
      report.labels.pipeline = labels.value("pipeline", std::string());
      report.labels.algorithm = labels.value("algorithm", std::string());
      report.labels.input = labels.value("input", std::string());
      report.labels.n = labels.value("N", 0);
    }
    *report_json = dup_string(recfair::metric_report_to_json(report).dump(2));
  });
}

rf_status rf_study_run(const char* config_json, const char* out_dir,
                       int32_t jobs, char** report_json) {
  return guarded([&]() {
    require(config_json && out_dir, "rf_study_run");
    json config = parse_json(config_json, "study config");
    auto report = recfair::run_study(config, out_dir, jobs);
    if (report_json) *report_json = dup_string(report.document.dump(2));
  });
}

}  // extern "C"
