// recfair command line. Talks to the core exclusively through the C API in
// recfair.h; every subcommand maps onto one or two library calls.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "recfair.h"

using nlohmann::json;

namespace {

int fail(rf_status status) {
  std::cerr << "error: " << rf_last_error() << "\n";
  return static_cast<int>(status);
}

struct MatrixHandle {
  rf_matrix* m = nullptr;
  ~MatrixHandle() { rf_matrix_free(m); }
};

struct ModelHandle {
  rf_model* m = nullptr;
  ~ModelHandle() { rf_model_free(m); }
};

struct RecsHandle {
  rf_recs* r = nullptr;
  ~RecsHandle() { rf_recs_free(r); }
};

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    std::cerr << "error: cannot open " << path << "\n";
    std::exit(1);
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json load_config(const std::string& path) {
  json j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded()) {
    std::cerr << "error: " << path << " is not valid JSON\n";
    std::exit(1);
  }
  return j;
}

struct CommonOpts {
  std::string delimiter = "\t";
  bool header = false;
  int verbosity = 1;  // 0 quiet, 1 normal, 2 debug
};

json load_opts_json(const CommonOpts& o) {
  return json{{"delimiter", o.delimiter}, {"skip_header", o.header}};
}

void log_info(const CommonOpts& o, const std::string& msg) {
  if (o.verbosity >= 1) std::cerr << msg << "\n";
}

rf_status open_matrix(const std::string& path, const CommonOpts& o,
                      MatrixHandle& h) {
  return rf_matrix_load(path.c_str(), load_opts_json(o).dump().c_str(), &h.m);
}

void describe(const CommonOpts& o, const char* what, rf_matrix* m) {
  rf_matrix_info info;
  if (rf_matrix_info_get(m, &info) == RF_OK) {
    std::ostringstream ss;
    ss << what << ": " << info.n_users << " users, " << info.n_items
       << " items, " << info.n_entries << " ratings";
    log_info(o, ss.str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"recfair: multifactorial-bias diagnostics, percentile "
               "transformation, recommenders, fairness metrics, rerankers"};
  app.require_subcommand(1);

  CommonOpts common;
  std::string log_level = "info";
  app.add_option("--log-level", log_level, "quiet|info|debug")
      ->capture_default_str();

  auto apply_log_level = [&]() {
    if (log_level == "quiet") common.verbosity = 0;
    else if (log_level == "debug") common.verbosity = 2;
    else common.verbosity = 1;
  };

  // ingest ---------------------------------------------------------------
  auto* ingest = app.add_subcommand(
      "ingest", "Load a ratings file, optionally k-core filter and split");
  std::string in_path, out_dir = ".";
  int min_user = 0, min_item = 0;
  double split_ratio = 0.0;
  std::uint64_t seed = 42;
  ingest->add_option("input", in_path, "ratings file")->required();
  ingest->add_option("--out", out_dir, "output directory");
  ingest->add_option("--delimiter", common.delimiter, "field delimiter");
  ingest->add_flag("--header", common.header, "skip the first line");
  ingest->add_option("--min-user-ratings", min_user, "k-core user threshold");
  ingest->add_option("--min-item-ratings", min_item, "k-core item threshold");
  ingest->add_option("--split", split_ratio, "write train/test split with this ratio");
  ingest->add_option("--seed", seed, "split seed");

  // diagnose ---------------------------------------------------------------
  auto* diagnose = app.add_subcommand(
      "diagnose", "Emit lorenz.csv, rating_hist.csv, item_stats.csv");
  diagnose->add_option("input", in_path, "ratings file")->required();
  diagnose->add_option("--out", out_dir, "output directory");
  diagnose->add_option("--delimiter", common.delimiter, "field delimiter");
  diagnose->add_flag("--header", common.header, "skip the first line");

  // transform ----------------------------------------------------------------
  auto* transform = app.add_subcommand(
      "transform", "Percentile transform or positivity flip");
  std::string transform_kind = "percentile";
  std::string transform_out = "transformed.tsv";
  double beta = 0.1;
  transform->add_option("input", in_path, "ratings file")->required();
  transform->add_option("--kind", transform_kind, "percentile|flip");
  transform->add_option("--beta", beta, "flip fraction of most popular items");
  transform->add_option("--out", transform_out, "output file");
  transform->add_option("--delimiter", common.delimiter, "field delimiter");
  transform->add_flag("--header", common.header, "skip the first line");

  // synth ----------------------------------------------------------------
  auto* synth = app.add_subcommand(
      "synth", "Generate the synthetic multifactorial fixture");
  std::string synth_params = "{}";
  std::string synth_out = "synthetic.tsv";
  synth->add_option("--params", synth_params, "JSON synthetic spec");
  synth->add_option("--out", synth_out, "output file");

  // train ----------------------------------------------------------------
  auto* train_cmd = app.add_subcommand("train", "Train a model checkpoint");
  std::string config_path, model_path = "model.rfm";
  train_cmd->add_option("input", in_path, "training ratings file")->required();
  train_cmd->add_option("--config", config_path, "model config JSON")->required();
  train_cmd->add_option("--out", model_path, "checkpoint path");
  train_cmd->add_option("--delimiter", common.delimiter, "field delimiter");
  train_cmd->add_flag("--header", common.header, "skip the first line");
  train_cmd->add_option("--seed", seed, "training seed override");

  // recommend --------------------------------------------------------------
  auto* recommend_cmd =
      app.add_subcommand("recommend", "Emit top-K lists from a checkpoint");
  int k = 10;
  bool include_train = false;
  std::string recs_path = "recs.tsv";
  recommend_cmd->add_option("model", model_path, "checkpoint path")->required();
  recommend_cmd->add_option("-K,--list-size", k, "list length");
  recommend_cmd->add_flag("--include-train", include_train,
                          "allow items the user already rated");
  recommend_cmd->add_option("--out", recs_path, "output lists file");

  // rerank ------------------------------------------------------------------
  auto* rerank_cmd = app.add_subcommand(
      "rerank", "Rerank initial lists with one of the six methods");
  std::string train_path;
  std::string rerank_out = "reranked.tsv";
  rerank_cmd->add_option("initial", recs_path, "initial lists file")->required();
  rerank_cmd->add_option("--train", train_path, "training ratings file")
      ->required();
  rerank_cmd->add_option("--config", config_path, "reranker config JSON")
      ->required();
  rerank_cmd->add_option("--out", rerank_out, "output lists file");
  rerank_cmd->add_option("--delimiter", common.delimiter, "field delimiter");
  rerank_cmd->add_flag("--header", common.header, "skip the first line");

  // evaluate ----------------------------------------------------------------
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "Score lists against held-out test data");
  std::string test_path, alphas = "1";
  evaluate_cmd->add_option("recs", recs_path, "lists file")->required();
  evaluate_cmd->add_option("--test", test_path, "test ratings file")->required();
  evaluate_cmd->add_option("--train", train_path,
                           "training ratings file (enables LIA)");
  evaluate_cmd->add_option("--alphas", alphas, "comma-separated alpha list");
  evaluate_cmd->add_option("--delimiter", common.delimiter, "field delimiter");
  evaluate_cmd->add_flag("--header", common.header, "skip the first line");

  // simulate / study ---------------------------------------------------------
  auto* simulate = app.add_subcommand(
      "simulate", "Run the positivity-flip simulation sweep from a config");
  int jobs = 1;
  simulate->add_option("--config", config_path, "study config JSON")->required();
  simulate->add_option("--out", out_dir, "output directory")->required();
  simulate->add_option("--jobs", jobs, "parallel study cells");
  simulate->add_option("--seed", seed, "split seed override");

  auto* study = app.add_subcommand(
      "study", "Run a simulation/comparison/reranker study from a config");
  study->add_option("--config", config_path, "study config JSON")->required();
  study->add_option("--out", out_dir, "output directory")->required();
  study->add_option("--jobs", jobs, "parallel study cells");
  study->add_option("--seed", seed, "split seed override");

  CLI11_PARSE(app, argc, argv);
  apply_log_level();

  if (ingest->parsed()) {
    MatrixHandle m;
    if (auto s = open_matrix(in_path, common, m); s != RF_OK) return fail(s);
    describe(common, "loaded", m.m);
    if (min_user > 0 || min_item > 0) {
      MatrixHandle filtered;
      if (auto s = rf_matrix_kcore(m.m, std::max(1, min_user),
                                   std::max(1, min_item), &filtered.m);
          s != RF_OK) {
        return fail(s);
      }
      std::swap(m.m, filtered.m);
      describe(common, "after k-core", m.m);
    }
    std::string base = out_dir + "/ratings.tsv";
    if (auto s = rf_matrix_save(m.m, base.c_str(), nullptr); s != RF_OK) {
      return fail(s);
    }
    if (auto s = rf_matrix_save_id_maps(m.m, (out_dir + "/users.map").c_str(),
                                        (out_dir + "/items.map").c_str());
        s != RF_OK) {
      return fail(s);
    }
    if (split_ratio > 0.0) {
      MatrixHandle train, test;
      if (auto s = rf_matrix_split(m.m, split_ratio, seed, &train.m, &test.m);
          s != RF_OK) {
        return fail(s);
      }
      if (auto s = rf_matrix_save(train.m, (out_dir + "/train.tsv").c_str(),
                                  nullptr);
          s != RF_OK) {
        return fail(s);
      }
      if (auto s = rf_matrix_save(test.m, (out_dir + "/test.tsv").c_str(),
                                  nullptr);
          s != RF_OK) {
        return fail(s);
      }
      log_info(common, "wrote train.tsv and test.tsv");
    }
    return 0;
  }

  if (diagnose->parsed()) {
    MatrixHandle m;
    if (auto s = open_matrix(in_path, common, m); s != RF_OK) return fail(s);
    if (auto s = rf_matrix_diagnose(m.m, out_dir.c_str()); s != RF_OK) {
      return fail(s);
    }
    log_info(common, "wrote lorenz.csv, rating_hist.csv, item_stats.csv");
    return 0;
  }

  if (transform->parsed()) {
    MatrixHandle m;
    if (auto s = open_matrix(in_path, common, m); s != RF_OK) return fail(s);
    MatrixHandle result;
    if (transform_kind == "percentile") {
      if (auto s = rf_matrix_percentile(m.m, &result.m); s != RF_OK) {
        return fail(s);
      }
    } else if (transform_kind == "flip") {
      if (auto s = rf_matrix_flip_positivity(m.m, beta, &result.m); s != RF_OK) {
        return fail(s);
      }
    } else {
      std::cerr << "error: --kind must be percentile or flip\n";
      return 1;
    }
    if (auto s = rf_matrix_save(result.m, transform_out.c_str(), nullptr);
        s != RF_OK) {
      return fail(s);
    }
    return 0;
  }

  if (synth->parsed()) {
    MatrixHandle m;
    if (auto s = rf_matrix_synthetic(synth_params.c_str(), &m.m); s != RF_OK) {
      return fail(s);
    }
    describe(common, "generated", m.m);
    if (auto s = rf_matrix_save(m.m, synth_out.c_str(), nullptr); s != RF_OK) {
      return fail(s);
    }
    return 0;
  }

  if (train_cmd->parsed()) {
    MatrixHandle m;
    if (auto s = open_matrix(in_path, common, m); s != RF_OK) return fail(s);
    json cfg = load_config(config_path);
    if (train_cmd->count("--seed")) cfg["seed"] = seed;
    ModelHandle model;
    if (auto s = rf_train(m.m, cfg.dump().c_str(), &model.m); s != RF_OK) {
      return fail(s);
    }
    if (auto s = rf_model_save(model.m, model_path.c_str()); s != RF_OK) {
      return fail(s);
    }
    log_info(common, "wrote " + model_path);
    return 0;
  }

  if (recommend_cmd->parsed()) {
    ModelHandle model;
    if (auto s = rf_model_load(model_path.c_str(), &model.m); s != RF_OK) {
      return fail(s);
    }
    RecsHandle recs;
    if (auto s = rf_recommend(model.m, k, include_train ? 0 : 1, &recs.r);
        s != RF_OK) {
      return fail(s);
    }
    if (auto s = rf_recs_save(recs.r, recs_path.c_str()); s != RF_OK) {
      return fail(s);
    }
    log_info(common, "wrote " + recs_path);
    return 0;
  }

  if (rerank_cmd->parsed()) {
    MatrixHandle train;
    if (auto s = open_matrix(train_path, common, train); s != RF_OK) {
      return fail(s);
    }
    RecsHandle initial;
    if (auto s = rf_recs_load(recs_path.c_str(), train.m, &initial.r);
        s != RF_OK) {
      return fail(s);
    }
    RecsHandle reranked;
    double seconds = 0.0;
    json cfg = load_config(config_path);
    if (auto s = rf_rerank(initial.r, train.m, cfg.dump().c_str(), &reranked.r,
                           &seconds);
        s != RF_OK) {
      return fail(s);
    }
    if (auto s = rf_recs_save(reranked.r, rerank_out.c_str()); s != RF_OK) {
      return fail(s);
    }
    std::printf("rerank_seconds\t%.6f\n", seconds);
    return 0;
  }

  if (evaluate_cmd->parsed()) {
    MatrixHandle test;
    if (auto s = open_matrix(test_path, common, test); s != RF_OK) {
      return fail(s);
    }
    MatrixHandle train;
    if (!train_path.empty()) {
      if (auto s = open_matrix(train_path, common, train); s != RF_OK) {
        return fail(s);
      }
    }
    RecsHandle recs;
    if (auto s = rf_recs_load(recs_path.c_str(), test.m, &recs.r); s != RF_OK) {
      return fail(s);
    }
    json opts;
    opts["alphas"] = json::array();
    std::stringstream ss(alphas);
    std::string tok;
    while (std::getline(ss, tok, ',')) opts["alphas"].push_back(std::stoi(tok));
    char* report = nullptr;
    if (auto s = rf_evaluate(recs.r, test.m, train.m, opts.dump().c_str(),
                             &report);
        s != RF_OK) {
      return fail(s);
    }
    std::printf("%s\n", report);
    rf_string_free(report);
    return 0;
  }

  if (simulate->parsed() || study->parsed()) {
    json cfg = load_config(config_path);
    if (simulate->parsed()) cfg["study"] = "simulation";
    if ((simulate->parsed() && simulate->count("--seed")) ||
        (study->parsed() && study->count("--seed"))) {
      cfg["split"]["seed"] = seed;
    }
    char* report = nullptr;
    rf_status s =
        rf_study_run(cfg.dump().c_str(), out_dir.c_str(), jobs, &report);
    if (s != RF_OK) return fail(s);
    if (common.verbosity >= 2 && report) std::printf("%s\n", report);
    rf_string_free(report);
    log_info(common, "study results written to " + out_dir);
    return 0;
  }

  return 0;
}
