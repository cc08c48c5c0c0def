#include "recfair/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

#include "recfair/bias.hpp"
#include "recfair/version.hpp"

namespace recfair {

namespace {

using nlohmann::json;

void require_keys(const json& j, const std::vector<std::string>& allowed,
                  const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw config_error("unknown key \"" + key + "\" in " + where);
    }
  }
}

RatingScale scale_from_json(const json& j) {
  RatingScale s;
  for (const auto& v : j) s.levels.push_back(v.get<double>());
  s.check();
  return s;
}

// Runs fn(0..n-1) over a bounded worker pool; first exception wins and is
// rethrown after all workers drain.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs < 1) jobs = 1;
  if (jobs > n) jobs = n;
  if (jobs <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < jobs; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        int i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          failed.store(true);
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

// Flat results table; runtime lives in timing.csv so these rows are
// byte-identical across repeated runs.
class ResultsTable {
 public:
  void add(const MetricReport& r) {
    for (const auto& [name, value] : flatten(r)) {
      rows_.push_back(r.labels.pipeline + "," + r.labels.algorithm + "," +
                      r.labels.input + "," + std::to_string(r.labels.n) + "," +
                      std::to_string(r.labels.k) + "," + name + "," +
                      format_value(value));
    }
  }

  static std::vector<std::pair<std::string, double>> flatten(
      const MetricReport& r) {
    std::vector<std::pair<std::string, double>> out;
    out.emplace_back("precision", r.precision);
    out.emplace_back("ndcg", r.ndcg);
    for (const auto& [alpha, v] : r.ia) {
      out.emplace_back("ia@" + std::to_string(alpha), v);
    }
    for (const auto& [alpha, v] : r.lia) {
      out.emplace_back("lia@" + std::to_string(alpha), v);
    }
    out.emplace_back("gini", r.gini);
    out.emplace_back("ee", r.ee);
    return out;
  }

  void write(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw data_error("cannot write results table: " + path);
    out << "pipeline,algorithm,input,N,K,metric,value\n";
    for (const auto& row : rows_) out << row << '\n';
  }

 private:
  std::vector<std::string> rows_;
};

struct PreparedData {
  RatingMatrix full;
  SplitPair split;
  ItemSegmentation segmentation;
  std::uint64_t data_hash = 0;
};

PreparedData prepare(const PipelineSpec& spec) {
  PreparedData d;
  d.full = load_dataset(spec.dataset);
  d.data_hash = dataset_hash(d.full);
  d.split = split_per_user(d.full, spec.split_ratio, spec.split_seed);
  d.segmentation = segment_head_tail(d.split.train.data, spec.head_fraction);
  return d;
}

json provenance_json(const PipelineSpec& spec, const PreparedData& d) {
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(d.data_hash));
  json p;
  p["toolkit_version"] = kVersion;
  p["dataset_hash"] = hash;
  p["split_ratio"] = spec.split_ratio;
  p["split_seed"] = spec.split_seed;
  p["head_fraction"] = spec.head_fraction;
  p["n_users"] = d.full.n_users();
  p["n_items"] = d.full.n_items();
  p["n_ratings"] = d.full.data.n_entries();
  json grid = json::array();
  for (const auto& c : spec.grid) grid.push_back(model_config_to_json(c));
  p["grid"] = grid;
  return p;
}

void ensure_dir(const std::string& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw data_error("cannot create output directory: " + out_dir);
}

const ModelConfig& single_config(const PipelineSpec& spec,
                                 const char* study_name) {
  if (spec.grid.size() != 1) {
    throw config_error(std::string(study_name) +
                       " expects exactly one model config (no grid)");
  }
  return spec.grid.front();
}

}  // namespace

RatingMatrix load_dataset(const DatasetSpec& spec) {
  RatingMatrix m;
  if (spec.synthetic) {
    m = generate_synthetic(*spec.synthetic);
  } else if (!spec.path.empty()) {
    LoadOptions opts;
    opts.delimiter = spec.delimiter;
    opts.skip_header = spec.skip_header;
    opts.scale = spec.scale;
    m = load_ratings(spec.path, opts);
  } else {
    throw config_error("dataset needs either a path or a synthetic block");
  }
  if (spec.min_user_ratings > 0 || spec.min_item_ratings > 0) {
    m = filter_kcore(m, std::max(1, spec.min_user_ratings),
                     std::max(1, spec.min_item_ratings));
  }
  return m;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

nlohmann::json model_config_to_json(const ModelConfig& cfg) {
  json j;
  j["algorithm"] = algorithm_name(cfg.algorithm);
  j["factors"] = cfg.factors;
  j["iterations"] = cfg.iterations;
  j["learning_rate"] = cfg.learning_rate;
  j["regularization"] = cfg.regularization;
  j["neighbors"] = cfg.neighbors;
  j["shrinkage"] = cfg.shrinkage;
  j["confidence_alpha"] = cfg.confidence_alpha;
  j["seed"] = cfg.seed;
  return j;
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  require_keys(j,
               {"algorithm", "factors", "iterations", "learning_rate",
                "regularization", "neighbors", "shrinkage", "confidence_alpha",
                "seed"},
               "model config");
  if (!j.contains("algorithm")) {
    throw config_error("model config needs an \"algorithm\"");
  }
  ModelConfig cfg;
  cfg.algorithm = parse_algorithm(j["algorithm"].get<std::string>());
  cfg.factors = j.value("factors", cfg.factors);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
  cfg.regularization = j.value("regularization", cfg.regularization);
  cfg.neighbors = j.value("neighbors", cfg.neighbors);
  cfg.shrinkage = j.value("shrinkage", cfg.shrinkage);
  cfg.confidence_alpha = j.value("confidence_alpha", cfg.confidence_alpha);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.check();
  return cfg;
}

nlohmann::json rerank_config_to_json(const RerankConfig& cfg) {
  json j;
  j["method"] = rerank_method_name(cfg.method);
  j["K"] = cfg.k;
  j["lambda"] = cfg.lambda;
  if (cfg.protected_share) j["protected_share"] = *cfg.protected_share;
  j["significance"] = cfg.significance;
  j["iterations"] = cfg.iterations;
  j["target_exposure"] = cfg.target_exposure;
  j["seed"] = cfg.seed;
  return j;
}

RerankConfig rerank_config_from_json(const nlohmann::json& j) {
  require_keys(j,
               {"method", "K", "lambda", "protected_share", "significance",
                "iterations", "target_exposure", "seed"},
               "reranker config");
  if (!j.contains("method")) {
    throw config_error("reranker config needs a \"method\"");
  }
  RerankConfig cfg;
  cfg.method = parse_rerank_method(j["method"].get<std::string>());
  cfg.k = j.value("K", cfg.k);
  cfg.lambda = j.value("lambda", cfg.lambda);
  if (j.contains("protected_share")) {
    cfg.protected_share = j["protected_share"].get<double>();
  }
  cfg.significance = j.value("significance", cfg.significance);
  cfg.iterations = j.value("iterations", cfg.iterations);
  cfg.target_exposure = j.value("target_exposure", cfg.target_exposure);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.check();
  return cfg;
}

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j) {
  require_keys(j,
               {"users", "items", "mean_profile", "min_profile",
                "popularity_exponent", "positivity_skew", "coupling", "scale",
                "seed"},
               "synthetic spec");
  SyntheticSpec s;
  s.n_users = j.value("users", s.n_users);
  s.n_items = j.value("items", s.n_items);
  s.mean_profile = j.value("mean_profile", s.mean_profile);
  s.min_profile = j.value("min_profile", s.min_profile);
  s.popularity_exponent = j.value("popularity_exponent", s.popularity_exponent);
  s.positivity_skew = j.value("positivity_skew", s.positivity_skew);
  s.coupling = j.value("coupling", s.coupling);
  if (j.contains("scale")) s.scale = scale_from_json(j["scale"]);
  s.seed = j.value("seed", s.seed);
  return s;
}

nlohmann::json metric_report_to_json(const MetricReport& r) {
  json j;
  j["labels"] = {{"pipeline", r.labels.pipeline},
                 {"algorithm", r.labels.algorithm},
                 {"input", r.labels.input},
                 {"N", r.labels.n},
                 {"K", r.labels.k}};
  j["precision"] = r.precision;
  j["ndcg"] = r.ndcg;
  json ia = json::object();
  for (const auto& [alpha, v] : r.ia) ia[std::to_string(alpha)] = v;
  j["ia"] = ia;
  json lia = json::object();
  for (const auto& [alpha, v] : r.lia) lia[std::to_string(alpha)] = v;
  j["lia"] = lia;
  j["gini"] = r.gini;
  j["ee"] = r.ee;
  j["runtime_seconds"] = r.runtime_seconds;
  j["excluded_users"] = r.excluded_users;
  j["notes"] = r.notes;
  return j;
}

PipelineSpec pipeline_spec_from_json(const nlohmann::json& config) {
  require_keys(config,
               {"schema_version", "study", "dataset", "input_transform",
                "flip_beta", "model", "grid", "objective", "K", "Ns",
                "methods", "reranker", "split", "alphas", "head_fraction",
                "betas"},
               "pipeline config");
  if (!config.contains("schema_version") ||
      config["schema_version"].get<int>() != 1) {
    throw config_error("config schema_version must be 1");
  }
  PipelineSpec spec;
  if (!config.contains("dataset")) {
    throw config_error("config needs a \"dataset\" block");
  }
  const json& ds = config["dataset"];
  require_keys(ds,
               {"path", "synthetic", "delimiter", "skip_header", "scale",
                "min_user_ratings", "min_item_ratings"},
               "dataset spec");
  if (ds.contains("synthetic")) {
    spec.dataset.synthetic = synthetic_spec_from_json(ds["synthetic"]);
  }
  spec.dataset.path = ds.value("path", std::string());
  if (ds.contains("delimiter")) {
    std::string d = ds["delimiter"].get<std::string>();
    if (d.size() != 1) throw config_error("delimiter must be one character");
    spec.dataset.delimiter = d[0];
  }
  spec.dataset.skip_header = ds.value("skip_header", false);
  if (ds.contains("scale")) spec.dataset.scale = scale_from_json(ds["scale"]);
  spec.dataset.min_user_ratings = ds.value("min_user_ratings", 0);
  spec.dataset.min_item_ratings = ds.value("min_item_ratings", 0);

  spec.input_transform = config.value("input_transform", std::string("raw"));
  if (spec.input_transform != "raw" && spec.input_transform != "percentile" &&
      spec.input_transform != "flip") {
    throw config_error("input_transform must be raw, percentile, or flip");
  }
  spec.flip_beta = config.value("flip_beta", 0.0);

  if (config.contains("model") && config.contains("grid")) {
    throw config_error("give either \"model\" or \"grid\", not both");
  }
  if (config.contains("model")) {
    spec.grid.push_back(model_config_from_json(config["model"]));
  } else if (config.contains("grid")) {
    for (const auto& g : config["grid"]) {
      spec.grid.push_back(model_config_from_json(g));
    }
  }
  if (spec.grid.empty()) {
    throw config_error("config needs a \"model\" or a non-empty \"grid\"");
  }

  spec.objective = config.value("objective", spec.objective);
  spec.k = config.value("K", spec.k);
  if (config.contains("Ns")) {
    for (const auto& n : config["Ns"]) spec.initial_sizes.push_back(n.get<int>());
  }
  if (config.contains("methods")) {
    for (const auto& m : config["methods"]) {
      spec.methods.push_back(m.get<std::string>());
    }
  }
  if (config.contains("reranker")) {
    spec.reranker = rerank_config_from_json(config["reranker"]);
  }
  if (config.contains("split")) {
    const json& sp = config["split"];
    require_keys(sp, {"ratio", "seed"}, "split spec");
    spec.split_ratio = sp.value("ratio", spec.split_ratio);
    spec.split_seed = sp.value("seed", spec.split_seed);
  }
  if (config.contains("alphas")) {
    spec.alphas.clear();
    for (const auto& a : config["alphas"]) spec.alphas.push_back(a.get<int>());
  }
  spec.head_fraction = config.value("head_fraction", spec.head_fraction);
  if (config.contains("betas")) {
    for (const auto& b : config["betas"]) spec.betas.push_back(b.get<double>());
  }

  if (spec.k < 1) throw config_error("K must be >= 1");
  if (spec.reranker && spec.reranker->k > spec.k) {
    // reranker K defaults to the pipeline K; an explicit larger K is a
    // config inconsistency
    throw config_error("reranker K cannot exceed the pipeline K");
  }
  return spec;
}

StudyReport run_simulation_sweep(const PipelineSpec& spec,
                                 const std::string& out_dir, int jobs) {
  if (spec.reranker) {
    throw config_error("simulation sweep does not take a reranker");
  }
  if (spec.betas.empty()) {
    throw config_error("simulation sweep needs a non-empty beta list");
  }
  for (double b : spec.betas) {
    if (!(b > 0.0 && b <= 1.0)) {
      throw config_error("simulation betas must lie in (0, 1]");
    }
  }
  const ModelConfig& cfg = single_config(spec, "simulation sweep");
  ensure_dir(out_dir);
  PreparedData data = prepare(spec);

  const int n_cells = static_cast<int>(spec.betas.size());
  std::vector<MetricReport> reports(n_cells);
  EvalOptions eval_opts{spec.alphas, &data.segmentation};

  // a failing beta run aborts the sweep, but completed cells are persisted
  std::exception_ptr sweep_error;
  try {
    parallel_for(n_cells, jobs, [&](int cell) {
      double beta = spec.betas[cell];
      RatingMatrix flipped = flip_positivity(data.split.train, beta);
      auto model = train(cfg, flipped);
      auto recs = recommend(*model, spec.k);
      MetricReport r = evaluate(recs, data.split.test.data, eval_opts);
      r.labels.pipeline = "simulation:beta=" + format_value(beta);
      r.labels.algorithm = algorithm_name(cfg.algorithm);
      r.labels.input = "rating";
      r.labels.k = spec.k;
      reports[cell] = std::move(r);
    });
  } catch (...) {
    sweep_error = std::current_exception();
  }

  ResultsTable table;
  std::ofstream sweep(out_dir + "/beta_sweep.csv");
  sweep << "beta,metric,value\n";
  json rows = json::array();
  for (int cell = 0; cell < n_cells; ++cell) {
    if (reports[cell].labels.pipeline.empty()) continue;  // did not finish
    table.add(reports[cell]);
    for (const auto& [name, value] : ResultsTable::flatten(reports[cell])) {
      sweep << format_value(spec.betas[cell]) << ',' << name << ','
            << format_value(value) << '\n';
    }
    rows.push_back(metric_report_to_json(reports[cell]));
  }
  sweep.close();
  table.write(out_dir + "/results.csv");
  if (sweep_error) std::rethrow_exception(sweep_error);

  StudyReport report;
  report.document["study"] = "simulation";
  report.document["provenance"] = provenance_json(spec, data);
  report.document["betas"] = spec.betas;
  report.document["rows"] = rows;
  for (auto& r : reports) report.reports.push_back(std::move(r));
  std::ofstream doc(out_dir + "/report.json");
  doc << report.document.dump(2) << '\n';
  return report;
}

namespace {

// Shared by the comparison and reranker studies: grid-search an arm and
// return (best model, its report rows).
struct Arm {
  std::unique_ptr<TrainedModel> model;
  GridSearchResult grid;
};

Arm build_arm(const PipelineSpec& spec, const PreparedData& data,
              InputKind kind, const EvalOptions& eval_opts) {
  Arm arm;
  if (kind == InputKind::kPercentiles) {
    PercentileMatrix p = percentile_transform(data.split.train);
    arm.grid = grid_search(spec.grid, TrainInput(p), data.split.test.data,
                           spec.objective, spec.k, eval_opts);
    arm.model = train(arm.grid.best, TrainInput(p));
  } else {
    arm.grid = grid_search(spec.grid, TrainInput(data.split.train),
                           data.split.test.data, spec.objective, spec.k,
                           eval_opts);
    arm.model = train(arm.grid.best, TrainInput(data.split.train));
  }
  return arm;
}

void write_grid_rows(const GridSearchResult& grid, const std::string& input,
                     const std::string& path) {
  std::ofstream out(path);
  out << "config,input,status,objective_rows\n";
  for (const auto& row : grid.rows) {
    out << '"' << row.config.describe() << "\"," << input << ','
        << (row.failed ? "failed" : "ok") << ",\"";
    if (row.failed) {
      out << row.error;
    } else {
      bool first = true;
      for (const auto& [name, value] : ResultsTable::flatten(row.report)) {
        if (!first) out << ';';
        out << name << '=' << format_value(value);
        first = false;
      }
    }
    out << "\"\n";
  }
}

}  // namespace

StudyReport run_comparison(const PipelineSpec& spec, const std::string& out_dir,
                           int jobs) {
  ensure_dir(out_dir);
  PreparedData data = prepare(spec);
  EvalOptions eval_opts{spec.alphas, &data.segmentation};

  Arm arms[2];
  parallel_for(2, std::min(jobs, 2), [&](int a) {
    arms[a] = build_arm(spec, data,
                        a == 0 ? InputKind::kRatings : InputKind::kPercentiles,
                        eval_opts);
  });

  ResultsTable table;
  json rows = json::array();
  MetricReport best[2];
  for (int a = 0; a < 2; ++a) {
    const auto& row = arms[a].grid.rows[arms[a].grid.best_index];
    best[a] = row.report;
    best[a].labels.pipeline = "comparison";
    best[a].labels.k = spec.k;
    table.add(best[a]);
    rows.push_back(metric_report_to_json(best[a]));
    write_grid_rows(arms[a].grid, best[a].labels.input,
                    out_dir + "/grid_" + best[a].labels.input + ".csv");
  }

  // per-metric relative gain of the percentile arm over the raw arm
  json gains = json::object();
  std::ofstream gain_csv(out_dir + "/gains.csv");
  gain_csv << "metric,rating,percentile,gain_pct\n";
  auto raw_rows = ResultsTable::flatten(best[0]);
  auto per_rows = ResultsTable::flatten(best[1]);
  for (std::size_t i = 0; i < raw_rows.size(); ++i) {
    const auto& [name, raw_value] = raw_rows[i];
    double per_value = per_rows[i].second;
    if (raw_value != 0.0) {
      double g = relative_gain(per_value, raw_value);
      gains[name] = g;
      gain_csv << name << ',' << format_value(raw_value) << ','
               << format_value(per_value) << ',' << format_value(g) << '\n';
    }
  }
  table.write(out_dir + "/results.csv");

  StudyReport report;
  report.document["study"] = "comparison";
  report.document["provenance"] = provenance_json(spec, data);
  report.document["rows"] = rows;
  report.document["gains"] = gains;
  report.reports.push_back(best[0]);
  report.reports.push_back(best[1]);
  std::ofstream doc(out_dir + "/report.json");
  doc << report.document.dump(2) << '\n';
  return report;
}

StudyReport run_reranker_study(const PipelineSpec& spec,
                               const std::string& out_dir, int jobs) {
  if (spec.initial_sizes.empty()) {
    throw config_error("reranker study needs a non-empty Ns list");
  }
  for (int n : spec.initial_sizes) {
    if (n < spec.k) throw config_error("every N must be >= K");
  }
  std::vector<RerankMethod> methods;
  for (const auto& name : spec.methods) {
    methods.push_back(parse_rerank_method(name));
  }
  if (methods.empty()) {
    throw config_error("reranker study needs a non-empty methods list");
  }
  ensure_dir(out_dir);
  PreparedData data = prepare(spec);
  EvalOptions eval_opts{spec.alphas, &data.segmentation};
  RerankConfig base_rerank =
      spec.reranker ? *spec.reranker : RerankConfig{};
  base_rerank.k = spec.k;

  // one trained model per input arm (grid-searched when a grid is given)
  Arm arms[2];
  parallel_for(2, std::min(jobs, 2), [&](int a) {
    arms[a] = build_arm(spec, data,
                        a == 0 ? InputKind::kRatings : InputKind::kPercentiles,
                        eval_opts);
  });

  struct Cell {
    int arm;
    int n;
    RerankMethod method;
  };
  std::vector<Cell> cells;
  for (int a = 0; a < 2; ++a) {
    for (int n : spec.initial_sizes) {
      for (RerankMethod m : methods) cells.push_back({a, n, m});
    }
  }

  // initial lists per (arm, N), built once
  std::vector<std::vector<RecommendationSet>> initials(2);
  for (int a = 0; a < 2; ++a) {
    for (int n : spec.initial_sizes) {
      initials[a].push_back(recommend(*arms[a].model, n));
    }
  }
  auto initial_of = [&](int arm, int n) -> const RecommendationSet& {
    for (std::size_t i = 0; i < spec.initial_sizes.size(); ++i) {
      if (spec.initial_sizes[i] == n) return initials[arm][i];
    }
    throw run_error("initial list lookup failed");
  };

  RerankContext ctx{&data.segmentation, &data.split.train.data};
  std::vector<MetricReport> cell_reports(cells.size());
  parallel_for(static_cast<int>(cells.size()), jobs, [&](int idx) {
    const Cell& cell = cells[idx];
    RerankConfig cfg = base_rerank;
    cfg.method = cell.method;
    auto [result, seconds] = run_timed(initial_of(cell.arm, cell.n), cfg, ctx);
    MetricReport r = evaluate(result.recs, data.split.test.data, eval_opts);
    r.labels.pipeline = "rerank";
    r.labels.algorithm = algorithm_name(arms[cell.arm].grid.best.algorithm);
    r.labels.input = cell.arm == 0 ? "rating" : "percentile";
    r.labels.n = cell.n;
    r.labels.k = spec.k;
    r.runtime_seconds = seconds;
    r.notes = result.notes;
    cell_reports[idx] = std::move(r);
  });

  // no-reranker baselines
  MetricReport baselines[2];
  for (int a = 0; a < 2; ++a) {
    auto recs = recommend(*arms[a].model, spec.k);
    baselines[a] = evaluate(recs, data.split.test.data, eval_opts);
    baselines[a].labels.pipeline = "base";
    baselines[a].labels.algorithm =
        algorithm_name(arms[a].grid.best.algorithm);
    baselines[a].labels.input = a == 0 ? "rating" : "percentile";
    baselines[a].labels.k = spec.k;
  }

  ResultsTable table;
  json rows = json::array();
  for (int a = 0; a < 2; ++a) {
    table.add(baselines[a]);
    rows.push_back(metric_report_to_json(baselines[a]));
  }
  std::ofstream scatter_ia(out_dir + "/scatter_ndcg_ia.csv");
  std::ofstream scatter_ee(out_dir + "/scatter_ndcg_ee.csv");
  std::ofstream timing(out_dir + "/timing.csv");
  scatter_ia << "input,method,N,ndcg,ia_1\n";
  scatter_ee << "input,method,N,ndcg,ee\n";
  timing << "input,method,N,runtime_seconds\n";
  for (int a = 0; a < 2; ++a) {
    const auto& b = baselines[a];
    scatter_ia << b.labels.input << ",none,0," << format_value(b.ndcg) << ','
               << format_value(b.ia.count(1) ? b.ia.at(1) : 0.0) << '\n';
    scatter_ee << b.labels.input << ",none,0," << format_value(b.ndcg) << ','
               << format_value(b.ee) << '\n';
  }
  for (std::size_t idx = 0; idx < cells.size(); ++idx) {
    const auto& r = cell_reports[idx];
    table.add(r);
    rows.push_back(metric_report_to_json(r));
    const char* method = rerank_method_name(cells[idx].method);
    scatter_ia << r.labels.input << ',' << method << ',' << r.labels.n << ','
               << format_value(r.ndcg) << ','
               << format_value(r.ia.count(1) ? r.ia.at(1) : 0.0) << '\n';
    scatter_ee << r.labels.input << ',' << method << ',' << r.labels.n << ','
               << format_value(r.ndcg) << ',' << format_value(r.ee) << '\n';
    timing << r.labels.input << ',' << method << ',' << r.labels.n << ','
           << format_value(r.runtime_seconds) << '\n';
  }
  table.write(out_dir + "/results.csv");

  // percentile @ min(N) vs rating @ max(N), per method and metric, plus the
  // runtime-saving row (positive = time saved)
  int min_n = *std::min_element(spec.initial_sizes.begin(),
                                spec.initial_sizes.end());
  int max_n = *std::max_element(spec.initial_sizes.begin(),
                                spec.initial_sizes.end());
  auto cell_report = [&](int arm, int n, RerankMethod m) -> const MetricReport& {
    for (std::size_t idx = 0; idx < cells.size(); ++idx) {
      if (cells[idx].arm == arm && cells[idx].n == n && cells[idx].method == m) {
        return cell_reports[idx];
      }
    }
    throw run_error("gain table cell lookup failed");
  };
  json gains = json::array();
  std::ofstream gain_csv(out_dir + "/gain.csv");
  gain_csv << "method,metric,percentile_minN,rating_maxN,gain_pct\n";
  for (RerankMethod m : methods) {
    const MetricReport& fast = cell_report(1, min_n, m);
    const MetricReport& slow = cell_report(0, max_n, m);
    auto fast_rows = ResultsTable::flatten(fast);
    auto slow_rows = ResultsTable::flatten(slow);
    json method_gains = json::object();
    method_gains["method"] = rerank_method_name(m);
    for (std::size_t i = 0; i < fast_rows.size(); ++i) {
      const auto& [name, fast_value] = fast_rows[i];
      double slow_value = slow_rows[i].second;
      if (slow_value == 0.0) continue;
      double g = relative_gain(fast_value, slow_value);
      method_gains[name] = g;
      gain_csv << rerank_method_name(m) << ',' << name << ','
               << format_value(fast_value) << ',' << format_value(slow_value)
               << ',' << format_value(g) << '\n';
    }
    if (slow.runtime_seconds > 0.0) {
      double saving = -relative_gain(fast.runtime_seconds, slow.runtime_seconds);
      method_gains["runtime_saving"] = saving;
      gain_csv << rerank_method_name(m) << ",runtime_saving,"
               << format_value(fast.runtime_seconds) << ','
               << format_value(slow.runtime_seconds) << ','
               << format_value(saving) << '\n';
    }
    gains.push_back(method_gains);
  }

  StudyReport report;
  report.document["study"] = "reranker";
  report.document["provenance"] = provenance_json(spec, data);
  report.document["rows"] = rows;
  report.document["gains"] = gains;
  for (int a = 0; a < 2; ++a) report.reports.push_back(baselines[a]);
  for (auto& r : cell_reports) report.reports.push_back(std::move(r));
  std::ofstream doc(out_dir + "/report.json");
  doc << report.document.dump(2) << '\n';
  return report;
}

StudyReport run_study(const nlohmann::json& config, const std::string& out_dir,
                      int jobs) {
  if (!config.contains("study")) {
    throw config_error("config needs a \"study\" field");
  }
  std::string study = config["study"].get<std::string>();
  PipelineSpec spec = pipeline_spec_from_json(config);
  if (study == "simulation") return run_simulation_sweep(spec, out_dir, jobs);
  if (study == "comparison") return run_comparison(spec, out_dir, jobs);
  if (study == "reranker") return run_reranker_study(spec, out_dir, jobs);
  throw config_error("unknown study type: " + study);
}

}  // namespace recfair
