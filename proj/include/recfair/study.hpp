#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "recfair/dataset.hpp"
#include "recfair/metrics.hpp"
#include "recfair/models.hpp"
#include "recfair/rerank.hpp"
#include "recfair/synthetic.hpp"

namespace recfair {

struct DatasetSpec {
  std::string path;                        // file input, or
  std::optional<SyntheticSpec> synthetic;  // built-in fixture
  char delimiter = '\t';
  bool skip_header = false;
  std::optional<RatingScale> scale;
  int min_user_ratings = 0;  // 0 disables k-core filtering
  int min_item_ratings = 0;
};

RatingMatrix load_dataset(const DatasetSpec& spec);

// One experiment description: dataset, transform, model (or grid), list
// sizes, reranker, split, and the metrics to emit.
struct PipelineSpec {
  DatasetSpec dataset;
  std::string input_transform = "raw";  // raw | percentile | flip
  double flip_beta = 0.0;
  std::vector<ModelConfig> grid;        // single entry = fixed config
  std::string objective = "ndcg";
  int k = 10;
  std::vector<int> initial_sizes;       // reranker study N values
  std::vector<std::string> methods;     // reranker study methods
  std::optional<RerankConfig> reranker;
  double split_ratio = 0.8;
  std::uint64_t split_seed = 42;
  std::vector<int> alphas = {1};
  double head_fraction = 0.2;
  std::vector<double> betas;            // simulation sweep
};

PipelineSpec pipeline_spec_from_json(const nlohmann::json& config);

struct StudyReport {
  nlohmann::json document;
  std::vector<MetricReport> reports;
};

// beta-sweep of the positivity flip: per beta, flip the train split, train,
// evaluate; emits beta_sweep.csv plus the flat results table.
StudyReport run_simulation_sweep(const PipelineSpec& spec,
                                 const std::string& out_dir, int jobs = 1);

// Raw-vs-percentile arms sharing dataset and split; grid-searched best
// model per arm, per-metric relative gains.
StudyReport run_comparison(const PipelineSpec& spec,
                           const std::string& out_dir, int jobs = 1);

// (input type) x (N) x (method) reranker cells plus the two no-reranker
// baselines; emits scatter/timing files and the percentile@minN vs
// rating@maxN gain table.
StudyReport run_reranker_study(const PipelineSpec& spec,
                               const std::string& out_dir, int jobs = 1);

// Dispatches on config["study"]: "simulation" | "comparison" | "reranker".
StudyReport run_study(const nlohmann::json& config, const std::string& out_dir,
                      int jobs = 1);

nlohmann::json model_config_to_json(const ModelConfig& cfg);
ModelConfig model_config_from_json(const nlohmann::json& j);
nlohmann::json rerank_config_to_json(const RerankConfig& cfg);
RerankConfig rerank_config_from_json(const nlohmann::json& j);
nlohmann::json metric_report_to_json(const MetricReport& report);
SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);

// Fixed-precision float formatting so report tables are byte-stable.
std::string format_value(double v);

}  // namespace recfair
