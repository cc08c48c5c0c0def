#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "recfair/types.hpp"

namespace recfair {

enum class RerankMethod {
  kDM,
  kFASTAR,
  kXQUAD,
  kFAIRMATCH,
  kRANDOM,
  kREVERSE,
};

const char* rerank_method_name(RerankMethod m);
RerankMethod parse_rerank_method(const std::string& name);

struct RerankConfig {
  RerankMethod method = RerankMethod::kDM;
  int k = 10;
  double lambda = 0.5;                     // xQuAD trade-off
  std::optional<double> protected_share;   // FA*IR p; default: tail share
  double significance = 0.1;               // FA*IR a_sig
  int iterations = 5;                      // FairMatch rounds
  std::string target_exposure = "uniform"; // DM capacity policy
  std::uint64_t seed = 0;

  void check() const;
};

struct RerankContext {
  const ItemSegmentation* segmentation = nullptr;
  const SparseMatrix* train = nullptr;
};

struct RerankResult {
  RecommendationSet recs;
  bool dm_overflow_used = false;        // DM fell back to overflow arcs
  std::vector<int> flagged_users;       // FA*IR constraint unsatisfiable
  std::vector<std::string> notes;       // contract deviations, for reports
};

// Transforms size-N initial lists into size-K lists. Every output list is a
// subset of that user's initial list; deterministic given config.seed.
RerankResult rerank(const RecommendationSet& initial, const RerankConfig& cfg,
                    const RerankContext& ctx);

// rerank plus wall-clock seconds of the rerank call alone.
std::pair<RerankResult, double> run_timed(const RecommendationSet& initial,
                                          const RerankConfig& cfg,
                                          const RerankContext& ctx);

// FA*IR minimum protected counts per prefix 1..k: smallest t with
// BinomialCDF(t-1; prefix, p) > a_sig.
std::vector<int> fastar_min_protected(int k, double p, double a_sig);

// Cost charged per unit routed through a DM overflow arc; large enough that
// any assignment with fewer overflow units beats any with more.
long long dm_overflow_unit_cost(int n_users, int n, int k);

}  // namespace recfair
