#include "recfair/rerank.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>

#include "flow.hpp"
#include "recfair/rng.hpp"

namespace recfair {

namespace {

using detail::MaxFlow;
using detail::MinCostFlow;

// Original-score presentation order: the initial lists are score-descending,
// so ascending rank reproduces it even under score ties.
void sort_by_rank(std::vector<int>& ranks) {
  std::sort(ranks.begin(), ranks.end());
}

std::vector<ScoredItem> pick_ranks(const std::vector<ScoredItem>& list,
                                   const std::vector<int>& ranks) {
  std::vector<ScoredItem> out;
  out.reserve(ranks.size());
  for (int r : ranks) out.push_back(list[r]);
  return out;
}

RecommendationSet make_output_shell(const RecommendationSet& initial, int k) {
  RecommendationSet out;
  out.n_users = initial.n_users;
  out.n_items = initial.n_items;
  out.k = k;
  out.user_labels = initial.user_labels;
  out.item_labels = initial.item_labels;
  out.lists.resize(initial.n_users);
  return out;
}

double binomial_cdf(int t, int k, double p) {
  if (t < 0) return 0.0;
  if (t >= k) return 1.0;
  // pmf recurrence; k stays small (prefix lengths)
  double pmf = std::pow(1.0 - p, k);
  double cdf = pmf;
  for (int x = 0; x < t; ++x) {
    pmf *= (static_cast<double>(k - x) / (x + 1)) * (p / (1.0 - p));
    cdf += pmf;
  }
  return cdf;
}

void rerank_random(const RecommendationSet& initial, const RerankConfig& cfg,
                   RecommendationSet& out) {
  for (int u = 0; u < initial.n_users; ++u) {
    const auto& list = initial.lists[u];
    int n = static_cast<int>(list.size());
    int take = std::min(cfg.k, n);
    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(u)));
    auto ranks = rng.sample_indices(n, take);
    sort_by_rank(ranks);
    out.lists[u] = pick_ranks(list, ranks);
  }
}

void rerank_reverse(const RecommendationSet& initial, const RerankConfig& cfg,
                    RecommendationSet& out) {
  for (int u = 0; u < initial.n_users; ++u) {
    const auto& list = initial.lists[u];
    int n = static_cast<int>(list.size());
    int take = std::min(cfg.k, n);
    auto& dst = out.lists[u];
    dst.reserve(take);
    for (int r = n - 1; r >= n - take; --r) dst.push_back(list[r]);
  }
}

void rerank_xquad(const RecommendationSet& initial, const RerankConfig& cfg,
                  const RerankContext& ctx, RecommendationSet& out) {
  if (!ctx.segmentation || !ctx.train) {
    throw config_error("xQuAD needs the item segmentation and train matrix");
  }
  const auto& seg = *ctx.segmentation;
  for (int u = 0; u < initial.n_users; ++u) {
    const auto& list = initial.lists[u];
    int n = static_cast<int>(list.size());
    int take = std::min(cfg.k, n);

    auto profile = ctx.train->row(u);
    double p_head = 0.5;
    if (!profile.empty()) {
      int heads = 0;
      for (const auto& c : profile) heads += seg.is_head(c.index) ? 1 : 0;
      p_head = static_cast<double>(heads) / static_cast<double>(profile.size());
    }
    double p_tail = 1.0 - p_head;

    std::vector<char> used(n, 0);
    bool head_open = true;  // no selected item in the category yet
    bool tail_open = true;
    auto& dst = out.lists[u];
    for (int pos = 0; pos < take; ++pos) {
      int best = -1;
      double best_val = 0.0;
      for (int r = 0; r < n; ++r) {
        if (used[r]) continue;
        bool is_head = seg.is_head(list[r].item);
        double novelty = is_head ? (head_open ? p_head : 0.0)
                                 : (tail_open ? p_tail : 0.0);
        double val = (1.0 - cfg.lambda) * list[r].score + cfg.lambda * novelty;
        if (best < 0 || val > best_val) {
          best = r;
          best_val = val;
        }
      }
      used[best] = 1;
      if (seg.is_head(list[best].item)) {
        head_open = false;
      } else {
        tail_open = false;
      }
      dst.push_back(list[best]);
    }
  }
}

void rerank_fastar(const RecommendationSet& initial, const RerankConfig& cfg,
                   const RerankContext& ctx, RecommendationSet& out,
                   RerankResult& result) {
  if (!ctx.segmentation) {
    throw config_error("FA*IR needs the item segmentation");
  }
  const auto& seg = *ctx.segmentation;
  double share = cfg.protected_share
                     ? *cfg.protected_share
                     : static_cast<double>(seg.tail.size()) /
                           static_cast<double>(seg.n_items());
  if (!(share > 0.0 && share < 1.0)) {
    throw config_error("FA*IR protected share must be in (0, 1)");
  }
  auto m_min = fastar_min_protected(cfg.k, share, cfg.significance);

  for (int u = 0; u < initial.n_users; ++u) {
    const auto& list = initial.lists[u];
    int n = static_cast<int>(list.size());
    int take = std::min(cfg.k, n);
    std::vector<int> protected_q;
    std::vector<int> open_q;
    for (int r = 0; r < n; ++r) {
      (seg.is_head(list[r].item) ? open_q : protected_q).push_back(r);
    }
    std::size_t pi = 0;
    std::size_t oi = 0;
    int protected_count = 0;
    bool flagged = false;
    auto& dst = out.lists[u];
    for (int pos = 1; pos <= take; ++pos) {
      bool need_protected = protected_count < m_min[pos];
      int pick;
      if (need_protected) {
        if (pi < protected_q.size()) {
          pick = protected_q[pi++];
          ++protected_count;
        } else {
          flagged = true;  // too few protected candidates in this list
          pick = open_q[oi++];
        }
      } else if (pi >= protected_q.size()) {
        pick = open_q[oi++];
      } else if (oi >= open_q.size()) {
        pick = protected_q[pi++];
        ++protected_count;
      } else {
        // best head of the two rank-sorted queues
        if (protected_q[pi] < open_q[oi]) {
          pick = protected_q[pi++];
          ++protected_count;
        } else {
          pick = open_q[oi++];
        }
      }
      dst.push_back(list[pick]);
    }
    if (flagged) result.flagged_users.push_back(u);
  }
}

void rerank_dm(const RecommendationSet& initial, const RerankConfig& cfg,
               RecommendationSet& out, RerankResult& result) {
  if (cfg.target_exposure != "uniform") {
    throw config_error("unknown DM target exposure policy: " +
                       cfg.target_exposure);
  }
  // candidate pool = union of the initial lists
  std::map<int, int> cand_index;
  for (const auto& list : initial.lists) {
    for (const auto& s : list) cand_index.emplace(s.item, 0);
  }
  int n_cand = 0;
  for (auto& [item, idx] : cand_index) idx = n_cand++;

  const int n_users = initial.n_users;
  long long demand = 0;
  int max_n = 0;
  for (const auto& list : initial.lists) {
    demand += std::min<int>(cfg.k, static_cast<int>(list.size()));
    max_n = std::max<int>(max_n, static_cast<int>(list.size()));
  }
  long long capacity =
      n_cand == 0 ? 0
                  : (static_cast<long long>(n_users) * cfg.k + n_cand - 1) / n_cand;
  long long overflow_cost = dm_overflow_unit_cost(n_users, max_n, cfg.k);

  // source, users, candidates, sink
  const int source = 0;
  const int user0 = 1;
  const int cand0 = user0 + n_users;
  const int sink = cand0 + n_cand;
  MinCostFlow flow(sink + 1);
  std::vector<std::vector<std::pair<int, int>>> user_edges(n_users);
  for (int u = 0; u < n_users; ++u) {
    const auto& list = initial.lists[u];
    flow.add_edge(source, user0 + u,
                  std::min<int>(cfg.k, static_cast<int>(list.size())), 0);
    for (int r = 0; r < static_cast<int>(list.size()); ++r) {
      int c = cand_index[list[r].item];
      int e = flow.add_edge(user0 + u, cand0 + c, 1, r + 1);
      user_edges[u].push_back({e, r});
    }
  }
  std::vector<int> overflow_edges;
  for (const auto& [item, c] : cand_index) {
    flow.add_edge(cand0 + c, sink, capacity, 0);
    overflow_edges.push_back(flow.add_edge(
        cand0 + c, sink, static_cast<long long>(n_users) * cfg.k,
        overflow_cost));
  }

  auto [pushed, cost] = flow.solve(source, sink, demand);
  (void)cost;
  if (pushed < demand) {
    throw run_error("DM flow could not place every recommendation slot");
  }
  for (int e : overflow_edges) {
    if (flow.flow_on(e) > 0) {
      result.dm_overflow_used = true;
      break;
    }
  }

  for (int u = 0; u < n_users; ++u) {
    std::vector<int> ranks;
    for (const auto& [edge, rank] : user_edges[u]) {
      if (flow.flow_on(edge) > 0) ranks.push_back(rank);
    }
    sort_by_rank(ranks);
    out.lists[u] = pick_ranks(initial.lists[u], ranks);
  }
}

void rerank_fairmatch(const RecommendationSet& initial, const RerankConfig& cfg,
                      RecommendationSet& out) {
  if (cfg.iterations < 1) {
    throw config_error("FairMatch needs at least one iteration");
  }
  std::map<int, int> cand_index;
  for (const auto& list : initial.lists) {
    for (const auto& s : list) cand_index.emplace(s.item, 0);
  }
  int n_cand = 0;
  for (auto& [item, idx] : cand_index) idx = n_cand++;
  std::vector<int> cand_items(n_cand);
  for (const auto& [item, idx] : cand_index) cand_items[idx] = item;

  const int n_users = initial.n_users;
  const int user_cap = (cfg.k + cfg.iterations - 1) / cfg.iterations;
  std::vector<char> removed(n_cand, 0);
  std::vector<std::vector<int>> matched(n_users);

  for (int round = 0; round < cfg.iterations; ++round) {
    // degree = number of remaining lists carrying the item
    std::vector<long long> degree(n_cand, 0);
    for (int u = 0; u < n_users; ++u) {
      for (const auto& s : initial.lists[u]) {
        int c = cand_index[s.item];
        if (!removed[c]) ++degree[c];
      }
    }
    long long d_max = 0;
    for (long long d : degree) d_max = std::max(d_max, d);
    if (d_max == 0) break;

    const int source = 0;
    const int cand0 = 1;
    const int user0 = cand0 + n_cand;
    const int sink = user0 + n_users;
    MaxFlow flow(sink + 1);
    // low-visibility items get proportionally larger source capacity
    for (int c = 0; c < n_cand; ++c) {
      if (removed[c] || degree[c] == 0) continue;
      flow.add_edge(source, cand0 + c,
                    std::max<long long>(1, d_max / degree[c]));
    }
    std::vector<std::vector<std::pair<int, int>>> match_edges(n_users);
    for (int u = 0; u < n_users; ++u) {
      for (const auto& s : initial.lists[u]) {
        int c = cand_index[s.item];
        if (removed[c]) continue;
        int e = flow.add_edge(cand0 + c, user0 + u, 1);
        match_edges[u].push_back({e, s.item});
      }
      flow.add_edge(user0 + u, sink, user_cap);
    }
    flow.solve(source, sink);

    for (int u = 0; u < n_users; ++u) {
      for (const auto& [edge, item] : match_edges[u]) {
        if (flow.flow_on(edge) > 0) {
          matched[u].push_back(item);
          removed[cand_index[item]] = 1;
        }
      }
    }
  }

  for (int u = 0; u < n_users; ++u) {
    const auto& list = initial.lists[u];
    int n = static_cast<int>(list.size());
    int take = std::min(cfg.k, n);
    std::vector<char> in_matched(n, 0);
    std::vector<int> matched_ranks;
    for (int r = 0; r < n; ++r) {
      for (int item : matched[u]) {
        if (list[r].item == item) {
          in_matched[r] = 1;
          matched_ranks.push_back(r);
          break;
        }
      }
    }
    sort_by_rank(matched_ranks);  // matched first, by original score
    auto& dst = out.lists[u];
    for (int r : matched_ranks) {
      if (static_cast<int>(dst.size()) < take) dst.push_back(list[r]);
    }
    for (int r = 0; r < n && static_cast<int>(dst.size()) < take; ++r) {
      if (!in_matched[r]) dst.push_back(list[r]);
    }
  }
}

}  // namespace

const char* rerank_method_name(RerankMethod m) {
  switch (m) {
    case RerankMethod::kDM: return "DM";
    case RerankMethod::kFASTAR: return "FA*IR";
    case RerankMethod::kXQUAD: return "xQuAD";
    case RerankMethod::kFAIRMATCH: return "FairMatch";
    case RerankMethod::kRANDOM: return "Random";
    case RerankMethod::kREVERSE: return "Reverse";
  }
  return "unknown";
}

RerankMethod parse_rerank_method(const std::string& name) {
  if (name == "DM" || name == "dm") return RerankMethod::kDM;
  if (name == "FASTAR" || name == "FA*IR" || name == "fastar") {
    return RerankMethod::kFASTAR;
  }
  if (name == "XQUAD" || name == "xQuAD" || name == "xquad") {
    return RerankMethod::kXQUAD;
  }
  if (name == "FAIRMATCH" || name == "FairMatch" || name == "fairmatch") {
    return RerankMethod::kFAIRMATCH;
  }
  if (name == "RANDOM" || name == "Random" || name == "random") {
    return RerankMethod::kRANDOM;
  }
  if (name == "REVERSE" || name == "Reverse" || name == "reverse") {
    return RerankMethod::kREVERSE;
  }
  throw config_error("unknown reranker method: " + name);
}

void RerankConfig::check() const {
  if (k < 1) throw config_error("reranker K must be >= 1");
  if (lambda < 0.0 || lambda > 1.0) {
    throw config_error("xQuAD lambda must be in [0, 1]");
  }
  if (protected_share && !(*protected_share > 0.0 && *protected_share < 1.0)) {
    throw config_error("FA*IR protected share must be in (0, 1)");
  }
  if (!(significance > 0.0 && significance < 1.0)) {
    throw config_error("FA*IR significance must be in (0, 1)");
  }
  if (iterations < 1) throw config_error("FairMatch iterations must be >= 1");
}

std::vector<int> fastar_min_protected(int k, double p, double a_sig) {
  std::vector<int> m_min(k + 1, 0);
  for (int prefix = 1; prefix <= k; ++prefix) {
    int t = 0;
    while (t <= prefix && !(binomial_cdf(t - 1, prefix, p) > a_sig)) ++t;
    m_min[prefix] = std::min(t, prefix);
  }
  return m_min;
}

long long dm_overflow_unit_cost(int n_users, int n, int k) {
  return static_cast<long long>(n_users) * n * k + 1;
}

RerankResult rerank(const RecommendationSet& initial, const RerankConfig& cfg,
                    const RerankContext& ctx) {
  cfg.check();
  if (cfg.k > initial.k) {
    throw config_error("reranker K exceeds the initial list size N");
  }
  for (const auto& list : initial.lists) {
    if (static_cast<int>(list.size()) > initial.k) {
      throw data_error("initial list longer than its declared size");
    }
  }

  RerankResult result;
  result.recs = make_output_shell(initial, cfg.k);
  switch (cfg.method) {
    case RerankMethod::kRANDOM:
      rerank_random(initial, cfg, result.recs);
      break;
    case RerankMethod::kREVERSE:
      rerank_reverse(initial, cfg, result.recs);
      break;
    case RerankMethod::kXQUAD:
      rerank_xquad(initial, cfg, ctx, result.recs);
      break;
    case RerankMethod::kFASTAR:
      rerank_fastar(initial, cfg, ctx, result.recs, result);
      break;
    case RerankMethod::kDM:
      rerank_dm(initial, cfg, result.recs, result);
      break;
    case RerankMethod::kFAIRMATCH:
      rerank_fairmatch(initial, cfg, result.recs);
      break;
  }
  for (int u = 0; u < result.recs.n_users; ++u) {
    if (static_cast<int>(result.recs.lists[u].size()) < cfg.k) {
      result.recs.shortened_users.push_back(u);
    }
  }
  if (cfg.method == RerankMethod::kFASTAR) {
    result.notes.push_back("FA*IR significance applied without multiple-test correction");
  }
  if (cfg.method == RerankMethod::kFAIRMATCH) {
    result.notes.push_back("FairMatch uses a degree-based capacity heuristic");
  }
  if (cfg.method == RerankMethod::kDM) {
    result.notes.push_back("DM edge costs are initial-list ranks");
    if (result.dm_overflow_used) {
      result.notes.push_back("DM used overflow capacity (targets too tight)");
    }
  }
  return result;
}

std::pair<RerankResult, double> run_timed(const RecommendationSet& initial,
                                          const RerankConfig& cfg,
                                          const RerankContext& ctx) {
  auto start = std::chrono::steady_clock::now();
  RerankResult result = rerank(initial, cfg, ctx);
  auto stop = std::chrono::steady_clock::now();
  double seconds = std::chrono::duration<double>(stop - start).count();
  return {std::move(result), seconds};
}

}  // namespace recfair
