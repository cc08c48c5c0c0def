#pragma once

#include <algorithm>
#include <limits>
#include <queue>
#include <vector>

namespace recfair::detail {

// Dinic max flow on a small directed graph. Deterministic for a fixed
// edge-insertion order.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(n, -1), level_(n), iter_(n) {}

  int add_edge(int from, int to, long long cap) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({to, head_[from], cap});
    head_[from] = id;
    edges_.push_back({from, head_[to], 0});
    head_[to] = id + 1;
    return id;
  }

  long long flow_on(int edge_id) const { return edges_[edge_id ^ 1].cap; }

  long long solve(int s, int t) {
    long long total = 0;
    while (bfs(s, t)) {
      iter_ = head_;
      long long f;
      while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) {
        total += f;
      }
    }
    return total;
  }

 private:
  struct Edge {
    int to;
    int next;
    long long cap;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int e = head_[v]; e != -1; e = edges_[e].next) {
        if (edges_[e].cap > 0 && level_[edges_[e].to] < 0) {
          level_[edges_[e].to] = level_[v] + 1;
          q.push(edges_[e].to);
        }
      }
    }
    return level_[t] >= 0;
  }

  long long dfs(int v, int t, long long limit) {
    if (v == t) return limit;
    for (int& e = iter_[v]; e != -1; e = edges_[e].next) {
      Edge& ed = edges_[e];
      if (ed.cap > 0 && level_[ed.to] == level_[v] + 1) {
        long long d = dfs(ed.to, t, std::min(limit, ed.cap));
        if (d > 0) {
          ed.cap -= d;
          edges_[e ^ 1].cap += d;
          return d;
        }
      }
    }
    return 0;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

// Successive-shortest-path min cost flow with Dijkstra over reduced costs.
// All edge costs must be non-negative.
class MinCostFlow {
 public:
  explicit MinCostFlow(int n) : head_(n, -1), potential_(n), dist_(n), prev_edge_(n) {}

  int add_edge(int from, int to, long long cap, long long cost) {
    int id = static_cast<int>(edges_.size());
    edges_.push_back({to, head_[from], cap, cost});
    head_[from] = id;
    edges_.push_back({from, head_[to], 0, -cost});
    head_[to] = id + 1;
    return id;
  }

  long long flow_on(int edge_id) const { return edges_[edge_id ^ 1].cap; }

  // Pushes up to max_flow units; returns (flow, cost).
  std::pair<long long, long long> solve(int s, int t, long long max_flow) {
    long long flow = 0;
    long long cost = 0;
    std::fill(potential_.begin(), potential_.end(), 0LL);
    while (flow < max_flow) {
      if (!dijkstra(s, t)) break;
      for (std::size_t v = 0; v < potential_.size(); ++v) {
        if (dist_[v] < kInf) potential_[v] += dist_[v];
      }
      long long push = max_flow - flow;
      for (int v = t; v != s; v = edges_[prev_edge_[v] ^ 1].to) {
        push = std::min(push, edges_[prev_edge_[v]].cap);
      }
      for (int v = t; v != s; v = edges_[prev_edge_[v] ^ 1].to) {
        edges_[prev_edge_[v]].cap -= push;
        edges_[prev_edge_[v] ^ 1].cap += push;
        cost += push * edges_[prev_edge_[v]].cost;
      }
      flow += push;
    }
    return {flow, cost};
  }

 private:
  struct Edge {
    int to;
    int next;
    long long cap;
    long long cost;
  };

  static constexpr long long kInf = std::numeric_limits<long long>::max() / 4;

  bool dijkstra(int s, int t) {
    std::fill(dist_.begin(), dist_.end(), kInf);
    dist_[s] = 0;
    using Item = std::pair<long long, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0, s});
    while (!pq.empty()) {
      auto [d, v] = pq.top();
      pq.pop();
      if (d > dist_[v]) continue;
      for (int e = head_[v]; e != -1; e = edges_[e].next) {
        const Edge& ed = edges_[e];
        if (ed.cap <= 0) continue;
        long long nd = d + ed.cost + potential_[v] - potential_[ed.to];
        if (nd < dist_[ed.to]) {
          dist_[ed.to] = nd;
          prev_edge_[ed.to] = e;
          pq.push({nd, ed.to});
        }
      }
    }
    return dist_[t] < kInf;
  }

  std::vector<Edge> edges_;
  std::vector<int> head_;
  std::vector<long long> potential_;
  std::vector<long long> dist_;
  std::vector<int> prev_edge_;
};

}  // namespace recfair::detail
