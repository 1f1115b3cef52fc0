#include "aortaseg/mincut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace aortaseg {

FlowNetwork::FlowNetwork(int inner_nodes) : inner_(inner_nodes) {
  if (inner_nodes < 0) throw std::invalid_argument("flow network: negative node count");
}

void FlowNetwork::add_arc(int from, int to, double capacity) {
  if (from < 0 || from >= node_count() || to < 0 || to >= node_count()) {
    throw std::out_of_range("flow network: arc endpoint out of range");
  }
  if (to == source() || from == sink()) throw std::invalid_argument("flow network: arc into s or out of t");
  if (std::isnan(capacity) || capacity < 0.0) throw std::invalid_argument("flow network: negative capacity");
  const bool unbounded = std::isinf(capacity);
  if (!unbounded) finite_sum_ += capacity;
  arcs_.push_back({from, to, unbounded ? 0.0 : capacity, unbounded});
}

namespace {

struct Dinic {
  struct Edge {
    int to;
    int rev;
    double cap;
  };

  std::vector<std::vector<Edge>> adj;
  std::vector<int> level;
  std::vector<std::size_t> next;
  double tol = 0.0;

  explicit Dinic(int n) : adj(static_cast<std::size_t>(n)), level(static_cast<std::size_t>(n)), next(static_cast<std::size_t>(n)) {}

  void add(int u, int v, double cap) {
    auto& au = adj[static_cast<std::size_t>(u)];
    auto& av = adj[static_cast<std::size_t>(v)];
    au.push_back({v, static_cast<int>(av.size()), cap});
    av.push_back({u, static_cast<int>(au.size()) - 1, 0.0});
  }

  bool bfs(int s, int t) {
    std::fill(level.begin(), level.end(), -1);
    std::queue<int> q;
    level[static_cast<std::size_t>(s)] = 0;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (const Edge& e : adj[static_cast<std::size_t>(u)]) {
        if (e.cap > tol && level[static_cast<std::size_t>(e.to)] < 0) {
          level[static_cast<std::size_t>(e.to)] = level[static_cast<std::size_t>(u)] + 1;
          q.push(e.to);
        }
      }
    }
    return level[static_cast<std::size_t>(t)] >= 0;
  }

  double dfs(int u, int t, double pushed) {
    if (u == t) return pushed;
    auto& edges = adj[static_cast<std::size_t>(u)];
    for (std::size_t& i = next[static_cast<std::size_t>(u)]; i < edges.size(); ++i) {
      Edge& e = edges[i];
      if (e.cap <= tol || level[static_cast<std::size_t>(e.to)] != level[static_cast<std::size_t>(u)] + 1) continue;
      const double got = dfs(e.to, t, std::min(pushed, e.cap));
      if (got > 0.0) {
        e.cap -= got;
        adj[static_cast<std::size_t>(e.to)][static_cast<std::size_t>(e.rev)].cap += got;
        return got;
      }
    }
    return 0.0;
  }
};

}  // namespace

MaxFlowResult max_flow(const FlowNetwork& net) {
  const int n = net.node_count();
  const int s = net.source();
  const int t = net.sink();
  const double inf = net.unbounded_capacity();
  Dinic d(n);
  double largest = 0.0;
  for (const auto& a : net.arcs()) {
    d.add(a.from, a.to, a.unbounded ? inf : a.capacity);
    if (!a.unbounded) largest = std::max(largest, a.capacity);
  }
  d.tol = largest * 1e-12;

  MaxFlowResult res;
  while (d.bfs(s, t)) {
    std::fill(d.next.begin(), d.next.end(), 0);
    while (true) {
      const double f = d.dfs(s, t, std::numeric_limits<double>::infinity());
      if (f <= 0.0) break;
      res.value += f;
      if (res.value >= inf) throw std::logic_error("max flow: unbounded s-t path");
    }
  }
  // source side of the cut: residual reachability from s
  res.source_side.assign(static_cast<std::size_t>(n), 0);
  std::vector<int> stack{s};
  res.source_side[static_cast<std::size_t>(s)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (const auto& e : d.adj[static_cast<std::size_t>(u)]) {
      if (e.cap > d.tol && !res.source_side[static_cast<std::size_t>(e.to)]) {
        res.source_side[static_cast<std::size_t>(e.to)] = 1;
        stack.push_back(e.to);
      }
    }
  }
  // sink side: reverse residual reachability from t
  res.sink_side.assign(static_cast<std::size_t>(n), 0);
  res.sink_side[static_cast<std::size_t>(t)] = 1;
  stack.push_back(t);
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (const auto& back : d.adj[static_cast<std::size_t>(v)]) {
      const auto& e = d.adj[static_cast<std::size_t>(back.to)][static_cast<std::size_t>(back.rev)];
      if (e.cap > d.tol && !res.sink_side[static_cast<std::size_t>(back.to)]) {
        res.sink_side[static_cast<std::size_t>(back.to)] = 1;
        stack.push_back(back.to);
      }
    }
  }
  return res;
}

FlowNetwork closure_reduce(const std::vector<double>& weights, const std::vector<Arc>& arcs) {
  const int n = static_cast<int>(weights.size());
  FlowNetwork net(n);
  for (int v = 0; v < n; ++v) {
    const double w = weights[static_cast<std::size_t>(v)];
    if (std::isnan(w) || w == -std::numeric_limits<double>::infinity()) {
      throw std::invalid_argument("closure: weight must be finite or +inf");
    }
    if (std::isinf(w)) {
      net.add_arc(v, net.sink(), w);
    } else if (w < 0.0) {
      net.add_arc(net.source(), v, -w);
    } else if (w > 0.0) {
      net.add_arc(v, net.sink(), w);
    }
  }
  for (const Arc& a : arcs) net.add_arc(a.tail, a.head, std::numeric_limits<double>::infinity());
  return net;
}

FlowNetwork closure_reduce(const WallGraph& g) { return closure_reduce(g.weights, build_arcs(g)); }

ClosedSet min_closed_set(const std::vector<double>& weights, const std::vector<Arc>& arcs, TieBreak tie) {
  const FlowNetwork net = closure_reduce(weights, arcs);
  const MaxFlowResult flow = max_flow(net);
  ClosedSet cs;
  cs.members.assign(weights.size(), 0);
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t v = 0; v < weights.size(); ++v) {
    const bool in = tie == TieBreak::Smallest ? flow.source_side[v] != 0 : flow.sink_side[v] == 0;
    if (!in) continue;
    cs.members[v] = 1;
    ++cs.size;
    const double w = weights[v];
    const double t = sum + w;
    comp += std::abs(sum) >= std::abs(w) ? (sum - t) + w : (w - t) + sum;
    sum = t;
  }
  cs.cost = sum + comp;
  if (cs.size == 0) cs.diagnostic = "minimal closed set is empty (no negative-weight node worth selecting)";
  return cs;
}

ClosedSet min_closed_set(const WallGraph& g, TieBreak tie) { return min_closed_set(g.weights, build_arcs(g), tie); }

bool is_closed(const std::vector<char>& members, const std::vector<Arc>& arcs) {
  for (const Arc& a : arcs) {
    if (members[static_cast<std::size_t>(a.tail)] && !members[static_cast<std::size_t>(a.head)]) return false;
  }
  return true;
}

std::vector<int> closure_to_surface(const ClosedSet& cs, const WallGraph& g, int layer) {
  if (cs.members.size() != g.node_count()) throw std::invalid_argument("closed set/graph size mismatch");
  if (layer < 0 || layer >= g.layers) throw std::out_of_range("closure_to_surface: layer out of range");
  std::vector<int> r(static_cast<std::size_t>(g.rays), -1);
  for (int x = 0; x < g.rays; ++x) {
    for (int z = g.samples - 1; z >= 0; --z) {
      if (cs.members[static_cast<std::size_t>(g.node(x, layer, z))]) {
        r[static_cast<std::size_t>(x)] = z;
        break;
      }
    }
    if (r[static_cast<std::size_t>(x)] < 0) {
      throw InfeasibleSurface("infeasible surface: column " + std::to_string(x) + " has no member");
    }
  }
  return r;
}

}  // namespace aortaseg
