#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "aortaseg/mincut.hpp"
#include "aortaseg/wallgraph.hpp"

namespace oracle {

/// Exhaustive minimum over all closed subsets (n <= ~20). Infinite-weight nodes are never selected.
inline double brute_force_min_closure(const std::vector<double>& w, const std::vector<aortaseg::Arc>& arcs) {
  const int n = static_cast<int>(w.size());
  double best = 0.0;  // empty set
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    for (const auto& a : arcs) {
      if ((mask >> a.tail & 1u) && !(mask >> a.head & 1u)) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    double cost = 0.0;
    for (int v = 0; v < n && ok; ++v) {
      if (!(mask >> v & 1u)) continue;
      if (std::isinf(w[static_cast<std::size_t>(v)])) ok = false;
      cost += w[static_cast<std::size_t>(v)];
    }
    if (ok) best = std::min(best, cost);
  }
  return best;
}

/// Exhaustive minimum s-t cut; nodes other than s and t are assigned to either side.
inline double brute_force_min_cut(const aortaseg::FlowNetwork& net) {
  const int n = net.node_count();
  const int s = net.source(), t = net.sink();
  std::vector<int> free_nodes;
  for (int v = 0; v < n; ++v)
    if (v != s && v != t) free_nodes.push_back(v);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 0; mask < (1u << free_nodes.size()); ++mask) {
    std::vector<char> side(static_cast<std::size_t>(n), 0);
    side[static_cast<std::size_t>(s)] = 1;
    for (std::size_t i = 0; i < free_nodes.size(); ++i) side[static_cast<std::size_t>(free_nodes[i])] = mask >> i & 1u;
    double cut = 0.0;
    for (const auto& a : net.arcs()) {
      if (side[static_cast<std::size_t>(a.from)] && !side[static_cast<std::size_t>(a.to)]) {
        cut += a.unbounded ? std::numeric_limits<double>::infinity() : a.capacity;
      }
    }
    best = std::min(best, cut);
  }
  return best;
}

/// Random small lattice with integer weights in [lo, hi], dims chosen so X*Y*Z <= max_nodes.
inline aortaseg::WallGraph random_small_graph(std::mt19937_64& rng, int max_nodes = 18, int lo = -10, int hi = 10) {
  std::uniform_int_distribution<int> pick_x(1, 6), pick_y(1, 2), pick_z(1, 6), pick_d(0, 2), coin(0, 1);
  int X, Y, Z;
  do {
    X = pick_x(rng);
    Y = pick_y(rng);
    Z = pick_z(rng);
  } while (X * Y * Z > max_nodes || X * Y * Z < 2);
  aortaseg::WallGraph g(X, Y, Z, pick_d(rng), pick_d(rng), coin(rng) == 1);
  std::uniform_int_distribution<int> wd(lo, hi);
  for (double& w : g.weights) w = wd(rng);
  return g;
}

}  // namespace oracle
