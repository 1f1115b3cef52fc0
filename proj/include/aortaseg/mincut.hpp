#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "aortaseg/wallgraph.hpp"

namespace aortaseg {

class InfeasibleSurface : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// s-t network over `inner` graph nodes plus source (index inner) and sink (inner + 1).
/// Unbounded arcs are realised with a capacity exceeding the sum of all finite capacities by one.
class FlowNetwork {
 public:
  struct ArcInfo {
    int from = 0;
    int to = 0;
    double capacity = 0.0;
    bool unbounded = false;
  };

  explicit FlowNetwork(int inner_nodes);

  int source() const { return inner_; }
  int sink() const { return inner_ + 1; }
  int inner_nodes() const { return inner_; }
  int node_count() const { return inner_ + 2; }

  /// `capacity` = +inf adds an unbounded arc.
  void add_arc(int from, int to, double capacity);
  const std::vector<ArcInfo>& arcs() const { return arcs_; }
  double finite_capacity_sum() const { return finite_sum_; }
  double unbounded_capacity() const { return finite_sum_ + 1.0; }

 private:
  int inner_;
  double finite_sum_ = 0.0;
  std::vector<ArcInfo> arcs_;
};

struct MaxFlowResult {
  double value = 0.0;
  std::vector<char> source_side;  // indexed by network node, s included
  std::vector<char> sink_side;    // nodes that still reach t in the residual graph, t included
};

/// Dinic's algorithm. The returned partition is the set reachable from s in the final residual graph.
MaxFlowResult max_flow(const FlowNetwork& net);

/// Standard closure-to-cut reduction; infinite weights tie the node to t with an unbounded arc.
FlowNetwork closure_reduce(const std::vector<double>& weights, const std::vector<Arc>& arcs);
FlowNetwork closure_reduce(const WallGraph& g);

struct ClosedSet {
  std::vector<char> members;
  double cost = 0.0;
  std::size_t size = 0;
  std::string diagnostic;  // non-empty when the optimum is the empty set

  bool empty() const { return size == 0; }
  bool contains(std::size_t node) const { return members[node] != 0; }
};

/// Which optimum to return when several closed sets share the minimal cost.
enum class TieBreak { Smallest, Largest };

ClosedSet min_closed_set(const std::vector<double>& weights, const std::vector<Arc>& arcs,
                         TieBreak tie = TieBreak::Smallest);
ClosedSet min_closed_set(const WallGraph& g, TieBreak tie = TieBreak::Smallest);

bool is_closed(const std::vector<char>& members, const std::vector<Arc>& arcs);

/// r[x] = highest member index in column (x, layer). Throws InfeasibleSurface on an empty column.
std::vector<int> closure_to_surface(const ClosedSet& cs, const WallGraph& g, int layer = 1);

}  // namespace aortaseg
