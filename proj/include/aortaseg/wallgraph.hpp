#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

#include "aortaseg/config.hpp"
#include "aortaseg/image.hpp"
#include "aortaseg/unfold.hpp"

namespace aortaseg {

enum class ThrombusMeanMode { Ring, Fixed };

struct TrackingParams {
  int dx = 2;   // max radial step between neighbouring rays, samples
  int dy = 2;   // max radial step between consecutive slices, samples
  int dp = 4;   // forbidden zone margin above the fixed contour, samples
  bool wrap = true;
  ThrombusMeanMode thrombus_mode = ThrombusMeanMode::Ring;
  double fixed_thrombus_mean = 40.0;
  int ring_margin = 2;               // samples skipped next to the lumen when estimating the thrombus mean
  double wall_sigma = 1.0;           // Gaussian smoothing (px) of slices before unfolding for wall costs
  double center_square = 5.0;        // side of the center-disambiguation square, mm
  double eccentricity_trigger = 0.6;
  double residual_trigger = 0.15;
  bool outer_ties = true;            // among equally cheap surfaces take the outermost
  UnfoldParams unfold;

  void validate() const;
  static TrackingParams from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

/// Per-ray, per-radius table; width = rays (x), height = radial samples (z).
using CostTable = Grid2D<double>;

inline constexpr double kInfiniteWeight = std::numeric_limits<double>::infinity();

/// c(x, z) = |sample - thrombus_mean|.
CostTable base_costs(const UnfoldedSlice& u, double thrombus_mean);

/// w(x, 0) = c(x, 0); w(x, z) = c(x, z) - c(x, z - 1). Prefix sums telescope back to c.
CostTable differenced_weights(const CostTable& c);

/// Node-weighted lattice of rays x layers x radial samples. Arcs are implied by dx, dy and wrap.
struct WallGraph {
  int rays = 0;
  int layers = 2;
  int samples = 0;
  int dx = 0;
  int dy = 0;
  bool wrap = true;
  std::vector<double> weights;  // kInfiniteWeight marks nodes that may never be selected
  double forcing = 0.0;         // magnitude of the negative weight put on the fixed prefix of layer 0

  WallGraph() = default;
  WallGraph(int rays_, int layers_, int samples_, int dx_, int dy_, bool wrap_);

  std::size_t node_count() const { return weights.size(); }
  int node(int x, int y, int z) const { return (x * layers + y) * samples + z; }
  double& weight(int x, int y, int z) { return weights[static_cast<std::size_t>(node(x, y, z))]; }
  double weight(int x, int y, int z) const { return weights[static_cast<std::size_t>(node(x, y, z))]; }
};

enum class ArcKind { Z, XZ, YZ };

struct Arc {
  int tail = 0;
  int head = 0;
  ArcKind kind = ArcKind::Z;
  bool operator==(const Arc&) const = default;
};

/// Arc families in a fixed order: intra-column (z -> z-1), then neighbouring rays
/// (x+-1, max(0, z-dx), wrapping X-1 <-> 0 when enabled and X > 2), then neighbouring
/// layers (y+-1, max(0, z-dy)); each family enumerated lexicographically in (x, y, z).
std::vector<Arc> build_arcs(int rays, int layers, int samples, int dx, int dy, bool wrap);
std::vector<Arc> build_arcs(const WallGraph& g);

/// Smallest power of two exceeding any cost change a layer-1 surface can make.
double forcing_weight(const CostTable& w1);

/// Two-layer graph: layer 0 holds -forcing up to fixed[x] and infinity above; layer 1 holds
/// w1 with infinity above fixed[x] + dp. `forcing` <= 0 selects forcing_weight(w1).
WallGraph apply_fixed_and_forbidden(const CostTable& w1, std::span<const int> fixed, int dp, int dx, int dy,
                                    bool wrap, double forcing = 0.0);

struct ThrombusEstimate {
  double mean = 0.0;
  std::size_t samples = 0;
  bool fallback = false;
  std::string note;
};

/// Mean of the ring lumen_extent[x] + margin < z <= fixed[x] on the source slice, ignoring
/// samples above `calcium_ceiling`. Falls back to `fallback_mean` when the ring is empty.
ThrombusEstimate estimate_thrombus_mean(const UnfoldedSlice& source, std::span<const int> lumen_extent,
                                        std::span<const int> fixed, double calcium_ceiling, double fallback_mean,
                                        int margin = 0);

/// Text dump of one layer's weights, one ray per line (debugging/fixtures).
std::string dump_layer(const WallGraph& g, int layer);

}  // namespace aortaseg
