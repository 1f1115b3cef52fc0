#include "aortaseg/wallgraph.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace aortaseg {

void TrackingParams::validate() const {
  if (dx < 0 || dy < 0 || dp < 0) throw std::invalid_argument("dx, dy and dp must be >= 0");
  if (dy >= 5) throw std::invalid_argument("dy must stay below 5 to bind consecutive slices");
  if (ring_margin < 0) throw std::invalid_argument("ring_margin must be >= 0");
  if (!(wall_sigma >= 0.0)) throw std::invalid_argument("wall_sigma must be >= 0");
  if (!(center_square > 0.0)) throw std::invalid_argument("center_square must be > 0");
  if (!(eccentricity_trigger >= 0.0 && eccentricity_trigger <= 1.0)) {
    throw std::invalid_argument("eccentricity_trigger must be in [0, 1]");
  }
  if (!(residual_trigger >= 0.0 && residual_trigger <= 1.0)) {
    throw std::invalid_argument("residual_trigger must be in [0, 1]");
  }
  unfold.validate();
}

const std::vector<std::string>& TrackingParams::config_keys() {
  static const std::vector<std::string> keys = {
      "dx", "dy", "dp", "wrap", "thrombus_mean_mode", "fixed_thrombus_mean", "ring_margin", "wall_sigma",
      "center_square", "eccentricity_trigger", "residual_trigger", "outer_ties", "rays", "radial_samples", "dr", "theta0"};
  return keys;
}

TrackingParams TrackingParams::from_config(const Config& cfg) {
  TrackingParams p;
  p.dx = cfg.get_int("dx", p.dx);
  p.dy = cfg.get_int("dy", p.dy);
  p.dp = cfg.get_int("dp", p.dp);
  p.wrap = cfg.get_bool("wrap", p.wrap);
  const std::string mode = cfg.get_string("thrombus_mean_mode", "ring");
  if (mode == "ring") {
    p.thrombus_mode = ThrombusMeanMode::Ring;
  } else if (mode == "fixed") {
    p.thrombus_mode = ThrombusMeanMode::Fixed;
  } else {
    throw std::invalid_argument("thrombus_mean_mode must be 'ring' or 'fixed'");
  }
  p.fixed_thrombus_mean = cfg.get_double("fixed_thrombus_mean", p.fixed_thrombus_mean);
  p.ring_margin = cfg.get_int("ring_margin", p.ring_margin);
  p.wall_sigma = cfg.get_double("wall_sigma", p.wall_sigma);
  p.center_square = cfg.get_double("center_square", p.center_square);
  p.eccentricity_trigger = cfg.get_double("eccentricity_trigger", p.eccentricity_trigger);
  p.residual_trigger = cfg.get_double("residual_trigger", p.residual_trigger);
  p.outer_ties = cfg.get_bool("outer_ties", p.outer_ties);
  p.unfold.rays = cfg.get_int("rays", p.unfold.rays);
  p.unfold.radial_samples = cfg.get_int("radial_samples", p.unfold.radial_samples);
  p.unfold.dr = cfg.get_double("dr", p.unfold.dr);
  p.unfold.theta0 = cfg.get_double("theta0", p.unfold.theta0);
  p.validate();
  return p;
}

CostTable base_costs(const UnfoldedSlice& u, double thrombus_mean) {
  if (!std::isfinite(thrombus_mean)) throw std::invalid_argument("thrombus mean must be finite");
  CostTable c(u.rays(), u.radial_samples());
  for (std::size_t n = 0; n < c.data.size(); ++n) c.data[n] = std::abs(u.samples.data[n] - thrombus_mean);
  return c;
}

CostTable differenced_weights(const CostTable& c) {
  CostTable w(c.width, c.height);
  for (int x = 0; x < c.width; ++x) {
    for (int z = 0; z < c.height; ++z) w(x, z) = z == 0 ? c(x, 0) : c(x, z) - c(x, z - 1);
  }
  return w;
}

WallGraph::WallGraph(int rays_, int layers_, int samples_, int dx_, int dy_, bool wrap_)
    : rays(rays_), layers(layers_), samples(samples_), dx(dx_), dy(dy_), wrap(wrap_) {
  if (rays < 1 || layers < 1 || samples < 1) throw std::invalid_argument("graph dims must be >= 1");
  if (dx < 0 || dy < 0) throw std::invalid_argument("dx and dy must be >= 0");
  weights.assign(static_cast<std::size_t>(rays) * layers * samples, 0.0);
}

std::vector<Arc> build_arcs(int rays, int layers, int samples, int dx, int dy, bool wrap) {
  std::vector<Arc> arcs;
  auto id = [&](int x, int y, int z) { return (x * layers + y) * samples + z; };
  for (int x = 0; x < rays; ++x) {
    for (int y = 0; y < layers; ++y) {
      for (int z = 1; z < samples; ++z) arcs.push_back({id(x, y, z), id(x, y, z - 1), ArcKind::Z});
    }
  }
  const bool closed = wrap && rays > 2;
  for (int x = 0; x < rays; ++x) {
    for (int y = 0; y < layers; ++y) {
      for (int z = 0; z < samples; ++z) {
        const int zt = std::max(0, z - dx);
        if (x + 1 < rays) {
          arcs.push_back({id(x, y, z), id(x + 1, y, zt), ArcKind::XZ});
        } else if (closed) {
          arcs.push_back({id(x, y, z), id(0, y, zt), ArcKind::XZ});
        }
        if (x >= 1) {
          arcs.push_back({id(x, y, z), id(x - 1, y, zt), ArcKind::XZ});
        } else if (closed) {
          arcs.push_back({id(x, y, z), id(rays - 1, y, zt), ArcKind::XZ});
        }
      }
    }
  }
  for (int x = 0; x < rays; ++x) {
    for (int y = 0; y < layers; ++y) {
      for (int z = 0; z < samples; ++z) {
        const int zt = std::max(0, z - dy);
        if (y + 1 < layers) arcs.push_back({id(x, y, z), id(x, y + 1, zt), ArcKind::YZ});
        if (y >= 1) arcs.push_back({id(x, y, z), id(x, y - 1, zt), ArcKind::YZ});
      }
    }
  }
  return arcs;
}

std::vector<Arc> build_arcs(const WallGraph& g) {
  return build_arcs(g.rays, g.layers, g.samples, g.dx, g.dy, g.wrap);
}

double forcing_weight(const CostTable& w1) {
  double span = 1.0;
  for (int x = 0; x < w1.width; ++x) {
    double prefix = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    for (int z = 0; z < w1.height; ++z) {
      prefix += w1(x, z);
      lo = std::min(lo, prefix);
      hi = std::max(hi, prefix);
    }
    span += hi - lo;
  }
  return std::exp2(std::ceil(std::log2(span)) + 1.0);
}

WallGraph apply_fixed_and_forbidden(const CostTable& w1, std::span<const int> fixed, int dp, int dx, int dy,
                                    bool wrap, double forcing) {
  if (static_cast<int>(fixed.size()) != w1.width) throw std::invalid_argument("fixed contour/ray count mismatch");
  if (dp < 0) throw std::invalid_argument("dp must be >= 0");
  WallGraph g(w1.width, 2, w1.height, dx, dy, wrap);
  g.forcing = forcing > 0.0 ? forcing : forcing_weight(w1);
  for (int x = 0; x < g.rays; ++x) {
    const int f = fixed[static_cast<std::size_t>(x)];
    if (f < 0 || f >= g.samples) throw std::invalid_argument("fixed contour index out of range");
    for (int z = 0; z < g.samples; ++z) {
      g.weight(x, 0, z) = z <= f ? -g.forcing : kInfiniteWeight;
      g.weight(x, 1, z) = static_cast<long>(z) > static_cast<long>(f) + dp ? kInfiniteWeight : w1(x, z);
    }
  }
  return g;
}

ThrombusEstimate estimate_thrombus_mean(const UnfoldedSlice& source, std::span<const int> lumen_extent,
                                        std::span<const int> fixed, double calcium_ceiling, double fallback_mean,
                                        int margin) {
  ThrombusEstimate est;
  const int rays = source.rays();
  if (static_cast<int>(lumen_extent.size()) != rays || static_cast<int>(fixed.size()) != rays) {
    throw std::invalid_argument("ring estimate: ray count mismatch");
  }
  double sum = 0.0;
  for (int x = 0; x < rays; ++x) {
    const int z_hi = std::min(fixed[static_cast<std::size_t>(x)], source.radial_samples() - 1);
    for (int z = std::max(0, lumen_extent[static_cast<std::size_t>(x)] + 1 + margin); z <= z_hi; ++z) {
      const double v = source.at(x, z);
      if (v > calcium_ceiling) continue;
      sum += v;
      ++est.samples;
    }
  }
  if (est.samples == 0) {
    est.mean = fallback_mean;
    est.fallback = true;
    est.note = "thrombus ring empty; using configured mean";
  } else {
    est.mean = sum / static_cast<double>(est.samples);
  }
  return est;
}

std::string dump_layer(const WallGraph& g, int layer) {
  std::ostringstream out;
  for (int x = 0; x < g.rays; ++x) {
    for (int z = 0; z < g.samples; ++z) {
      const double w = g.weight(x, layer, z);
      if (z) out << ' ';
      if (std::isinf(w)) {
        out << "inf";
      } else {
        out << w;
      }
    }
    out << '\n';
  }
  return out.str();
}

}  // namespace aortaseg
