#include "aortaseg/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace aortaseg {

namespace {

const char* shape_name(CenterlineShape s) {
  switch (s) {
    case CenterlineShape::Straight: return "straight";
    case CenterlineShape::Arc: return "arc";
    case CenterlineShape::Helix: return "helix";
  }
  return "?";
}

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw std::invalid_argument("phantom " + field + ": " + what);
}

double deg(double radians) { return radians * 180.0 / kPi; }
double rad(double degrees) { return degrees * kPi / 180.0; }

}  // namespace

const std::vector<std::string>& PhantomSpec::config_keys() {
  static const std::vector<std::string> keys = {
      "shape", "length", "arc_radius", "helix_radius", "helix_pitch", "end_margin", "lumen_radius",
      "lumen_eccentricity", "lumen_angle", "outer_radius", "bulge_center", "bulge_amplitude", "bulge_width",
      "wall_offset", "wall_offset_angle", "level_lumen", "level_thrombus", "level_tissue", "level_calcium",
      "noise_sigma", "calcium_count", "calcium_radius", "spacing", "volume_margin", "centerline_spacing", "seed"};
  return keys;
}

PhantomSpec PhantomSpec::from_config(const Config& cfg) {
  PhantomSpec s;
  const std::string shape = cfg.get_string("shape", shape_name(s.shape));
  if (shape == "straight") {
    s.shape = CenterlineShape::Straight;
  } else if (shape == "arc") {
    s.shape = CenterlineShape::Arc;
  } else if (shape == "helix") {
    s.shape = CenterlineShape::Helix;
  } else {
    throw std::invalid_argument("phantom shape: unknown value '" + shape + "' (straight|arc|helix)");
  }
  s.length = cfg.get_double("length", s.length);
  s.arc_radius = cfg.get_double("arc_radius", s.arc_radius);
  s.helix_radius = cfg.get_double("helix_radius", s.helix_radius);
  s.helix_pitch = cfg.get_double("helix_pitch", s.helix_pitch);
  s.end_margin = cfg.get_double("end_margin", s.end_margin);
  s.lumen_radius = cfg.get_double("lumen_radius", s.lumen_radius);
  s.lumen_eccentricity = cfg.get_double("lumen_eccentricity", s.lumen_eccentricity);
  s.lumen_angle = rad(cfg.get_double("lumen_angle", deg(s.lumen_angle)));
  s.outer_radius = cfg.get_double("outer_radius", s.outer_radius);
  s.bulge_center = cfg.get_double("bulge_center", s.bulge_center);
  s.bulge_amplitude = cfg.get_double("bulge_amplitude", s.bulge_amplitude);
  s.bulge_width = cfg.get_double("bulge_width", s.bulge_width);
  s.wall_offset = cfg.get_double("wall_offset", s.wall_offset);
  s.wall_offset_angle = rad(cfg.get_double("wall_offset_angle", deg(s.wall_offset_angle)));
  s.level_lumen = cfg.get_double("level_lumen", s.level_lumen);
  s.level_thrombus = cfg.get_double("level_thrombus", s.level_thrombus);
  s.level_tissue = cfg.get_double("level_tissue", s.level_tissue);
  s.level_calcium = cfg.get_double("level_calcium", s.level_calcium);
  s.noise_sigma = cfg.get_double("noise_sigma", s.noise_sigma);
  s.calcium_count = cfg.get_int("calcium_count", s.calcium_count);
  s.calcium_radius = cfg.get_double("calcium_radius", s.calcium_radius);
  if (cfg.has("spacing")) {
    const auto sp = cfg.get_doubles("spacing", 3);
    s.spacing = {sp[0], sp[1], sp[2]};
  }
  s.volume_margin = cfg.get_double("volume_margin", s.volume_margin);
  s.centerline_spacing = cfg.get_double("centerline_spacing", s.centerline_spacing);
  const double seed = cfg.get_double("seed", static_cast<double>(s.seed));
  require(seed >= 0 && seed == std::floor(seed), "seed", "must be a non-negative integer");
  s.seed = static_cast<std::uint64_t>(seed);
  return s;
}

void PhantomSpec::validate() const {
  require(length > 0.0, "length", "must be positive");
  require(end_margin >= 0.0, "end_margin", "must be non-negative");
  require(lumen_radius > 0.0, "lumen_radius", "must be positive");
  require(lumen_eccentricity >= 0.0 && lumen_eccentricity < 1.0, "lumen_eccentricity", "must be in [0, 1)");
  require(outer_radius > 0.0, "outer_radius", "must be positive");
  require(bulge_width > 0.0, "bulge_width", "must be positive");
  require(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0, "spacing", "must be positive");
  require(noise_sigma >= 0.0, "noise_sigma", "must be non-negative");
  require(calcium_count >= 0, "calcium_count", "must be non-negative");
  require(calcium_radius > 0.0, "calcium_radius", "must be positive");
  require(volume_margin >= 0.0, "volume_margin", "must be non-negative");
  require(centerline_spacing > 0.0, "centerline_spacing", "must be positive");
  if (shape == CenterlineShape::Arc) require(arc_radius > 0.0, "arc_radius", "must be positive");
  if (shape == CenterlineShape::Helix) {
    require(helix_radius > 0.0, "helix_radius", "must be positive");
    require(helix_pitch > 0.0, "helix_pitch", "must be positive");
  }

  // The wall must enclose the lumen with at least 0.5 mm to spare everywhere.
  const double a = lumen_radius;
  const double b = lumen_radius * std::sqrt(1.0 - lumen_eccentricity * lumen_eccentricity);
  const Vec2 o{wall_offset * std::cos(wall_offset_angle), wall_offset * std::sin(wall_offset_angle)};
  double max_outer = 0.0;
  for (double s = -end_margin; s <= length + end_margin + 1e-9; s += 0.5) {
    const double ro = outer_radius + bulge_amplitude * std::exp(-0.5 * std::pow((s - bulge_center) / bulge_width, 2));
    max_outer = std::max(max_outer, ro);
    double gap = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 360; ++k) {
      const double t = 2.0 * kPi * k / 360.0;
      const double eu = a * std::cos(t);
      const double ev = b * std::sin(t);
      const Vec2 q{eu * std::cos(lumen_angle) - ev * std::sin(lumen_angle),
                   eu * std::sin(lumen_angle) + ev * std::cos(lumen_angle)};
      gap = std::min(gap, ro - norm(q - o));
    }
    if (gap < 0.5 - 1e-9) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "wall-lumen gap %.3f mm < 0.5 mm at s=%.1f mm (outer radius %.3f)", gap, s, ro);
      throw std::invalid_argument(std::string("phantom outer_radius: ") + buf);
    }
  }
  if (shape == CenterlineShape::Arc) {
    require(arc_radius > max_outer + std::abs(wall_offset), "arc_radius", "must exceed the outer radius");
  }
}

GroundTruth::GroundTruth(const PhantomSpec& spec) : spec_(spec) {
  spec_.validate();
  s_min_ = -spec_.end_margin;
  const double s_max = spec_.length + spec_.end_margin;
  const int n = static_cast<int>(std::ceil((s_max - s_min_) / ds_)) + 1;
  samples_.resize(static_cast<std::size_t>(n));
  tangents_.resize(samples_.size());
  u_axes_.resize(samples_.size());
  for (int k = 0; k < n; ++k) {
    const double s = s_min_ + k * ds_;
    samples_[static_cast<std::size_t>(k)] = analytic_point(s);
    tangents_[static_cast<std::size_t>(k)] = normalized(analytic_point(s + 1e-3) - analytic_point(s - 1e-3));
  }

  // Start the frame at s = 0 the same way MPR planes do, then transport both ways.
  const int k0 = static_cast<int>(std::lround(-s_min_ / ds_));
  const Vec3 t0 = tangents_[static_cast<std::size_t>(k0)];
  const Vec3 candidates[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(dot(candidates[a], t0)) < std::abs(dot(candidates[best], t0)) - 1e-12) best = a;
  }
  u_axes_[static_cast<std::size_t>(k0)] = normalized(candidates[best] - t0 * dot(candidates[best], t0));
  auto transport = [&](int from, int to) {
    const Vec3& u = u_axes_[static_cast<std::size_t>(from)];
    const Vec3& t = tangents_[static_cast<std::size_t>(to)];
    u_axes_[static_cast<std::size_t>(to)] = normalized(u - t * dot(u, t));
  };
  for (int k = k0 + 1; k < n; ++k) transport(k - 1, k);
  for (int k = k0 - 1; k >= 0; --k) transport(k + 1, k);
}

Vec3 GroundTruth::analytic_point(double s) const {
  switch (spec_.shape) {
    case CenterlineShape::Straight:
      return {0.0, 0.0, s};
    case CenterlineShape::Arc: {
      const double r = spec_.arc_radius;
      return {r - r * std::cos(s / r), 0.0, r * std::sin(s / r)};
    }
    case CenterlineShape::Helix: {
      const double rho = spec_.helix_radius;
      const double rise = spec_.helix_pitch / (2.0 * kPi);
      const double t = s / std::hypot(rho, rise);
      return {rho * std::cos(t) - rho, rho * std::sin(t), rise * t};
    }
  }
  return {};
}

Vec3 GroundTruth::point(double s) const { return analytic_point(s); }

void GroundTruth::frame(double s, Vec3& tangent, Vec3& u_axis, Vec3& v_axis) const {
  const double f = std::clamp((s - s_min_) / ds_, 0.0, static_cast<double>(samples_.size() - 1));
  const std::size_t k = std::min(static_cast<std::size_t>(f), samples_.size() - 2);
  const double t = f - static_cast<double>(k);
  tangent = normalized(tangents_[k] * (1.0 - t) + tangents_[k + 1] * t);
  const Vec3 u = u_axes_[k] * (1.0 - t) + u_axes_[k + 1] * t;
  u_axis = normalized(u - tangent * dot(u, tangent));
  v_axis = cross(tangent, u_axis);
}

Centerline GroundTruth::centerline() const {
  const int n = static_cast<int>(std::ceil(spec_.length / spec_.centerline_spacing - 1e-9));
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(n) + 1);
  for (int k = 0; k <= n; ++k) pts.push_back(analytic_point(std::min(k * spec_.centerline_spacing, spec_.length)));
  return Centerline(std::move(pts));
}

double GroundTruth::outer_radius(double s) const {
  return spec_.outer_radius +
         spec_.bulge_amplitude * std::exp(-0.5 * std::pow((s - spec_.bulge_center) / spec_.bulge_width, 2));
}

double GroundTruth::lumen_semi_minor() const {
  return spec_.lumen_radius * std::sqrt(1.0 - spec_.lumen_eccentricity * spec_.lumen_eccentricity);
}

Vec2 GroundTruth::wall_center() const {
  return {spec_.wall_offset * std::cos(spec_.wall_offset_angle), spec_.wall_offset * std::sin(spec_.wall_offset_angle)};
}

GroundTruth::Local GroundTruth::locate(const Vec3& p) const {
  const std::size_t n = samples_.size();
  auto d2 = [&](std::size_t k) {
    const Vec3 d = p - samples_[k];
    return dot(d, d);
  };
  std::size_t best = 0;
  double best_d = d2(0);
  const std::size_t stride = 8;
  for (std::size_t k = stride; k < n; k += stride) {
    if (const double d = d2(k); d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (const double d = d2(n - 1); d < best_d) {
    best_d = d;
    best = n - 1;
  }
  const std::size_t lo = best > stride ? best - stride : 0;
  const std::size_t hi = std::min(n - 1, best + stride);
  for (std::size_t k = lo; k <= hi; ++k) {
    if (const double d = d2(k); d < best_d) {
      best_d = d;
      best = k;
    }
  }

  // Project onto the two chords adjacent to the nearest sample.
  Local out;
  double best_proj = std::numeric_limits<double>::infinity();
  for (int side = -1; side <= 0; ++side) {
    const long a = static_cast<long>(best) + side;
    if (a < 0 || a + 1 >= static_cast<long>(n)) continue;
    const Vec3& p0 = samples_[static_cast<std::size_t>(a)];
    const Vec3 seg = samples_[static_cast<std::size_t>(a + 1)] - p0;
    const double raw = dot(p - p0, seg) / dot(seg, seg);
    const double t = std::clamp(raw, 0.0, 1.0);
    const Vec3 q = p0 + seg * t;
    const double d = dot(p - q, p - q);
    if (d < best_proj) {
      best_proj = d;
      out.s = s_min_ + (static_cast<double>(a) + t) * ds_;
      const bool past_start = a == 0 && raw < -1e-9;
      const bool past_end = a + 2 == static_cast<long>(n) && raw > 1.0 + 1e-9;
      out.in_range = !(past_start || past_end);
    }
  }
  Vec3 t, u, v;
  frame(out.s, t, u, v);
  const Vec3 d = p - analytic_point(out.s);
  out.u = dot(d, u);
  out.v = dot(d, v);
  return out;
}

double GroundTruth::lumen_distance(double u, double v) const {
  const double c = std::cos(spec_.lumen_angle);
  const double s = std::sin(spec_.lumen_angle);
  const double up = u * c + v * s;
  const double vp = -u * s + v * c;
  const double a = lumen_semi_major();
  const double b = lumen_semi_minor();
  const double f = std::hypot(up / a, vp / b);
  if (f < 1e-12) return -b;
  return std::hypot(u, v) * (1.0 - 1.0 / f);
}

double GroundTruth::wall_distance(double s, double u, double v) const {
  const Vec2 o = wall_center();
  return std::hypot(u - o.x, v - o.y) - outer_radius(s);
}

bool GroundTruth::inside_lumen(const Vec3& p) const {
  const Local l = locate(p);
  return l.in_range && lumen_distance(l.u, l.v) < 0.0;
}

bool GroundTruth::inside_wall(const Vec3& p) const {
  const Local l = locate(p);
  return l.in_range && (wall_distance(l.s, l.u, l.v) < 0.0 || lumen_distance(l.u, l.v) < 0.0);
}

double GroundTruth::thrombus_volume(double s0, double s1) const {
  const int steps = std::max(2, static_cast<int>(std::ceil((s1 - s0) / 0.05)));
  const double h = (s1 - s0) / steps;
  const double lumen_area = kPi * lumen_semi_major() * lumen_semi_minor();
  double sum = 0.0;
  for (int k = 0; k <= steps; ++k) {
    const double r = outer_radius(s0 + k * h);
    const double f = kPi * r * r - lumen_area;
    sum += (k == 0 || k == steps) ? 0.5 * f : f;
  }
  return sum * h;
}

Phantom generate_phantom(const PhantomSpec& spec) {
  auto truth = std::make_shared<GroundTruth>(spec);
  std::mt19937_64 rng(spec.seed);

  std::vector<CalciumSpeck> specks;
  {
    std::uniform_real_distribution<double> along(0.0, spec.length);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
    for (int n = 0; n < spec.calcium_count; ++n) {
      const double s = along(rng);
      const double th = angle(rng);
      // Place the speck center on the lumen boundary along direction th.
      double lo = 0.0;
      double hi = truth->lumen_semi_major() * 2.0;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        (truth->lumen_distance(mid * std::cos(th), mid * std::sin(th)) < 0.0 ? lo : hi) = mid;
      }
      Vec3 t, u, v;
      truth->frame(s, t, u, v);
      specks.push_back({truth->point(s) + u * (lo * std::cos(th)) + v * (lo * std::sin(th)), spec.calcium_radius});
    }
  }

  // Volume box around the tube.
  double reach = spec.volume_margin + std::abs(spec.wall_offset);
  double max_outer = 0.0;
  for (double s = -spec.end_margin; s <= spec.length + spec.end_margin; s += 0.5) {
    max_outer = std::max(max_outer, truth->outer_radius(s));
  }
  reach += max_outer;
  Vec3 lo{1e300, 1e300, 1e300};
  Vec3 hi{-1e300, -1e300, -1e300};
  for (double s = -spec.end_margin; s <= spec.length + spec.end_margin + 1e-9; s += 0.25) {
    const Vec3 p = truth->point(s);
    lo = {std::min(lo.x, p.x - reach), std::min(lo.y, p.y - reach), std::min(lo.z, p.z - reach)};
    hi = {std::max(hi.x, p.x + reach), std::max(hi.y, p.y + reach), std::max(hi.z, p.z + reach)};
  }
  auto snap_down = [](double v, double step) { return std::floor(v / step) * step; };
  const Vec3 origin{snap_down(lo.x, spec.spacing.x), snap_down(lo.y, spec.spacing.y), snap_down(lo.z, spec.spacing.z)};
  const std::array<int, 3> dims{static_cast<int>(std::ceil((hi.x - origin.x) / spec.spacing.x)) + 1,
                                static_cast<int>(std::ceil((hi.y - origin.y) / spec.spacing.y)) + 1,
                                static_cast<int>(std::ceil((hi.z - origin.z) / spec.spacing.z)) + 1};
  Volume vol(dims, spec.spacing, origin, static_cast<float>(spec.level_tissue));

  // Partial-volume blending across +-0.5 voxel of each surface.
  const double h = std::min({spec.spacing.x, spec.spacing.y, spec.spacing.z});
  auto cover = [h](double signed_distance) { return std::clamp(0.5 - signed_distance / h, 0.0, 1.0); };
  std::normal_distribution<double> noise(0.0, spec.noise_sigma);
  const double far = max_outer + std::abs(spec.wall_offset) + h;

  for (int k = 0; k < dims[2]; ++k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 p = vol.voxel_center(i, j, k);
        double value = spec.level_tissue;
        const auto loc = truth->locate(p);
        if (loc.in_range && std::hypot(loc.u, loc.v) < far) {
          const double fl = cover(truth->lumen_distance(loc.u, loc.v));
          const double fw = std::max(fl, cover(truth->wall_distance(loc.s, loc.u, loc.v)));
          value = fl * spec.level_lumen + (fw - fl) * spec.level_thrombus + (1.0 - fw) * spec.level_tissue;
        }
        double fc = 0.0;
        for (const auto& sp : specks) fc = std::max(fc, cover(norm(p - sp.center) - sp.radius));
        value = fc * spec.level_calcium + (1.0 - fc) * value;
        if (spec.noise_sigma > 0.0) value += noise(rng);
        vol.at(i, j, k) = static_cast<float>(value);
      }
    }
  }

  truth->specks = std::move(specks);
  return Phantom{std::move(vol), std::move(truth)};
}

std::pair<Mask, Mask> ground_truth_masks(const GroundTruth& gt, const MprPlane& plane) {
  const int n = plane.size();
  Mask lumen(n, n, 0);
  Mask wall(n, n, 0);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const auto loc = gt.locate(plane.world_at(i, j));
      if (!loc.in_range) continue;
      const bool in_lumen = gt.lumen_distance(loc.u, loc.v) < 0.0;
      lumen(i, j) = in_lumen;
      wall(i, j) = in_lumen || gt.wall_distance(loc.s, loc.u, loc.v) < 0.0;
    }
  }
  return {std::move(lumen), std::move(wall)};
}

RadialContour truth_contour(const GroundTruth& gt, const MprPlane& plane, const UnfoldParams& p, Surface which) {
  p.validate();
  auto inside = [&](const Vec3& q) { return which == Surface::Lumen ? gt.inside_lumen(q) : gt.inside_wall(q); };
  RadialContour c{std::vector<int>(static_cast<std::size_t>(p.rays), 0), plane.center_px(), p.dr, p.theta0,
                  plane.slice_index};
  const double reach = p.radial_samples * p.dr;
  const double step = p.dr / 4.0;
  for (int x = 0; x < p.rays; ++x) {
    const double th = p.ray_angle(x);
    const Vec3 dir = plane.axis1 * std::cos(th) + plane.axis2 * std::sin(th);
    if (!inside(plane.center)) continue;
    double in_t = 0.0;
    double out_t = reach;
    for (double t = step; t <= reach; t += step) {
      if (!inside(plane.center + dir * t)) {
        out_t = t;
        break;
      }
      in_t = t;
    }
    for (int it = 0; it < 30 && out_t - in_t > 1e-6; ++it) {
      const double mid = 0.5 * (in_t + out_t);
      (inside(plane.center + dir * mid) ? in_t : out_t) = mid;
    }
    c.r[static_cast<std::size_t>(x)] = radius_to_index(0.5 * (in_t + out_t), p.dr, p.radial_samples);
  }
  return c;
}

}  // namespace aortaseg
