#include "aortaseg/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <map>
#include <stdexcept>

#include "aortaseg/mincut.hpp"

namespace aortaseg {

EllipseFit fit_ellipse(const Mask& mask) {
  const MaskMoments mo = mask_moments(mask);
  if (mo.area < 16.0) throw std::invalid_argument("ellipse fit needs at least 16 px");
  const double tr = mo.cxx + mo.cyy;
  const double diff = mo.cxx - mo.cyy;
  const double disc = std::sqrt(diff * diff / 4.0 + mo.cxy * mo.cxy);
  const double l1 = tr / 2.0 + disc;
  const double l2 = tr / 2.0 - disc;
  if (!(l2 > 1e-6)) throw std::invalid_argument("degenerate ellipse fit (minor axis ~ 0)");

  EllipseFit f;
  f.center = {mo.cx, mo.cy};
  f.a = 2.0 * std::sqrt(l1);
  f.b = 2.0 * std::sqrt(l2);
  f.orientation = 0.5 * std::atan2(2.0 * mo.cxy, diff);
  const Vec2 u{std::cos(f.orientation), std::sin(f.orientation)};
  const Vec2 v{-u.y, u.x};
  const double off = f.a * f.a / f.b - f.b;
  f.candidates = {f.center + v * off, f.center - v * off};

  std::size_t inter = 0, uni = 0;
  for (int j = 0; j < mask.height; ++j) {
    for (int i = 0; i < mask.width; ++i) {
      const Vec2 d{i - f.center.x, j - f.center.y};
      const double pu = dot(d, u) / f.a;
      const double pv = dot(d, v) / f.b;
      const bool in_e = pu * pu + pv * pv <= 1.0;
      const bool in_m = mask(i, j) != 0;
      inter += in_e && in_m;
      uni += in_e || in_m;
    }
  }
  f.residual = uni ? 1.0 - static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
  return f;
}

bool correction_triggered(const EllipseFit& fit, const TrackingParams& p) {
  return fit.eccentricity() >= p.eccentricity_trigger && fit.residual <= p.residual_trigger;
}

double center_integral(const MprSlice& slice, const Mask& lumen, Vec2 at, double side_px) {
  const double half = side_px / 2.0;
  const int i0 = static_cast<int>(std::ceil(at.x - half));
  const int i1 = static_cast<int>(std::ceil(at.x + half)) - 1;
  const int j0 = static_cast<int>(std::ceil(at.y - half));
  const int j1 = static_cast<int>(std::ceil(at.y + half)) - 1;
  double sum = 0.0;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      if (!slice.pixels.contains(i, j)) continue;
      if (lumen.contains(i, j) && lumen(i, j)) continue;
      sum += slice.pixels(i, j);
    }
  }
  return sum;
}

Vec2 choose_center(const MprSlice& slice, const Mask& lumen, const EllipseFit& fit, double b_mm) {
  const double side = b_mm / slice.plane.resolution;
  const double t0 = center_integral(slice, lumen, fit.candidates[0], side);
  const double t1 = center_integral(slice, lumen, fit.candidates[1], side);
  if (t0 > t1) return fit.candidates[0];
  if (t1 > t0) return fit.candidates[1];
  const MaskMoments mo = mask_moments(lumen);
  const Vec2 cen{mo.cx, mo.cy};
  return norm(fit.candidates[1] - cen) < norm(fit.candidates[0] - cen) ? fit.candidates[1] : fit.candidates[0];
}

TrackPlan plan_tracks(int n, std::vector<int> seeds) {
  if (seeds.empty()) throw std::invalid_argument("plan_tracks: no seeds");
  if (n < 1) throw std::invalid_argument("plan_tracks: no slices");
  std::sort(seeds.begin(), seeds.end());
  if (std::adjacent_find(seeds.begin(), seeds.end()) != seeds.end()) {
    throw std::invalid_argument("plan_tracks: duplicate seed");
  }
  if (seeds.front() < 0 || seeds.back() >= n) throw std::invalid_argument("plan_tracks: seed out of range");

  TrackPlan plan;
  plan.seeds = seeds;
  plan.owner.assign(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    int best = seeds.front();
    for (int s : seeds) {
      if (std::abs(s - i) < std::abs(best - i)) best = s;
    }
    plan.owner[static_cast<std::size_t>(i)] = best;
  }
  for (int s : seeds) {
    for (int t = s - 1; t >= 0 && plan.owner[static_cast<std::size_t>(t)] == s; --t) plan.pairs.emplace_back(t + 1, t);
    for (int t = s + 1; t < n && plan.owner[static_cast<std::size_t>(t)] == s; ++t) plan.pairs.emplace_back(t - 1, t);
  }
  return plan;
}

bool plan_is_valid(const TrackPlan& plan, int n, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  for (int s : plan.seeds) {
    if (s < 0 || s >= n) return fail("seed out of range");
    if (done[static_cast<std::size_t>(s)]) return fail("duplicate seed");
    done[static_cast<std::size_t>(s)] = 1;
  }
  for (auto [src, dst] : plan.pairs) {
    if (src < 0 || src >= n || dst < 0 || dst >= n) return fail("pair out of range");
    if (std::abs(src - dst) != 1) return fail("pair not adjacent");
    if (!done[static_cast<std::size_t>(src)]) return fail("source " + std::to_string(src) + " not yet segmented");
    if (done[static_cast<std::size_t>(dst)]) return fail("slice " + std::to_string(dst) + " targeted twice");
    done[static_cast<std::size_t>(dst)] = 1;
  }
  for (int i = 0; i < n; ++i) {
    if (!done[static_cast<std::size_t>(i)]) return fail("slice " + std::to_string(i) + " never segmented");
  }
  return true;
}

namespace {

// farthest sample along each ray that lands on a lumen pixel (-1 when none)
std::vector<int> lumen_reach(const Mask& m, Vec2 center, double resolution, const UnfoldParams& p) {
  std::vector<int> out(static_cast<std::size_t>(p.rays), -1);
  const double step_px = p.dr / resolution;
  for (int x = 0; x < p.rays; ++x) {
    const double th = p.ray_angle(x);
    for (int z = 0; z < p.radial_samples; ++z) {
      const double rho = (z + 0.5) * step_px;
      const int i = static_cast<int>(std::lround(center.x + rho * std::cos(th)));
      const int j = static_cast<int>(std::lround(center.y + rho * std::sin(th)));
      if (m.contains(i, j) && m(i, j)) out[static_cast<std::size_t>(x)] = z;
    }
  }
  return out;
}

}  // namespace

PairResult track_pair(const MprSlice& source, const RadialContour& fixed, const Mask* source_lumen,
                      const MprSlice& target, const LumenMask& target_lumen, const TrackingParams& p,
                      double calcium_ceiling) {
  PairResult out;
  out.center = target.center_px;
  if (target_lumen.area >= 16) {
    try {
      out.fit = fit_ellipse(target_lumen.mask);
    } catch (const std::invalid_argument&) {
      out.fit.reset();
    }
    if (out.fit && correction_triggered(*out.fit, p)) {
      const Vec2 c = choose_center(target, target_lumen.mask, *out.fit, p.center_square);
      if (target.pixels.contains(static_cast<int>(std::lround(c.x)), static_cast<int>(std::lround(c.y)))) {
        out.center = c;
        out.corrected = true;
      }
    }
  }

  const RadialContour fixed_here = recenter(fixed, out.center, source.plane.resolution, p.unfold);
  fixed_here.validate(p.unfold.radial_samples);

  if (p.thrombus_mode == ThrombusMeanMode::Fixed) {
    out.thrombus.mean = p.fixed_thrombus_mean;
  } else if (!source_lumen) {
    out.thrombus.mean = p.fixed_thrombus_mean;
    out.thrombus.fallback = true;
    out.thrombus.note = "no source lumen; using configured mean";
  } else {
    const UnfoldedSlice u0 = unfold(source, out.center, p.unfold);
    const auto reach = lumen_reach(*source_lumen, out.center, source.plane.resolution, p.unfold);
    out.thrombus = estimate_thrombus_mean(u0, reach, fixed_here.r, calcium_ceiling, p.fixed_thrombus_mean,
                                          p.ring_margin);
  }

  UnfoldedSlice u1;
  if (p.wall_sigma > 0.0) {
    MprSlice smooth = target;
    smooth.pixels = gaussian_smooth(target.pixels, p.wall_sigma);
    u1 = unfold(smooth, out.center, p.unfold);
  } else {
    u1 = unfold(target, out.center, p.unfold);
  }
  const CostTable c = base_costs(u1, out.thrombus.mean);
  const WallGraph g = apply_fixed_and_forbidden(differenced_weights(c), fixed_here.r, p.dp, p.dx, p.dy, p.wrap);
  const ClosedSet cs = min_closed_set(g, p.outer_ties ? TieBreak::Largest : TieBreak::Smallest);
  if (cs.empty()) throw InfeasibleSurface(cs.diagnostic);
  out.closed_set_cost = cs.cost;

  out.contour.r = closure_to_surface(cs, g, 1);
  out.contour.center_px = out.center;
  out.contour.dr = p.unfold.dr;
  out.contour.theta0 = p.unfold.theta0;
  out.contour.slice_index = target.plane.slice_index;
  for (int x = 0; x < c.width; ++x) out.surface_cost += c(x, out.contour.r[static_cast<std::size_t>(x)]);
  return out;
}

TrackResult track_all(const std::vector<MprSlice>& slices, const std::vector<std::optional<LumenMask>>& lumens,
                      const std::vector<SeedContour>& seeds, const TrackingParams& p, double calcium_ceiling,
                      bool parallel) {
  const int n = static_cast<int>(slices.size());
  if (lumens.size() != slices.size()) throw std::invalid_argument("track_all: one lumen entry per slice required");
  if (seeds.empty()) throw std::invalid_argument("track_all: at least one seed contour required");
  p.validate();

  std::vector<int> seed_idx;
  for (const auto& s : seeds) {
    if (s.slice_index < 0 || s.slice_index >= n) {
      throw std::invalid_argument("seed slice " + std::to_string(s.slice_index) + " out of range [0, " +
                                  std::to_string(n - 1) + "]");
    }
    s.contour.validate(p.unfold.radial_samples);
    seed_idx.push_back(s.slice_index);
  }
  const TrackPlan plan = plan_tracks(n, seed_idx);

  TrackResult res;
  res.contours.assign(static_cast<std::size_t>(n), std::nullopt);
  res.diagnostics.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) res.diagnostics[static_cast<std::size_t>(i)].slice = i;
  for (const auto& s : seeds) {
    auto& d = res.diagnostics[static_cast<std::size_t>(s.slice_index)];
    res.contours[static_cast<std::size_t>(s.slice_index)] = s.contour;
    d.status = SliceStatus::Seed;
    d.center = s.contour.center_px;
  }

  std::map<int, std::vector<std::pair<int, int>>> segments;
  for (auto pr : plan.pairs) segments[plan.owner[static_cast<std::size_t>(pr.second)]].push_back(pr);

  auto run_segment = [&](const std::vector<std::pair<int, int>>& pairs) {
    for (auto [src, dst] : pairs) {
      auto& d = res.diagnostics[static_cast<std::size_t>(dst)];
      d.source = src;
      d.status = SliceStatus::Failed;
      const auto& fixed = res.contours[static_cast<std::size_t>(src)];
      if (!fixed) {
        d.message = "upstream slice " + std::to_string(src) + " failed";
        continue;
      }
      const auto& lum = lumens[static_cast<std::size_t>(dst)];
      if (!lum) {
        d.message = "lumen not found at centerline";
        continue;
      }
      const auto& src_lum = lumens[static_cast<std::size_t>(src)];
      try {
        PairResult pr = track_pair(slices[static_cast<std::size_t>(src)], *fixed, src_lum ? &src_lum->mask : nullptr,
                                   slices[static_cast<std::size_t>(dst)], *lum, p, calcium_ceiling);
        d.status = SliceStatus::Tracked;
        d.surface_cost = pr.surface_cost;
        d.thrombus_mean = pr.thrombus.mean;
        d.mean_fallback = pr.thrombus.fallback;
        d.corrected = pr.corrected;
        d.center = pr.center;
        d.message = pr.thrombus.note;
        res.contours[static_cast<std::size_t>(dst)] = std::move(pr.contour);
      } catch (const std::exception& e) {
        d.message = e.what();
      }
    }
  };

  if (parallel && segments.size() > 1) {
    std::vector<std::future<void>> jobs;
    for (const auto& [seed, pairs] : segments) {
      jobs.push_back(std::async(std::launch::async, [&run_segment, &pairs = pairs] { run_segment(pairs); }));
    }
    for (auto& j : jobs) j.get();
  } else {
    for (const auto& [seed, pairs] : segments) run_segment(pairs);
  }

  for (const auto& d : res.diagnostics) res.failed += d.status == SliceStatus::Failed;
  return res;
}

const char* to_string(SliceStatus s) {
  switch (s) {
    case SliceStatus::Seed:
      return "seed";
    case SliceStatus::Tracked:
      return "tracked";
    case SliceStatus::Failed:
      return "failed";
  }
  return "?";
}

}  // namespace aortaseg
