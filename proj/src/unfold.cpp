#include "aortaseg/unfold.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace aortaseg {

void UnfoldParams::validate() const {
  if (rays < 8) throw std::invalid_argument("rays must be >= 8");
  if (radial_samples < 4) throw std::invalid_argument("radial_samples must be >= 4");
  if (!(dr > 0.0)) throw std::invalid_argument("dr must be positive");
}

void RadialContour::validate(int radial_samples) const {
  for (std::size_t x = 0; x < r.size(); ++x) {
    if (r[x] < 0 || r[x] > radial_samples - 1) {
      throw std::invalid_argument("contour for slice " + std::to_string(slice_index) + ": r[" + std::to_string(x) +
                                  "] = " + std::to_string(r[x]) + " outside [0, " +
                                  std::to_string(radial_samples - 1) + "]");
    }
  }
}

UnfoldedSlice unfold(const MprSlice& slice, Vec2 center, const UnfoldParams& p, double fill) {
  p.validate();
  const Image& img = slice.pixels;
  if (center.x < 0.0 || center.y < 0.0 || center.x > img.width - 1 || center.y > img.height - 1) {
    throw std::invalid_argument("unfold center outside slice");
  }
  UnfoldedSlice u{Grid2D<float>(p.rays, p.radial_samples), center, p.dr, p.theta0, slice.plane.resolution};
  const double step_px = p.dr / slice.plane.resolution;
  for (int x = 0; x < p.rays; ++x) {
    const double th = p.ray_angle(x);
    const double cx = std::cos(th);
    const double cy = std::sin(th);
    for (int z = 0; z < p.radial_samples; ++z) {
      const double rho = (z + 0.5) * step_px;
      u.samples(x, z) = static_cast<float>(bilinear(img, center.x + rho * cx, center.y + rho * cy, fill));
    }
  }
  return u;
}

std::vector<Vec2> refold(const RadialContour& c, double resolution) {
  std::vector<Vec2> poly;
  poly.reserve(c.r.size());
  for (int x = 0; x < c.rays(); ++x) {
    const double th = c.ray_angle(x);
    const double rho = (c.r[static_cast<std::size_t>(x)] + 0.5) * c.dr / resolution;
    poly.push_back({c.center_px.x + rho * std::cos(th), c.center_px.y + rho * std::sin(th)});
  }
  return poly;
}

Mask contour_to_mask(const RadialContour& c, double resolution, int width, int height) {
  Mask m(width, height, 0);
  const auto poly = refold(c, resolution);
  if (poly.size() < 3) return m;
  // Scanline even-odd fill; crossings computed per row through pixel centers.
  std::vector<double> xs;
  for (int j = 0; j < height; ++j) {
    const double y = j;
    xs.clear();
    for (std::size_t a = 0; a < poly.size(); ++a) {
      const Vec2& p = poly[a];
      const Vec2& q = poly[(a + 1) % poly.size()];
      if ((p.y > y) != (q.y > y)) xs.push_back(p.x + (y - p.y) * (q.x - p.x) / (q.y - p.y));
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      const int i0 = std::max(0, static_cast<int>(std::ceil(xs[k])));
      const int i1 = std::min(width - 1, static_cast<int>(std::ceil(xs[k + 1])) - 1);
      for (int i = i0; i <= i1; ++i) m(i, j) = 1;
    }
  }
  return m;
}

int radius_to_index(double radius_mm, double dr, int radial_samples) {
  const int z = static_cast<int>(std::lround(radius_mm / dr - 0.5));
  return std::clamp(z, 0, radial_samples - 1);
}

std::optional<RadialContour> contour_from_polygon(const std::vector<Vec2>& polygon, Vec2 center, double resolution,
                                                  const UnfoldParams& p, int slice_index, bool require_star,
                                                  std::string* why) {
  p.validate();
  RadialContour out{std::vector<int>(static_cast<std::size_t>(p.rays), 0), center, p.dr, p.theta0, slice_index};
  for (int x = 0; x < p.rays; ++x) {
    const double th = p.ray_angle(x);
    const Vec2 d{std::cos(th), std::sin(th)};
    std::vector<double> ts;
    for (std::size_t a = 0; a < polygon.size(); ++a) {
      const Vec2 pa = polygon[a] - center;
      const Vec2 pb = polygon[(a + 1) % polygon.size()] - center;
      const Vec2 e = pb - pa;
      // Solve t*d = pa + u*e for t >= 0, u in [0, 1]; vertex hits are merged below.
      const double den = d.x * (-e.y) - d.y * (-e.x);
      if (std::abs(den) < 1e-12) continue;
      const double t = (pa.x * (-e.y) - pa.y * (-e.x)) / den;
      const double u = (d.x * pa.y - d.y * pa.x) / den;
      if (t < 0.0 || u < -1e-9 || u > 1.0 + 1e-9) continue;
      ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(), [](double a, double b) { return b - a <= 1e-7 * (1.0 + b); }),
             ts.end());
    const int hits = static_cast<int>(ts.size());
    const double farthest = ts.empty() ? -1.0 : ts.back();
    if (hits == 0 || (require_star && hits != 1)) {
      if (why) {
        *why = hits == 0 ? "ray " + std::to_string(x) + " does not hit the contour (center outside?)"
                         : "contour is not star-shaped about the center (ray " + std::to_string(x) + " hits " +
                               std::to_string(hits) + " times)";
      }
      if (require_star || hits == 0) return std::nullopt;
    }
    out.r[static_cast<std::size_t>(x)] = radius_to_index(farthest * resolution, p.dr, p.radial_samples);
  }
  return out;
}

RadialContour recenter(const RadialContour& c, Vec2 center, double resolution, const UnfoldParams& p) {
  if (c.center_px == center && c.rays() == p.rays && c.dr == p.dr && c.theta0 == p.theta0) return c;
  auto moved = contour_from_polygon(refold(c, resolution), center, resolution, p, c.slice_index, false);
  if (!moved) throw std::runtime_error("cannot re-center contour: new center outside the contour");
  return *moved;
}

std::vector<int> mask_radial_extent(const Mask& m, Vec2 center, double resolution, const UnfoldParams& p) {
  std::vector<int> out(static_cast<std::size_t>(p.rays), -1);
  const double step_px = p.dr / resolution;
  for (int x = 0; x < p.rays; ++x) {
    const double th = p.ray_angle(x);
    int last = -1;
    for (int z = 0; z < p.radial_samples; ++z) {
      const double rho = (z + 0.5) * step_px;
      const int i = static_cast<int>(std::lround(center.x + rho * std::cos(th)));
      const int j = static_cast<int>(std::lround(center.y + rho * std::sin(th)));
      if (!m.contains(i, j) || !m(i, j)) break;
      last = z;
    }
    out[static_cast<std::size_t>(x)] = last;
  }
  return out;
}

std::string format_contour(const RadialContour& c) {
  char head[160];
  std::snprintf(head, sizeof head, "%d %d %.6f %.6f %.6f %.6f :", c.slice_index, c.rays(), c.dr, c.theta0,
                c.center_px.x, c.center_px.y);
  std::string line = head;
  for (int v : c.r) {
    line += ' ';
    line += std::to_string(v);
  }
  return line;
}

void write_contours(const std::filesystem::path& path, const std::vector<RadialContour>& contours) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  for (const auto& c : contours) out << format_contour(c) << '\n';
}

std::vector<RadialContour> read_contours(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open contour file " + path.string());
  std::vector<RadialContour> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto where = path.string() + ":" + std::to_string(line_no) + ": ";
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw std::runtime_error(where + "missing ':' separator");
    std::istringstream head(line.substr(0, colon));
    RadialContour c;
    int rays = 0;
    if (!(head >> c.slice_index >> rays >> c.dr >> c.theta0 >> c.center_px.x >> c.center_px.y)) {
      throw std::runtime_error(where + "malformed header");
    }
    std::istringstream body(line.substr(colon + 1));
    int v = 0;
    while (body >> v) c.r.push_back(v);
    if (!body.eof()) throw std::runtime_error(where + "malformed radius list");
    if (rays <= 0 || static_cast<int>(c.r.size()) != rays) {
      throw std::runtime_error(where + "expected " + std::to_string(rays) + " radii, got " +
                               std::to_string(c.r.size()));
    }
    if (!(c.dr > 0.0)) throw std::runtime_error(where + "dr must be positive");
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace aortaseg
