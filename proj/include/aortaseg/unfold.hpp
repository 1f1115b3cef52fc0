#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aortaseg/geometry.hpp"
#include "aortaseg/image.hpp"
#include "aortaseg/volume.hpp"

namespace aortaseg {

struct UnfoldParams {
  int rays = 72;             // X
  int radial_samples = 120;  // Z
  double dr = 0.5;           // mm per radial sample
  double theta0 = 0.0;       // angle of ray 0, radians

  void validate() const;
  double ray_angle(int x) const { return theta0 + 2.0 * kPi * x / rays; }
};

/// Polar resampling of an MPR slice: samples(x, z) is the intensity at
/// center + (z + 0.5) * dr * (cos theta_x, sin theta_x); rays become columns.
struct UnfoldedSlice {
  Grid2D<float> samples;  // width = rays (x), height = radial samples (z)
  Vec2 center_px;
  double dr = 0.5;
  double theta0 = 0.0;
  double resolution = 1.0;  // mm/px of the source slice

  int rays() const { return samples.width; }
  int radial_samples() const { return samples.height; }
  float at(int x, int z) const { return samples(x, z); }
};

/// Per-ray surface index r[x] in [0, Z-1].
struct RadialContour {
  std::vector<int> r;
  Vec2 center_px;
  double dr = 0.5;
  double theta0 = 0.0;
  int slice_index = 0;

  int rays() const { return static_cast<int>(r.size()); }
  double ray_angle(int x) const { return theta0 + 2.0 * kPi * x / rays(); }
  /// Throws when any index falls outside [0, radial_samples - 1].
  void validate(int radial_samples) const;
  bool operator==(const RadialContour&) const = default;
};

UnfoldedSlice unfold(const MprSlice& slice, Vec2 center, const UnfoldParams& p, double fill = 0.0);

/// Closed polygon in pixel coordinates; vertex x at center + (r[x] + 0.5) * dr / resolution along ray x.
std::vector<Vec2> refold(const RadialContour& c, double resolution);

/// Even-odd rasterisation of refold(c) on a width x height grid, testing pixel centers.
Mask contour_to_mask(const RadialContour& c, double resolution, int width, int height);

/// Radial index whose vertex radius (z + 0.5) * dr is nearest to `radius_mm`.
int radius_to_index(double radius_mm, double dr, int radial_samples);

/// Casts rays from `center` against a closed polygon (pixel coordinates).
/// With `require_star` the polygon must be hit exactly once per ray, otherwise
/// std::nullopt is returned; without it the farthest hit is used.
std::optional<RadialContour> contour_from_polygon(const std::vector<Vec2>& polygon, Vec2 center,
                                                  double resolution, const UnfoldParams& p, int slice_index,
                                                  bool require_star, std::string* why = nullptr);

/// Re-expresses a contour about another center (identity when the centers coincide).
RadialContour recenter(const RadialContour& c, Vec2 center, double resolution, const UnfoldParams& p);

/// Radial extent of a mask along each ray: last index of the run that starts at the center.
/// Rays whose first sample lies outside the mask get -1.
std::vector<int> mask_radial_extent(const Mask& m, Vec2 center, double resolution, const UnfoldParams& p);

/// Contour file: one line per slice, `slice_index X dr theta0 cx cy : r0 r1 ... r(X-1)`.
void write_contours(const std::filesystem::path& path, const std::vector<RadialContour>& contours);
std::vector<RadialContour> read_contours(const std::filesystem::path& path);
std::string format_contour(const RadialContour& c);

}  // namespace aortaseg
