#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include "aortaseg/geometry.hpp"
#include "aortaseg/image.hpp"

namespace aortaseg {

/// Scalar voxel grid. Voxel (i, j, k) has its center at origin + (i*sx, j*sy, k*sz);
/// intensities are stored x-fastest.
struct Volume {
  std::array<int, 3> dims{1, 1, 1};
  Vec3 spacing{1.0, 1.0, 1.0};
  Vec3 origin{};
  std::vector<float> intensities;

  Volume() : intensities(1, 0.0f) {}
  Volume(std::array<int, 3> d, Vec3 s, Vec3 o, float fill = 0.0f);

  std::size_t voxel_count() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  }
  std::size_t index(int i, int j, int k) const {
    return (static_cast<std::size_t>(k) * dims[1] + static_cast<std::size_t>(j)) * dims[0] + static_cast<std::size_t>(i);
  }
  float& at(int i, int j, int k) { return intensities[index(i, j, k)]; }
  float at(int i, int j, int k) const { return intensities[index(i, j, k)]; }
  Vec3 voxel_center(int i, int j, int k) const {
    return {origin.x + i * spacing.x, origin.y + j * spacing.y, origin.z + k * spacing.z};
  }

  /// Throws std::invalid_argument when dims, spacing or payload size are inconsistent.
  void validate() const;
};

/// Reads a VVOL1 header and its raw little-endian float32 payload.
Volume load_volume(const std::filesystem::path& header_path);
/// Writes `<header_path>` plus `<stem>.raw` next to it.
void save_volume(const Volume& v, const std::filesystem::path& header_path);

/// Trilinear interpolation. Points more than half a voxel outside the grid return `fill`.
double trilinear_sample(const Volume& v, const Vec3& p, double fill = 0.0);

/// Ordered 3D polyline parameterised by cumulative chord length.
class Centerline {
 public:
  explicit Centerline(std::vector<Vec3> points);

  const std::vector<Vec3>& points() const { return points_; }
  const std::vector<double>& arc_lengths() const { return arc_; }
  double length() const { return arc_.back(); }

  /// Position at arc length s, clamped to [0, length].
  Vec3 point_at(double s) const;
  /// Unit tangent by central difference over +-h (one-sided at the ends).
  Vec3 tangent_at(double s, double h = 1.0) const;

 private:
  std::vector<Vec3> points_;
  std::vector<double> arc_;
};

Centerline load_centerline(const std::filesystem::path& path);
void save_centerline(const Centerline& c, const std::filesystem::path& path);

struct MprPlane {
  Vec3 center;
  Vec3 axis1;
  Vec3 axis2;
  Vec3 normal;
  double extent = 60.0;      // half-width, mm
  double resolution = 1.0;   // mm per pixel
  double arc_length = 0.0;   // position along the centerline, mm
  int slice_index = 0;

  /// Pixels per side; always odd so the centerline hits a pixel center.
  int size() const;
  Vec2 center_px() const;
  Vec3 world_at(double px, double py) const;
};

struct MprGeometry {
  double step = 1.0;         // mm between planes along the centerline
  double extent = 60.0;      // mm
  double resolution = 1.0;   // mm/px
};

/// Planes at arc lengths 0, step, 2*step, ... with a rotation-minimising in-plane frame.
/// A step above 5 mm appends a warning (consecutive sections stop being comparable).
std::vector<MprPlane> build_mpr_planes(const Centerline& c, const MprGeometry& geom,
                                       std::vector<std::string>* warnings = nullptr);

struct MprSlice {
  MprPlane plane;
  Image pixels;
  Vec2 center_px;
};

MprSlice resample_mpr(const Volume& v, const MprPlane& plane, double fill = 0.0);

}  // namespace aortaseg

namespace aortaseg {

/// True when `p` lies within the sampling box of `v` (half a voxel around the outer centers).
bool inside_volume(const Volume& v, const Vec3& p);

}  // namespace aortaseg
