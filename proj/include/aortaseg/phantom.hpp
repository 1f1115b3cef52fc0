#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "aortaseg/config.hpp"
#include "aortaseg/geometry.hpp"
#include "aortaseg/image.hpp"
#include "aortaseg/unfold.hpp"
#include "aortaseg/volume.hpp"

namespace aortaseg {

enum class CenterlineShape { Straight, Arc, Helix };

/// Synthetic aneurysmal vessel. Cross-sections are described in a rotation-minimising
/// frame (u, v) that starts aligned with world x/y: the lumen is an ellipse centred on the
/// centerline, the outer wall a circle whose center may be offset (crescent thrombus).
struct PhantomSpec {
  CenterlineShape shape = CenterlineShape::Straight;
  double length = 60.0;         // mm of exported centerline
  double arc_radius = 120.0;    // Arc: bending radius
  double helix_radius = 10.0;   // Helix
  double helix_pitch = 200.0;   // Helix: rise per turn
  double end_margin = 10.0;     // tube continues this far beyond both ends

  double lumen_radius = 10.0;       // semi-major axis
  double lumen_eccentricity = 0.0;  // semi-minor = semi-major * sqrt(1 - e^2)
  double lumen_angle = 0.0;         // major-axis angle in the (u, v) frame, radians

  double outer_radius = 20.0;
  double bulge_center = 30.0;
  double bulge_amplitude = 0.0;
  double bulge_width = 10.0;   // Gaussian sigma, mm
  double wall_offset = 0.0;    // outer-wall center displacement, mm
  double wall_offset_angle = 0.0;

  double level_lumen = 300.0;
  double level_thrombus = 40.0;
  double level_tissue = 45.0;
  double level_calcium = 900.0;
  double noise_sigma = 10.0;
  int calcium_count = 0;
  double calcium_radius = 1.5;

  Vec3 spacing{1.0, 1.0, 1.0};
  double volume_margin = 8.0;  // mm of tissue around the wall's bounding box
  double centerline_spacing = 0.5;
  std::uint64_t seed = 1;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  static PhantomSpec from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

struct CalciumSpeck {
  Vec3 center;
  double radius = 0.0;
};

/// Analytic ground truth of a phantom.
class GroundTruth {
 public:
  explicit GroundTruth(const PhantomSpec& spec);

  const PhantomSpec& spec() const { return spec_; }
  /// Exported centerline over [0, length].
  Centerline centerline() const;

  double outer_radius(double s) const;
  double lumen_semi_major() const { return spec_.lumen_radius; }
  double lumen_semi_minor() const;
  Vec2 wall_center() const;

  struct Local {
    double s = 0.0;     // arc length of the nearest centerline point
    double u = 0.0;     // in-section coordinates, mm
    double v = 0.0;
    bool in_range = false;  // projection falls on the modelled tube
  };
  Local locate(const Vec3& p) const;

  /// In-section signed distances (negative inside), mm.
  double lumen_distance(double u, double v) const;
  double wall_distance(double s, double u, double v) const;

  bool inside_lumen(const Vec3& p) const;
  bool inside_wall(const Vec3& p) const;

  Vec3 point(double s) const;
  void frame(double s, Vec3& tangent, Vec3& u_axis, Vec3& v_axis) const;

  /// Analytic thrombus volume over [s0, s1], mm^3.
  double thrombus_volume(double s0, double s1) const;

  std::vector<CalciumSpeck> specks;

 private:
  Vec3 analytic_point(double s) const;

  PhantomSpec spec_;
  double s_min_ = 0.0;
  double ds_ = 0.25;
  std::vector<Vec3> samples_;
  std::vector<Vec3> tangents_;
  std::vector<Vec3> u_axes_;
};

struct Phantom {
  Volume volume;
  std::shared_ptr<const GroundTruth> truth;
};

Phantom generate_phantom(const PhantomSpec& spec);

/// Lumen and wall masks rasterised from the analytic surfaces on the plane's pixel grid.
std::pair<Mask, Mask> ground_truth_masks(const GroundTruth& gt, const MprPlane& plane);

enum class Surface { Lumen, Outer };

/// Radial contour of a truth surface about the plane's center pixel.
RadialContour truth_contour(const GroundTruth& gt, const MprPlane& plane, const UnfoldParams& p, Surface which);

}  // namespace aortaseg
