#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "aortaseg/lumen.hpp"
#include "aortaseg/unfold.hpp"
#include "aortaseg/volume.hpp"
#include "aortaseg/wallgraph.hpp"

namespace aortaseg {

struct SeedContour {
  int slice_index = 0;
  RadialContour contour;
};

struct EllipseFit {
  Vec2 center;            // px
  double a = 0.0;         // semi-major, px
  double b = 0.0;         // semi-minor, px
  double orientation = 0.0;  // major axis angle, rad
  double residual = 1.0;  // 1 - IoU(mask, fitted ellipse)
  std::array<Vec2, 2> candidates{};  // curvature centers of the long sides, on the minor axis

  double eccentricity() const { return a > 0.0 ? std::sqrt(std::max(0.0, 1.0 - (b * b) / (a * a))) : 0.0; }
};

/// Moment fit: a = 2 sqrt(l1), b = 2 sqrt(l2). Throws std::invalid_argument for area < 16 px or b ~ 0.
EllipseFit fit_ellipse(const Mask& mask);

bool correction_triggered(const EllipseFit& fit, const TrackingParams& p);

/// Sum of T over the pixels of a side x side square (pixel units) centered at `at`; T = 0 on lumen.
double center_integral(const MprSlice& slice, const Mask& lumen, Vec2 at, double side_px);

/// Candidate with the larger integral; exact ties go to the candidate nearer the mask centroid.
Vec2 choose_center(const MprSlice& slice, const Mask& lumen, const EllipseFit& fit, double b_mm);

struct TrackPlan {
  std::vector<std::pair<int, int>> pairs;  // (source, target)
  std::vector<int> seeds;                  // sorted
  std::vector<int> owner;                  // per slice: seed slice it belongs to
};

/// Nearest-seed partition (ties to the lower seed); per seed the backward chain, then the forward chain.
TrackPlan plan_tracks(int n, std::vector<int> seeds);

/// Every non-seed slice appears once as target, sources are seeds or earlier targets, |source - target| = 1.
bool plan_is_valid(const TrackPlan& plan, int n, std::string* why = nullptr);

struct PairResult {
  RadialContour contour;
  Vec2 center;
  double surface_cost = 0.0;  // sum over rays of c at the chosen surface
  double closed_set_cost = 0.0;
  ThrombusEstimate thrombus;
  bool corrected = false;
  std::optional<EllipseFit> fit;
};

/// One tracking step from a segmented slice to its neighbour.
/// `source_lumen` may be null, in which case the fixed thrombus mean is used.
PairResult track_pair(const MprSlice& source, const RadialContour& fixed, const Mask* source_lumen,
                      const MprSlice& target, const LumenMask& target_lumen, const TrackingParams& p,
                      double calcium_ceiling = std::numeric_limits<double>::infinity());

enum class SliceStatus { Seed, Tracked, Failed };

struct SliceDiagnostic {
  int slice = 0;
  int source = -1;
  SliceStatus status = SliceStatus::Failed;
  double surface_cost = 0.0;
  double thrombus_mean = 0.0;
  bool mean_fallback = false;
  bool corrected = false;
  Vec2 center;
  std::string message;
};

struct TrackResult {
  std::vector<std::optional<RadialContour>> contours;  // one per slice
  std::vector<SliceDiagnostic> diagnostics;            // one per slice, ordered by slice index
  int failed = 0;
};

/// Runs the whole plan. Segments owned by different seeds run concurrently when `parallel` is set.
TrackResult track_all(const std::vector<MprSlice>& slices, const std::vector<std::optional<LumenMask>>& lumens,
                      const std::vector<SeedContour>& seeds, const TrackingParams& p,
                      double calcium_ceiling = std::numeric_limits<double>::infinity(), bool parallel = true);

const char* to_string(SliceStatus s);

}  // namespace aortaseg
