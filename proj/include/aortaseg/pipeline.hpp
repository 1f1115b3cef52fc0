#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "aortaseg/config.hpp"
#include "aortaseg/lumen.hpp"
#include "aortaseg/metrics.hpp"
#include "aortaseg/phantom.hpp"
#include "aortaseg/tracker.hpp"
#include "aortaseg/volume.hpp"

namespace aortaseg {

/// Everything a run needs, merged from a config file and command-line overrides.
struct RunConfig {
  PhantomSpec phantom;
  LumenParams lumen;
  TrackingParams tracking;
  MprGeometry mpr;
  std::vector<int> seed_slices;  // pipeline: truth seeds; empty = first, middle, last
  bool write_masks = false;
  bool parallel = true;

  void validate() const;
  static RunConfig from_config(const Config& cfg);
  static std::set<std::string> known_keys();
};

/// MPR series with per-slice lumen segmentation.
struct SliceSeries {
  std::vector<MprSlice> slices;
  std::vector<std::optional<LumenMask>> lumens;  // nullopt where no lumen was found
  std::vector<std::string> lumen_errors;         // per slice, empty when found
  IntensityStats stats;
  double calcium_ceiling = 0.0;
  std::vector<std::string> warnings;

  int size() const { return static_cast<int>(slices.size()); }
};

SliceSeries prepare_series(const Volume& v, const Centerline& c, const RunConfig& cfg);

/// Default seeds: first, middle and last slice (deduplicated).
std::vector<int> default_seed_slices(int n);

std::vector<SeedContour> seeds_from_contours(const std::vector<RadialContour>& contours);

/// Lumen mask as a radial contour about the slice center (rays that miss the lumen get 0).
RadialContour lumen_contour(const LumenMask& m, const MprSlice& slice, const UnfoldParams& p);

struct SegmentOutputs {
  std::vector<RadialContour> wall;   // tracked or seeded slices only
  std::vector<RadialContour> lumen;  // slices with a lumen
};

SegmentOutputs collect_outputs(const SliceSeries& series, const TrackResult& tr, const UnfoldParams& p);

std::string format_segment_report(const SliceSeries& series, const TrackResult& tr, const std::string& timestamp);

/// Rasterises per-slice contours onto `n` slices of the given square size; nullopt where absent.
std::vector<std::optional<Mask>> rasterize_series(const std::vector<RadialContour>& contours, int n, int size,
                                                  double resolution);

/// Evaluation against analytic phantom masks.
EvalReport evaluate_against_truth(const GroundTruth& gt, const SliceSeries& series, const TrackResult& tr,
                                  const RunConfig& cfg);

/// "YYYY-MM-DDTHH:MM:SSZ"
std::string utc_timestamp();

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace aortaseg
