#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aortaseg/image.hpp"
#include "aortaseg/unfold.hpp"

namespace aortaseg {

/// 2|a and b| / (|a| + |b|); 1 when both are empty. Throws on shape mismatch.
double dsc(const Mask& a, const Mask& b);

/// Pixels of `wall` not in `lumen`.
std::size_t thrombus_pixels(const Mask& wall, const Mask& lumen);

/// Sum over slices of |wall \ lumen| * pixel_area * spacing, in cm^3. Slices missing either
/// mask are skipped and their indices appended to `skipped`.
double clot_volume(const std::vector<std::optional<Mask>>& wall, const std::vector<std::optional<Mask>>& lumen,
                   double slice_spacing, double pixel_area, std::vector<int>* skipped = nullptr);

/// Longest chord between boundary vertices of one contour, mm.
double contour_diameter(const RadialContour& c);

struct DiameterResult {
  double mm = 0.0;
  int slice = -1;
};

/// Global maximum over contours (ties to the lower slice index). Throws on an empty list.
DiameterResult max_diameter(const std::vector<RadialContour>& contours);

struct SliceRow {
  int slice = 0;
  bool segmented = false;
  double dsc = 0.0;
  double clot_mm3 = 0.0;
  double diameter_mm = 0.0;
};

struct DscSummary {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
};

struct EvalReport {
  std::vector<SliceRow> rows;
  DscSummary dsc;
  double clot_cm3_auto = 0.0;
  double clot_cm3_reference = 0.0;
  std::size_t voxels_auto = 0;
  std::size_t voxels_reference = 0;
  DiameterResult diameter_auto;
  DiameterResult diameter_reference;
  int failed = 0;
};

struct EvalInput {
  std::vector<std::optional<Mask>> auto_wall;   // per slice; nullopt where segmentation failed
  std::vector<std::optional<Mask>> auto_lumen;
  std::vector<Mask> truth_wall;
  std::vector<Mask> truth_lumen;
  std::vector<std::optional<RadialContour>> auto_contours;   // for diameters
  std::vector<std::optional<RadialContour>> truth_contours;  // may be empty
  double slice_spacing = 1.0;  // mm
  double resolution = 1.0;     // mm/px
};

/// Failed slices enter the DSC statistics with DSC 0.
EvalReport evaluate_run(const EvalInput& in);

DscSummary summarize(const std::vector<double>& values);

/// Text report; `timestamp` empty suppresses the timestamp line.
std::string format_report(const EvalReport& r, const std::string& timestamp = "");
std::string format_report_csv(const EvalReport& r);
std::string dsc_line(const DscSummary& s);

}  // namespace aortaseg
