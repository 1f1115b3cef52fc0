#pragma once

#include <stdexcept>
#include <string>

#include "aortaseg/config.hpp"
#include "aortaseg/image.hpp"
#include "aortaseg/volume.hpp"

namespace aortaseg {

struct LumenParams {
  double sigma = 1.0;               // Gaussian smoothing, px
  double k = 3.0;                   // lower bound = mean - max(k*std, min_band_fraction*mean)
  double min_band_fraction = 0.5;
  int morph_radius = 2;             // disk radius for opening/closing, px
  double calcium_factor = 2.0;      // raw pixels above calcium_factor*mean are calcium
  double ellipticity_tolerance = 0.05;

  void validate() const;
  static LumenParams from_config(const Config& cfg);
  static const std::vector<std::string>& config_keys();
};

struct IntensityStats {
  double mean = 0.0;
  double std = 0.0;  // population
  int samples = 0;
};

class LumenNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Mean and population std of trilinear samples at the centerline points inside the volume.
IntensityStats centerline_intensity_stats(const Volume& v, const Centerline& c);

struct LumenMask {
  Mask mask;
  double ellipticity = 1.0;
  bool branch = false;          // ellipticity below 1 - tolerance
  bool split_applied = false;   // erosion-split fallback changed the mask
  std::size_t area = 0;
};

LumenMask segment_lumen(const MprSlice& slice, const IntensityStats& stats, const LumenParams& p);

/// Area over the area of the second-moment ellipse, clamped to (0, 1].
double ellipticity(const Mask& m);

struct MaskMoments {
  double area = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double cxx = 0.0;  // central second moments per unit area
  double cxy = 0.0;
  double cyy = 0.0;
};
MaskMoments mask_moments(const Mask& m);

// Building blocks, exposed for testing.
Image gaussian_smooth(const Image& img, double sigma);
Mask erode(const Mask& m, int radius);
Mask dilate(const Mask& m, int radius);
Mask morph_open(const Mask& m, int radius);
Mask morph_close(const Mask& m, int radius);
/// 4-connected labels (0 = background, components numbered from 1 in scan order).
Grid2D<int> label_components(const Mask& m, int* count = nullptr);

}  // namespace aortaseg
