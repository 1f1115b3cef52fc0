#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <unistd.h>

#include "aortaseg/image.hpp"
#include "aortaseg/volume.hpp"

namespace testing {

inline std::filesystem::path scratch_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("aortaseg_" + name + "_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  return dir;
}

inline aortaseg::Mask disk_mask(int w, int h, double cx, double cy, double r) {
  aortaseg::Mask m(w, h);
  for (int j = 0; j < h; ++j)
    for (int i = 0; i < w; ++i) m(i, j) = std::hypot(i - cx, j - cy) <= r;
  return m;
}

/// Plain axis-aligned slice with a background value; the plane itself is only used for resolution.
inline aortaseg::MprSlice blank_slice(int size, float value, double resolution = 1.0) {
  aortaseg::MprSlice s;
  s.plane.extent = (size / 2) * resolution;
  s.plane.resolution = resolution;
  s.plane.axis1 = {1, 0, 0};
  s.plane.axis2 = {0, 1, 0};
  s.plane.normal = {0, 0, 1};
  s.pixels = aortaseg::Image(size, size, value);
  s.center_px = {static_cast<double>(size / 2), static_cast<double>(size / 2)};
  return s;
}

inline void paint_disk(aortaseg::Image& img, double cx, double cy, double r, float v) {
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i)
      if (std::hypot(i - cx, j - cy) <= r) img(i, j) = v;
}

/// Disk with a one-pixel linear edge ramp centred on radius r.
inline void paint_soft_disk(aortaseg::Image& img, double cx, double cy, double r, float v) {
  for (int j = 0; j < img.height; ++j)
    for (int i = 0; i < img.width; ++i) {
      const double cover = std::clamp(r + 0.5 - std::hypot(i - cx, j - cy), 0.0, 1.0);
      img(i, j) = static_cast<float>(img(i, j) + cover * (v - img(i, j)));
    }
}

}  // namespace testing
