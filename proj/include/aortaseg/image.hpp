#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

namespace aortaseg {

/// Dense 2D grid, row-major with i (column) fastest.
template <typename T>
struct Grid2D {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Grid2D() = default;
  Grid2D(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
    if (w < 0 || h < 0) throw std::invalid_argument("grid dimensions must be non-negative");
  }

  T& operator()(int i, int j) { return data[static_cast<std::size_t>(j) * width + i]; }
  const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(j) * width + i]; }

  bool contains(int i, int j) const { return i >= 0 && j >= 0 && i < width && j < height; }
  bool same_shape(const Grid2D& o) const { return width == o.width && height == o.height; }

  bool operator==(const Grid2D&) const = default;
};

using Image = Grid2D<float>;
using Mask = Grid2D<std::uint8_t>;

/// Bilinear interpolation at continuous pixel coordinates (pixel centers are integers).
/// Points more than half a pixel outside the grid return `fill`.
double bilinear(const Image& img, double px, double py, double fill = 0.0);

std::size_t count_set(const Mask& m);

/// Binary PGM (P5, maxval 255), set pixels written as 255.
void write_pgm(const Mask& m, const std::filesystem::path& path);

}  // namespace aortaseg
