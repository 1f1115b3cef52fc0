#include "aortaseg/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace aortaseg {

double bilinear(const Image& img, double px, double py, double fill) {
  if (img.width == 0 || img.height == 0) return fill;
  if (px < -0.5 || py < -0.5 || px > img.width - 0.5 || py > img.height - 0.5) return fill;
  px = std::clamp(px, 0.0, static_cast<double>(img.width - 1));
  py = std::clamp(py, 0.0, static_cast<double>(img.height - 1));
  const int i0 = std::min(static_cast<int>(std::floor(px)), std::max(img.width - 2, 0));
  const int j0 = std::min(static_cast<int>(std::floor(py)), std::max(img.height - 2, 0));
  const int i1 = std::min(i0 + 1, img.width - 1);
  const int j1 = std::min(j0 + 1, img.height - 1);
  const double fx = px - i0;
  const double fy = py - j0;
  const double top = std::lerp<double>(img(i0, j0), img(i1, j0), fx);
  const double bottom = std::lerp<double>(img(i0, j1), img(i1, j1), fx);
  return std::lerp(top, bottom, fy);
}

std::size_t count_set(const Mask& m) {
  return static_cast<std::size_t>(std::count_if(m.data.begin(), m.data.end(), [](std::uint8_t v) { return v != 0; }));
}

void write_pgm(const Mask& m, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "P5\n" << m.width << ' ' << m.height << "\n255\n";
  std::vector<char> row(static_cast<std::size_t>(m.width));
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) row[static_cast<std::size_t>(i)] = m(i, j) ? static_cast<char>(255) : 0;
    out.write(row.data(), static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace aortaseg
