#include "aortaseg/lumen.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "aortaseg/geometry.hpp"

namespace aortaseg {

void LumenParams::validate() const {
  if (!(sigma >= 0.0)) throw std::invalid_argument("lumen_sigma must be >= 0");
  if (!(k > 0.0)) throw std::invalid_argument("lumen_k must be > 0");
  if (!(min_band_fraction >= 0.0 && min_band_fraction < 1.0)) {
    throw std::invalid_argument("lumen_min_band must be in [0, 1)");
  }
  if (morph_radius < 0) throw std::invalid_argument("morph_radius must be >= 0");
  if (!(calcium_factor > 1.0)) throw std::invalid_argument("calcium_factor must be > 1");
  if (!(ellipticity_tolerance > 0.0 && ellipticity_tolerance < 1.0)) {
    throw std::invalid_argument("ellipticity_tolerance must be in (0, 1)");
  }
}

const std::vector<std::string>& LumenParams::config_keys() {
  static const std::vector<std::string> keys = {"lumen_sigma",    "lumen_k",        "lumen_min_band",
                                                "morph_radius",   "calcium_factor", "ellipticity_tolerance"};
  return keys;
}

LumenParams LumenParams::from_config(const Config& cfg) {
  LumenParams p;
  p.sigma = cfg.get_double("lumen_sigma", p.sigma);
  p.k = cfg.get_double("lumen_k", p.k);
  p.min_band_fraction = cfg.get_double("lumen_min_band", p.min_band_fraction);
  p.morph_radius = cfg.get_int("morph_radius", p.morph_radius);
  p.calcium_factor = cfg.get_double("calcium_factor", p.calcium_factor);
  p.ellipticity_tolerance = cfg.get_double("ellipticity_tolerance", p.ellipticity_tolerance);
  p.validate();
  return p;
}

IntensityStats centerline_intensity_stats(const Volume& v, const Centerline& c) {
  std::vector<double> values;
  for (const auto& p : c.points()) {
    if (inside_volume(v, p)) values.push_back(trilinear_sample(v, p));
  }
  if (values.empty()) throw std::runtime_error("centerline misses volume");
  IntensityStats st;
  st.samples = static_cast<int>(values.size());
  for (double x : values) st.mean += x;
  st.mean /= values.size();
  double ss = 0.0;
  for (double x : values) ss += (x - st.mean) * (x - st.mean);
  st.std = std::sqrt(ss / values.size());
  return st;
}

Image gaussian_smooth(const Image& img, double sigma) {
  if (sigma <= 0.0) return img;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    total += kernel[static_cast<std::size_t>(t + radius)] = std::exp(-0.5 * t * t / (sigma * sigma));
  }
  for (double& w : kernel) w /= total;

  Image tmp(img.width, img.height);
  Image out(img.width, img.height);
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[static_cast<std::size_t>(t + radius)] * img(std::clamp(i + t, 0, img.width - 1), j);
      }
      tmp(i, j) = static_cast<float>(acc);
    }
  }
  for (int j = 0; j < img.height; ++j) {
    for (int i = 0; i < img.width; ++i) {
      double acc = 0.0;
      for (int t = -radius; t <= radius; ++t) {
        acc += kernel[static_cast<std::size_t>(t + radius)] * tmp(i, std::clamp(j + t, 0, img.height - 1));
      }
      out(i, j) = static_cast<float>(acc);
    }
  }
  return out;
}

namespace {

std::vector<std::pair<int, int>> disk_offsets(int radius) {
  std::vector<std::pair<int, int>> out;
  for (int dy = -radius; dy <= radius; ++dy) {
    for (int dx = -radius; dx <= radius; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) out.emplace_back(dx, dy);
    }
  }
  return out;
}

}  // namespace

Mask erode(const Mask& m, int radius) {
  if (radius <= 0) return m;
  const auto offs = disk_offsets(radius);
  Mask out(m.width, m.height, 0);
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (!m(i, j)) continue;
      bool keep = true;
      for (const auto& [dx, dy] : offs) {
        if (!m.contains(i + dx, j + dy) || !m(i + dx, j + dy)) {
          keep = false;
          break;
        }
      }
      out(i, j) = keep;
    }
  }
  return out;
}

Mask dilate(const Mask& m, int radius) {
  if (radius <= 0) return m;
  const auto offs = disk_offsets(radius);
  Mask out(m.width, m.height, 0);
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (!m(i, j)) continue;
      for (const auto& [dx, dy] : offs) {
        if (out.contains(i + dx, j + dy)) out(i + dx, j + dy) = 1;
      }
    }
  }
  return out;
}

Mask morph_open(const Mask& m, int radius) { return dilate(erode(m, radius), radius); }
Mask morph_close(const Mask& m, int radius) { return erode(dilate(m, radius), radius); }

Grid2D<int> label_components(const Mask& m, int* count) {
  Grid2D<int> labels(m.width, m.height, 0);
  int next = 0;
  std::vector<std::pair<int, int>> stack;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (!m(i, j) || labels(i, j)) continue;
      ++next;
      labels(i, j) = next;
      stack.assign(1, {i, j});
      while (!stack.empty()) {
        const auto [ci, cj] = stack.back();
        stack.pop_back();
        const int nb[4][2] = {{ci + 1, cj}, {ci - 1, cj}, {ci, cj + 1}, {ci, cj - 1}};
        for (const auto& q : nb) {
          if (m.contains(q[0], q[1]) && m(q[0], q[1]) && !labels(q[0], q[1])) {
            labels(q[0], q[1]) = next;
            stack.emplace_back(q[0], q[1]);
          }
        }
      }
    }
  }
  if (count) *count = next;
  return labels;
}

MaskMoments mask_moments(const Mask& m) {
  MaskMoments mo;
  double sx = 0.0, sy = 0.0;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (!m(i, j)) continue;
      mo.area += 1.0;
      sx += i;
      sy += j;
    }
  }
  if (mo.area == 0.0) return mo;
  mo.cx = sx / mo.area;
  mo.cy = sy / mo.area;
  for (int j = 0; j < m.height; ++j) {
    for (int i = 0; i < m.width; ++i) {
      if (!m(i, j)) continue;
      const double dx = i - mo.cx;
      const double dy = j - mo.cy;
      mo.cxx += dx * dx;
      mo.cxy += dx * dy;
      mo.cyy += dy * dy;
    }
  }
  mo.cxx /= mo.area;
  mo.cxy /= mo.area;
  mo.cyy /= mo.area;
  return mo;
}

double ellipticity(const Mask& m) {
  const MaskMoments mo = mask_moments(m);
  if (mo.area == 0.0) throw std::invalid_argument("ellipticity of an empty mask");
  // A uniform ellipse with semi-axes a, b has covariance eigenvalues a^2/4, b^2/4.
  const double det = std::max(0.0, mo.cxx * mo.cyy - mo.cxy * mo.cxy);
  const double ellipse_area = 4.0 * kPi * std::sqrt(det);
  if (ellipse_area <= 0.0) return 1.0;
  return std::clamp(mo.area / ellipse_area, 1e-12, 1.0);
}

namespace {

Mask keep_component_at(const Mask& m, int ci, int cj) {
  const auto labels = label_components(m);
  Mask out(m.width, m.height, 0);
  const int want = labels(ci, cj);
  if (want == 0) return out;
  for (std::size_t n = 0; n < out.data.size(); ++n) out.data[n] = labels.data[n] == want;
  return out;
}

}  // namespace

LumenMask segment_lumen(const MprSlice& slice, const IntensityStats& stats, const LumenParams& p) {
  p.validate();
  const int ci = static_cast<int>(std::lround(slice.center_px.x));
  const int cj = static_cast<int>(std::lround(slice.center_px.y));
  if (!slice.pixels.contains(ci, cj)) throw std::invalid_argument("center pixel outside slice");

  const Image smooth = gaussian_smooth(slice.pixels, p.sigma);
  const double lower = stats.mean - std::max(p.k * stats.std, p.min_band_fraction * std::abs(stats.mean));
  const double calcium = p.calcium_factor * stats.mean;

  Mask calc(slice.pixels.width, slice.pixels.height, 0);
  Mask bin(slice.pixels.width, slice.pixels.height, 0);
  for (std::size_t n = 0; n < bin.data.size(); ++n) {
    calc.data[n] = slice.pixels.data[n] > calcium;
    bin.data[n] = smooth.data[n] >= lower && !calc.data[n];
  }
  Mask morph = morph_close(morph_open(bin, p.morph_radius), p.morph_radius);
  for (std::size_t n = 0; n < morph.data.size(); ++n) {
    if (calc.data[n]) morph.data[n] = 0;
  }

  LumenMask out;
  out.mask = keep_component_at(morph, ci, cj);
  out.area = count_set(out.mask);
  if (out.area == 0) throw LumenNotFound("lumen not found at centerline");

  out.ellipticity = ellipticity(out.mask);
  out.branch = out.ellipticity < 1.0 - p.ellipticity_tolerance;
  if (out.branch) {
    // Erode until the center component separates from the rest, then grow it back.
    for (int r = 1; r <= 2 * std::max(p.morph_radius, 1) + 8; ++r) {
      const Mask eroded = erode(out.mask, r);
      if (!eroded(ci, cj)) break;
      int parts = 0;
      label_components(eroded, &parts);
      if (parts < 2) continue;
      Mask grown = dilate(keep_component_at(eroded, ci, cj), r);
      for (std::size_t n = 0; n < grown.data.size(); ++n) grown.data[n] = grown.data[n] && out.mask.data[n];
      out.mask = keep_component_at(grown, ci, cj);
      out.area = count_set(out.mask);
      out.ellipticity = ellipticity(out.mask);
      out.split_applied = true;
      break;
    }
  }
  return out;
}

}  // namespace aortaseg
