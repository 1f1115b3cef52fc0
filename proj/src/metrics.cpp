#include "aortaseg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace aortaseg {

double dsc(const Mask& a, const Mask& b) {
  if (!a.same_shape(b)) throw std::invalid_argument("dsc: mask dimensions differ");
  std::size_t na = 0, nb = 0, both = 0;
  for (std::size_t i = 0; i < a.data.size(); ++i) {
    const bool x = a.data[i] != 0;
    const bool y = b.data[i] != 0;
    na += x;
    nb += y;
    both += x && y;
  }
  if (na + nb == 0) return 1.0;
  return 2.0 * static_cast<double>(both) / static_cast<double>(na + nb);
}

std::size_t thrombus_pixels(const Mask& wall, const Mask& lumen) {
  if (!wall.same_shape(lumen)) throw std::invalid_argument("thrombus_pixels: mask dimensions differ");
  std::size_t n = 0;
  for (std::size_t i = 0; i < wall.data.size(); ++i) n += wall.data[i] && !lumen.data[i];
  return n;
}

double clot_volume(const std::vector<std::optional<Mask>>& wall, const std::vector<std::optional<Mask>>& lumen,
                   double slice_spacing, double pixel_area, std::vector<int>* skipped) {
  if (wall.size() != lumen.size()) throw std::invalid_argument("clot_volume: series lengths differ");
  double mm3 = 0.0;
  for (std::size_t i = 0; i < wall.size(); ++i) {
    if (!wall[i] || !lumen[i]) {
      if (skipped) skipped->push_back(static_cast<int>(i));
      continue;
    }
    mm3 += static_cast<double>(thrombus_pixels(*wall[i], *lumen[i])) * pixel_area * slice_spacing;
  }
  return mm3 / 1000.0;
}

double contour_diameter(const RadialContour& c) {
  const int n = c.rays();
  std::vector<Vec2> pts(static_cast<std::size_t>(n));
  for (int x = 0; x < n; ++x) {
    const double rho = (c.r[static_cast<std::size_t>(x)] + 0.5) * c.dr;
    const double th = c.ray_angle(x);
    pts[static_cast<std::size_t>(x)] = {rho * std::cos(th), rho * std::sin(th)};
  }
  double best = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) best = std::max(best, norm(pts[static_cast<std::size_t>(i)] - pts[static_cast<std::size_t>(j)]));
  }
  return best;
}

DiameterResult max_diameter(const std::vector<RadialContour>& contours) {
  if (contours.empty()) throw std::invalid_argument("max_diameter: no contours");
  DiameterResult best;
  for (const auto& c : contours) {
    const double d = contour_diameter(c);
    if (best.slice < 0 || d > best.mm || (d == best.mm && c.slice_index < best.slice)) {
      best.mm = d;
      best.slice = c.slice_index;
    }
  }
  return best;
}

DscSummary summarize(const std::vector<double>& values) {
  DscSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  s.min = values.front();
  s.max = values.front();
  for (double v : values) {
    sum += v;
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
  }
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = std::sqrt(ss / static_cast<double>(values.size()));
  return s;
}

EvalReport evaluate_run(const EvalInput& in) {
  const std::size_t n = in.truth_wall.size();
  if (in.auto_wall.size() != n || in.auto_lumen.size() != n || in.truth_lumen.size() != n) {
    throw std::invalid_argument("evaluate: series are not aligned");
  }
  if (in.auto_contours.size() != n || (!in.truth_contours.empty() && in.truth_contours.size() != n)) {
    throw std::invalid_argument("evaluate: contour series are not aligned");
  }
  const double pixel_area = in.resolution * in.resolution;
  EvalReport r;
  std::vector<double> scores;
  std::vector<RadialContour> auto_c, truth_c;
  for (std::size_t i = 0; i < n; ++i) {
    SliceRow row;
    row.slice = static_cast<int>(i);
    r.voxels_reference += thrombus_pixels(in.truth_wall[i], in.truth_lumen[i]);
    if (in.auto_wall[i]) {
      row.segmented = true;
      row.dsc = dsc(*in.auto_wall[i], in.truth_wall[i]);
      if (in.auto_lumen[i]) {
        const std::size_t px = thrombus_pixels(*in.auto_wall[i], *in.auto_lumen[i]);
        r.voxels_auto += px;
        row.clot_mm3 = static_cast<double>(px) * pixel_area * in.slice_spacing;
      }
    } else {
      ++r.failed;
    }
    if (in.auto_contours[i]) {
      row.diameter_mm = contour_diameter(*in.auto_contours[i]);
      auto_c.push_back(*in.auto_contours[i]);
      auto_c.back().slice_index = row.slice;
    }
    if (!in.truth_contours.empty() && in.truth_contours[i]) {
      truth_c.push_back(*in.truth_contours[i]);
      truth_c.back().slice_index = row.slice;
    }
    scores.push_back(row.dsc);
    r.rows.push_back(row);
  }
  r.dsc = summarize(scores);
  std::vector<std::optional<Mask>> tw(in.truth_wall.begin(), in.truth_wall.end());
  std::vector<std::optional<Mask>> tl(in.truth_lumen.begin(), in.truth_lumen.end());
  r.clot_cm3_reference = clot_volume(tw, tl, in.slice_spacing, pixel_area);
  r.clot_cm3_auto = clot_volume(in.auto_wall, in.auto_lumen, in.slice_spacing, pixel_area);
  if (!auto_c.empty()) r.diameter_auto = max_diameter(auto_c);
  if (!truth_c.empty()) r.diameter_reference = max_diameter(truth_c);
  return r;
}

std::string dsc_line(const DscSummary& s) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "DSC mean=%.3f std=%.3f min=%.3f max=%.3f", s.mean, s.std, s.min, s.max);
  return buf;
}

std::string format_report(const EvalReport& r, const std::string& timestamp) {
  std::string out = "# aortaseg evaluation report\n";
  if (!timestamp.empty()) out += "# generated " + timestamp + "\n";
  out += "# std is the population standard deviation; failed slices count as DSC 0\n";
  out += "slice      dsc   clot_mm3  diameter_mm\n";
  char buf[200];
  for (const auto& row : r.rows) {
    if (row.segmented) {
      std::snprintf(buf, sizeof buf, "%5d %8.4f %10.1f %12.2f\n", row.slice, row.dsc, row.clot_mm3, row.diameter_mm);
    } else {
      std::snprintf(buf, sizeof buf, "%5d   failed\n", row.slice);
    }
    out += buf;
  }
  out += dsc_line(r.dsc) + "\n";
  std::snprintf(buf, sizeof buf, "clot_volume_cm3 auto=%.3f reference=%.3f\n", r.clot_cm3_auto, r.clot_cm3_reference);
  out += buf;
  std::snprintf(buf, sizeof buf, "voxels auto=%zu reference=%zu\n", r.voxels_auto, r.voxels_reference);
  out += buf;
  std::snprintf(buf, sizeof buf, "max_diameter_mm auto=%.2f slice=%d reference=%.2f slice=%d\n", r.diameter_auto.mm,
                r.diameter_auto.slice, r.diameter_reference.mm, r.diameter_reference.slice);
  out += buf;
  std::snprintf(buf, sizeof buf, "failed_slices=%d\n", r.failed);
  out += buf;
  return out;
}

std::string format_report_csv(const EvalReport& r) {
  std::string out = "slice,dsc,clot_mm3,diameter_mm,segmented\n";
  char buf[160];
  for (const auto& row : r.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.6f,%.3f,%.4f,%d\n", row.slice, row.dsc, row.clot_mm3, row.diameter_mm,
                  row.segmented ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace aortaseg
