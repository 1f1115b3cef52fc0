#include "aortaseg/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace aortaseg {

void RunConfig::validate() const {
  phantom.validate();
  lumen.validate();
  tracking.validate();
  if (!(mpr.step > 0.0)) throw std::invalid_argument("mpr_step must be > 0");
  if (!(mpr.extent > 0.0)) throw std::invalid_argument("mpr_extent must be > 0");
  if (!(mpr.resolution > 0.0)) throw std::invalid_argument("mpr_resolution must be > 0");
}

std::set<std::string> RunConfig::known_keys() {
  std::set<std::string> keys = {"mpr_step", "mpr_extent", "mpr_resolution", "seed_slices", "write_masks", "parallel"};
  for (const auto& k : PhantomSpec::config_keys()) keys.insert(k);
  for (const auto& k : LumenParams::config_keys()) keys.insert(k);
  for (const auto& k : TrackingParams::config_keys()) keys.insert(k);
  return keys;
}

RunConfig RunConfig::from_config(const Config& cfg) {
  const auto unknown = cfg.unknown_keys(known_keys());
  if (!unknown.empty()) throw std::invalid_argument("unknown config key '" + unknown.front() + "'");
  RunConfig rc;
  rc.phantom = PhantomSpec::from_config(cfg);
  rc.lumen = LumenParams::from_config(cfg);
  rc.tracking = TrackingParams::from_config(cfg);
  rc.mpr.step = cfg.get_double("mpr_step", rc.mpr.step);
  rc.mpr.extent = cfg.get_double("mpr_extent", rc.mpr.extent);
  rc.mpr.resolution = cfg.get_double("mpr_resolution", rc.mpr.resolution);
  if (cfg.has("seed_slices")) {
    for (double v : cfg.get_doubles("seed_slices", 0)) {
      if (v != std::floor(v)) throw std::invalid_argument("seed_slices must be integers");
      rc.seed_slices.push_back(static_cast<int>(v));
    }
  }
  rc.write_masks = cfg.get_bool("write_masks", rc.write_masks);
  rc.parallel = cfg.get_bool("parallel", rc.parallel);
  rc.validate();
  return rc;
}

SliceSeries prepare_series(const Volume& v, const Centerline& c, const RunConfig& cfg) {
  SliceSeries s;
  const auto planes = build_mpr_planes(c, cfg.mpr, &s.warnings);
  s.stats = centerline_intensity_stats(v, c);
  s.calcium_ceiling = cfg.lumen.calcium_factor * s.stats.mean;
  s.slices.reserve(planes.size());
  for (const auto& p : planes) s.slices.push_back(resample_mpr(v, p));
  s.lumens.resize(planes.size());
  s.lumen_errors.resize(planes.size());
  for (std::size_t i = 0; i < planes.size(); ++i) {
    try {
      s.lumens[i] = segment_lumen(s.slices[i], s.stats, cfg.lumen);
    } catch (const LumenNotFound& e) {
      s.lumen_errors[i] = e.what();
    }
  }
  return s;
}

std::vector<int> default_seed_slices(int n) {
  if (n < 1) throw std::invalid_argument("no slices");
  std::vector<int> seeds = {0, (n - 1) / 2, n - 1};
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  return seeds;
}

std::vector<SeedContour> seeds_from_contours(const std::vector<RadialContour>& contours) {
  std::vector<SeedContour> seeds;
  for (const auto& c : contours) seeds.push_back({c.slice_index, c});
  return seeds;
}

RadialContour lumen_contour(const LumenMask& m, const MprSlice& slice, const UnfoldParams& p) {
  RadialContour c;
  c.r = mask_radial_extent(m.mask, slice.center_px, slice.plane.resolution, p);
  for (int& r : c.r) r = std::max(r, 0);
  c.center_px = slice.center_px;
  c.dr = p.dr;
  c.theta0 = p.theta0;
  c.slice_index = slice.plane.slice_index;
  return c;
}

SegmentOutputs collect_outputs(const SliceSeries& series, const TrackResult& tr, const UnfoldParams& p) {
  SegmentOutputs out;
  for (int i = 0; i < series.size(); ++i) {
    if (tr.contours[static_cast<std::size_t>(i)]) {
      RadialContour c = *tr.contours[static_cast<std::size_t>(i)];
      c.slice_index = i;
      out.wall.push_back(std::move(c));
    }
    if (series.lumens[static_cast<std::size_t>(i)]) {
      out.lumen.push_back(lumen_contour(*series.lumens[static_cast<std::size_t>(i)],
                                        series.slices[static_cast<std::size_t>(i)], p));
    }
  }
  return out;
}

std::string format_segment_report(const SliceSeries& series, const TrackResult& tr, const std::string& timestamp) {
  std::string out = "# aortaseg segmentation report\n";
  if (!timestamp.empty()) out += "# generated " + timestamp + "\n";
  char buf[512];
  std::snprintf(buf, sizeof buf, "slices=%d failed=%d\n", series.size(), tr.failed);
  out += buf;
  std::snprintf(buf, sizeof buf, "centerline_mean=%.3f centerline_std=%.3f calcium_ceiling=%.3f\n", series.stats.mean,
                series.stats.std, series.calcium_ceiling);
  out += buf;
  for (const auto& w : series.warnings) out += "warning: " + w + "\n";
  out += "slice status source center_x center_y thrombus_mean surface_cost corrected lumen_area ellipticity branch note\n";
  for (int i = 0; i < series.size(); ++i) {
    const auto& d = tr.diagnostics[static_cast<std::size_t>(i)];
    const auto& lm = series.lumens[static_cast<std::size_t>(i)];
    std::string note = d.message;
    if (!lm && note.empty()) note = series.lumen_errors[static_cast<std::size_t>(i)];
    if (lm && lm->split_applied) note += note.empty() ? "branch split applied" : "; branch split applied";
    std::snprintf(buf, sizeof buf, "%d %s %d %.3f %.3f %.3f %.3f %d %zu %.4f %d %s\n", i, to_string(d.status),
                  d.source, d.center.x, d.center.y, d.thrombus_mean, d.surface_cost, d.corrected ? 1 : 0,
                  lm ? lm->area : std::size_t{0}, lm ? lm->ellipticity : 0.0, lm && lm->branch ? 1 : 0,
                  note.empty() ? "-" : note.c_str());
    out += buf;
  }
  return out;
}

std::vector<std::optional<Mask>> rasterize_series(const std::vector<RadialContour>& contours, int n, int size,
                                                  double resolution) {
  std::vector<std::optional<Mask>> out(static_cast<std::size_t>(n));
  for (const auto& c : contours) {
    if (c.slice_index < 0 || c.slice_index >= n) {
      throw std::invalid_argument("contour slice " + std::to_string(c.slice_index) + " outside the series");
    }
    out[static_cast<std::size_t>(c.slice_index)] = contour_to_mask(c, resolution, size, size);
  }
  return out;
}

EvalReport evaluate_against_truth(const GroundTruth& gt, const SliceSeries& series, const TrackResult& tr,
                                  const RunConfig& cfg) {
  EvalInput in;
  in.slice_spacing = cfg.mpr.step;
  in.resolution = cfg.mpr.resolution;
  for (int i = 0; i < series.size(); ++i) {
    const auto& slice = series.slices[static_cast<std::size_t>(i)];
    auto [lumen, wall] = ground_truth_masks(gt, slice.plane);
    in.truth_wall.push_back(std::move(wall));
    in.truth_lumen.push_back(std::move(lumen));
    const auto& c = tr.contours[static_cast<std::size_t>(i)];
    in.auto_contours.push_back(c);
    if (c) {
      in.auto_wall.push_back(contour_to_mask(*c, slice.plane.resolution, slice.pixels.width, slice.pixels.height));
    } else {
      in.auto_wall.push_back(std::nullopt);
    }
    const auto& lm = series.lumens[static_cast<std::size_t>(i)];
    in.auto_lumen.push_back(lm ? std::optional<Mask>(lm->mask) : std::nullopt);
    in.truth_contours.push_back(truth_contour(gt, slice.plane, cfg.tracking.unfold, Surface::Outer));
  }
  return evaluate_run(in);
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace aortaseg
