#include <cstdio>
#include <filesystem>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "aortaseg/pipeline.hpp"

namespace fs = std::filesystem;
using namespace aortaseg;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config;
  std::string out = ".";
  std::string timestamp = "on";
  bool no_wrap = false;
  bool write_masks = false;
  std::vector<std::string> seed_contours;
  std::string volume = "volume.vvol";
  std::string centerline = "centerline.txt";
  std::string contours = "wall_contours.txt";
  std::string lumen_contours = "lumen_contours.txt";
  std::string truth_contours = "truth_contours.txt";
  std::string truth_lumen_contours = "truth_lumen_contours.txt";
  std::vector<std::pair<std::string, std::string>> overrides;
  std::optional<double> fixed_mean;
};

void add_tracking_flags(CLI::App* cmd, Options& o) {
  for (const char* key : {"dx", "dy", "dp", "rays", "radial-samples"}) {
    std::string cfg_key = key;
    for (char& ch : cfg_key) ch = ch == '-' ? '_' : ch;
    cmd->add_option_function<int>(
        std::string("--") + key, [&o, cfg_key](const int& v) { o.overrides.emplace_back(cfg_key, std::to_string(v)); },
        "override " + cfg_key);
  }
  cmd->add_option_function<double>(
      "--dr", [&o](const double& v) { o.overrides.emplace_back("dr", std::to_string(v)); }, "radial sample spacing, mm");
  cmd->add_flag("--no-wrap", o.no_wrap, "drop the circumferential wrap-around arcs");
  cmd->add_option_function<double>(
      "--fixed-thrombus-mean", [&o](const double& v) { o.fixed_mean = v; }, "use this thrombus mean instead of the ring estimate");
  cmd->add_flag("--write-masks", o.write_masks, "also write PGM masks per slice");
}

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config, "key = value settings file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--timestamp", o.timestamp, "on|off: timestamp line in reports")->check(CLI::IsMember({"on", "off"}));
}

RunConfig load_run_config(const Options& o) {
  try {
    Config cfg = o.config.empty() ? Config{} : Config::load(o.config);
    for (const auto& [k, v] : o.overrides) cfg.set(k, v);
    if (o.no_wrap) cfg.set("wrap", "false");
    if (o.fixed_mean) {
      cfg.set("thrombus_mean_mode", "fixed");
      cfg.set("fixed_thrombus_mean", std::to_string(*o.fixed_mean));
    }
    if (o.write_masks) cfg.set("write_masks", "true");
    return RunConfig::from_config(cfg);
  } catch (const std::exception& e) {
    throw UsageError(e.what());
  }
}

std::string stamp(const Options& o) { return o.timestamp == "off" ? std::string{} : utc_timestamp(); }

fs::path in_dir(const std::string& p, const std::string& dir) {
  const fs::path path(p);
  return path.is_absolute() || dir.empty() ? path : fs::path(dir) / path;
}

void write_phantom_files(const Phantom& ph, const RunConfig& rc, const fs::path& out) {
  fs::create_directories(out);
  save_volume(ph.volume, out / "volume.vvol");
  const Centerline c = ph.truth->centerline();
  save_centerline(c, out / "centerline.txt");
  std::vector<RadialContour> outer, lumen;
  for (const auto& plane : build_mpr_planes(c, rc.mpr)) {
    outer.push_back(truth_contour(*ph.truth, plane, rc.tracking.unfold, Surface::Outer));
    lumen.push_back(truth_contour(*ph.truth, plane, rc.tracking.unfold, Surface::Lumen));
  }
  write_contours(out / "truth_contours.txt", outer);
  write_contours(out / "truth_lumen_contours.txt", lumen);
}

void write_masks(const SliceSeries& s, const TrackResult& tr, const fs::path& out) {
  const fs::path dir = out / "masks";
  fs::create_directories(dir);
  char name[64];
  for (int i = 0; i < s.size(); ++i) {
    const auto& slice = s.slices[static_cast<std::size_t>(i)];
    if (const auto& lm = s.lumens[static_cast<std::size_t>(i)]) {
      std::snprintf(name, sizeof name, "lumen_%04d.pgm", i);
      write_pgm(lm->mask, dir / name);
    }
    if (const auto& c = tr.contours[static_cast<std::size_t>(i)]) {
      std::snprintf(name, sizeof name, "wall_%04d.pgm", i);
      write_pgm(contour_to_mask(*c, slice.plane.resolution, slice.pixels.width, slice.pixels.height), dir / name);
    }
  }
}

struct Segmented {
  SliceSeries series;
  TrackResult track;
};

Segmented run_segmentation(const Volume& v, const Centerline& c, const std::vector<SeedContour>& seeds,
                           const RunConfig& rc, const Options& o) {
  Segmented r{prepare_series(v, c, rc), {}};
  for (const auto& s : seeds) {
    if (s.slice_index < 0 || s.slice_index >= r.series.size()) {
      throw UsageError("seed slice " + std::to_string(s.slice_index) + " outside [0, " +
                       std::to_string(r.series.size() - 1) + "]");
    }
  }
  r.track = track_all(r.series.slices, r.series.lumens, seeds, rc.tracking, r.series.calcium_ceiling, rc.parallel);
  const fs::path out(o.out);
  fs::create_directories(out);
  const SegmentOutputs so = collect_outputs(r.series, r.track, rc.tracking.unfold);
  write_contours(out / "wall_contours.txt", so.wall);
  write_contours(out / "lumen_contours.txt", so.lumen);
  write_text(out / "segment_report.txt", format_segment_report(r.series, r.track, stamp(o)));
  if (rc.write_masks) write_masks(r.series, r.track, out);
  for (const auto& w : r.series.warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "segmented " << r.series.size() << " slices, failed " << r.track.failed << "\n";
  return r;
}

int cmd_phantom(const Options& o) {
  const RunConfig rc = load_run_config(o);
  const Phantom ph = generate_phantom(rc.phantom);
  write_phantom_files(ph, rc, o.out);
  std::cout << "phantom written to " << o.out << "\n";
  return 0;
}

int cmd_segment(const Options& o) {
  const RunConfig rc = load_run_config(o);
  if (o.seed_contours.empty()) throw UsageError("segment needs at least one --seed-contours file");
  std::vector<RadialContour> seed_list;
  for (const auto& p : o.seed_contours) {
    auto part = read_contours(p);
    seed_list.insert(seed_list.end(), part.begin(), part.end());
  }
  if (seed_list.empty()) throw UsageError("seed contour files contain no contours");
  const Volume v = load_volume(o.volume);
  const Centerline c = load_centerline(o.centerline);
  const Segmented r = run_segmentation(v, c, seeds_from_contours(seed_list), rc, o);
  return r.track.failed ? 2 : 0;
}

int cmd_evaluate(const Options& o) {
  const RunConfig rc = load_run_config(o);
  const auto truth = read_contours(in_dir(o.truth_contours, ""));
  const auto truth_lumen = read_contours(in_dir(o.truth_lumen_contours, ""));
  const auto wall = read_contours(in_dir(o.contours, ""));
  const auto lumen = read_contours(in_dir(o.lumen_contours, ""));
  if (truth.empty()) throw std::runtime_error("no truth contours in " + o.truth_contours);
  if (wall.empty()) throw std::runtime_error("no contours in " + o.contours);
  int n = 0;
  for (const auto& t : truth) n = std::max(n, t.slice_index + 1);
  MprPlane probe;
  probe.extent = rc.mpr.extent;
  probe.resolution = rc.mpr.resolution;
  const int size = probe.size();

  EvalInput in;
  in.slice_spacing = rc.mpr.step;
  in.resolution = rc.mpr.resolution;
  in.auto_wall = rasterize_series(wall, n, size, rc.mpr.resolution);
  in.auto_lumen = rasterize_series(lumen, n, size, rc.mpr.resolution);
  const auto tw = rasterize_series(truth, n, size, rc.mpr.resolution);
  const auto tl = rasterize_series(truth_lumen, n, size, rc.mpr.resolution);
  in.auto_contours.assign(static_cast<std::size_t>(n), std::nullopt);
  in.truth_contours.assign(static_cast<std::size_t>(n), std::nullopt);
  for (const auto& c : wall) in.auto_contours[static_cast<std::size_t>(c.slice_index)] = c;
  for (const auto& c : truth) in.truth_contours[static_cast<std::size_t>(c.slice_index)] = c;
  for (int i = 0; i < n; ++i) {
    if (!tw[static_cast<std::size_t>(i)] || !tl[static_cast<std::size_t>(i)]) {
      throw std::runtime_error("truth contours missing slice " + std::to_string(i));
    }
    in.truth_wall.push_back(*tw[static_cast<std::size_t>(i)]);
    in.truth_lumen.push_back(*tl[static_cast<std::size_t>(i)]);
  }
  const EvalReport rep = evaluate_run(in);
  const fs::path out(o.out);
  fs::create_directories(out);
  write_text(out / "eval_report.txt", format_report(rep, stamp(o)));
  write_text(out / "eval_report.csv", format_report_csv(rep));
  std::cout << dsc_line(rep.dsc) << "\n";
  return 0;
}

int cmd_pipeline(const Options& o) {
  const RunConfig rc = load_run_config(o);
  const Phantom ph = generate_phantom(rc.phantom);
  const fs::path out(o.out);
  write_phantom_files(ph, rc, out);
  const Centerline c = ph.truth->centerline();
  const auto planes = build_mpr_planes(c, rc.mpr);
  const auto seed_idx = rc.seed_slices.empty() ? default_seed_slices(static_cast<int>(planes.size())) : rc.seed_slices;
  std::vector<RadialContour> seed_list;
  for (int k : seed_idx) {
    if (k < 0 || k >= static_cast<int>(planes.size())) throw UsageError("seed slice " + std::to_string(k) + " out of range");
    seed_list.push_back(truth_contour(*ph.truth, planes[static_cast<std::size_t>(k)], rc.tracking.unfold, Surface::Outer));
  }
  write_contours(out / "seed_contours.txt", seed_list);
  const Segmented r = run_segmentation(ph.volume, c, seeds_from_contours(seed_list), rc, o);
  const EvalReport rep = evaluate_against_truth(*ph.truth, r.series, r.track, rc);
  write_text(out / "eval_report.txt", format_report(rep, stamp(o)));
  write_text(out / "eval_report.csv", format_report_csv(rep));
  std::cout << dsc_line(rep.dsc) << "\n";
  return r.track.failed ? 2 : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"aortaseg: vessel wall segmentation by slice-to-slice optimal surface tracking"};
  app.require_subcommand(1);
  Options o;

  auto* phantom = app.add_subcommand("phantom", "generate a synthetic aneurysm volume with ground truth");
  add_common(phantom, o);

  auto* segment = app.add_subcommand("segment", "segment lumen and outer wall from seed contours");
  add_common(segment, o);
  add_tracking_flags(segment, o);
  segment->add_option("--volume", o.volume, "VVOL1 header")->required();
  segment->add_option("--centerline", o.centerline, "centerline text file")->required();
  segment->add_option("--seed-contours", o.seed_contours, "seed contour file(s)")->expected(1, -1);

  auto* evaluate = app.add_subcommand("evaluate", "compare contours with ground truth");
  add_common(evaluate, o);
  evaluate->add_option("--contours", o.contours, "segmented wall contours");
  evaluate->add_option("--lumen-contours", o.lumen_contours, "segmented lumen contours");
  evaluate->add_option("--truth-contours", o.truth_contours, "reference wall contours");
  evaluate->add_option("--truth-lumen-contours", o.truth_lumen_contours, "reference lumen contours");

  auto* pipeline = app.add_subcommand("pipeline", "phantom, segment and evaluate in one go");
  add_common(pipeline, o);
  add_tracking_flags(pipeline, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*phantom) return cmd_phantom(o);
    if (*segment) return cmd_segment(o);
    if (*evaluate) return cmd_evaluate(o);
    if (*pipeline) return cmd_pipeline(o);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
