// Acceptance runner: one line per criterion, nonzero exit when any fails.
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "aortaseg/mincut.hpp"
#include "aortaseg/pipeline.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace aortaseg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct TestCase {
  const char* id;
  const char* name;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// random walk closed under the wrap when requested
std::vector<int> feasible_fixed(std::mt19937_64& rng, int X, int Z, int dx, bool wrap) {
  std::uniform_int_distribution<int> start(0, Z - 1), step(-dx, dx);
  for (int attempt = 0; attempt < 200; ++attempt) {
    std::vector<int> r(static_cast<std::size_t>(X));
    r[0] = start(rng);
    for (int x = 1; x < X; ++x) r[static_cast<std::size_t>(x)] = std::clamp(r[static_cast<std::size_t>(x - 1)] + step(rng), 0, Z - 1);
    if (!wrap || X <= 2 || std::abs(r.back() - r.front()) <= dx) return r;
  }
  return std::vector<int>(static_cast<std::size_t>(X), start(rng));
}

struct Instance {
  CostTable c;
  std::vector<int> fixed;
  WallGraph g;
  int dy = 0;
  int dp = 0;
};

Instance random_instance(std::mt19937_64& rng, bool integer) {
  std::uniform_int_distribution<int> pick_x(3, 16), pick_z(4, 24), pick_dx(0, 3), pick_dy(0, 4), pick_dp(0, 6), coin(0, 1);
  Instance in;
  const int X = pick_x(rng), Z = pick_z(rng), dx = pick_dx(rng);
  in.dy = pick_dy(rng);
  in.dp = pick_dp(rng);
  const bool wrap = coin(rng) == 1;
  in.c = CostTable(X, Z);
  std::uniform_int_distribution<int> ci(0, 300);
  std::uniform_real_distribution<double> cr(0.0, 300.0);
  for (double& v : in.c.data) v = integer ? ci(rng) : cr(rng);
  in.fixed = feasible_fixed(rng, X, Z, dx, wrap);
  in.g = apply_fixed_and_forbidden(differenced_weights(in.c), in.fixed, in.dp, dx, in.dy, wrap);
  return in;
}

Outcome closure_exactness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240601);
  const int trials = 1000;
  int matched = 0, open = 0;
  for (int t = 0; t < trials; ++t) {
    const WallGraph g = oracle::random_small_graph(rng);
    const auto arcs = build_arcs(g);
    const double truth = oracle::brute_force_min_closure(g.weights, arcs);
    bool ok = true;
    for (TieBreak tie : {TieBreak::Smallest, TieBreak::Largest}) {
      const ClosedSet cs = min_closed_set(g, tie);
      if (!is_closed(cs.members, arcs)) ++open, ok = false;
      if (cs.cost != truth) ok = false;
    }
    matched += ok;
  }
  const double secs = seconds_since(t0);
  return {matched == trials && secs < 60.0,
          fmt("%d/%d random lattices (<= 18 nodes, costs in [-10, 10]) match the exhaustive optimum, %d not closed, %.2f s",
              matched, trials, open, secs)};
}

double prefix_constant(const Instance& in) {
  double k = 0.0;
  for (int r : in.fixed) k += -in.g.forcing * (r + 1);
  return k;
}

Outcome telescoping() {
  std::mt19937_64 rng(77);
  int int_ok = 0, real_ok = 0, slice_ok = 0;
  const int n_int = 500, n_real = 500;
  double worst = 0.0;
  auto check = [&](const Instance& in, TieBreak tie, bool exact) {
    const ClosedSet cs = min_closed_set(in.g, tie);
    const auto r = closure_to_surface(cs, in.g);
    double sum = 0.0;
    for (int x = 0; x < in.c.width; ++x) sum += in.c(x, r[static_cast<std::size_t>(x)]);
    const double lhs = cs.cost - prefix_constant(in);
    if (exact) return lhs == sum;
    const double rel = std::abs(lhs - sum) / std::max(1.0, std::abs(sum));
    worst = std::max(worst, rel);
    return rel <= 1e-9;
  };
  for (int t = 0; t < n_int; ++t) int_ok += check(random_instance(rng, true), t % 2 ? TieBreak::Largest : TieBreak::Smallest, true);
  for (int t = 0; t < n_real; ++t) real_ok += check(random_instance(rng, false), t % 2 ? TieBreak::Largest : TieBreak::Smallest, false);

  // costs from unfolded phantom slices, full 72 x 120 lattice
  RunConfig rc;
  rc.phantom.length = 12.0;
  rc.phantom.bulge_center = 6.0;
  rc.phantom.bulge_amplitude = 8.0;
  rc.phantom.bulge_width = 3.0;
  rc.phantom.wall_offset = 3.0;
  const Phantom ph = generate_phantom(rc.phantom);
  const SliceSeries s = prepare_series(ph.volume, ph.truth->centerline(), rc);
  int n_slice = 0;
  for (int k = 1; k < s.size(); ++k) {
    Instance in;
    const RadialContour fixed = truth_contour(*ph.truth, s.slices[static_cast<std::size_t>(k - 1)].plane, rc.tracking.unfold, Surface::Outer);
    const UnfoldedSlice u = unfold(s.slices[static_cast<std::size_t>(k)], s.slices[static_cast<std::size_t>(k)].center_px, rc.tracking.unfold);
    in.c = base_costs(u, 40.0 + 0.37 * k);
    in.fixed = fixed.r;
    in.dy = rc.tracking.dy;
    in.dp = rc.tracking.dp;
    in.g = apply_fixed_and_forbidden(differenced_weights(in.c), in.fixed, in.dp, rc.tracking.dx, in.dy, rc.tracking.wrap);
    ++n_slice;
    slice_ok += check(in, TieBreak::Largest, false);
  }
  const bool pass = int_ok == n_int && real_ok == n_real && slice_ok == n_slice;
  return {pass, fmt("integer %d/%d exact, float %d/%d and phantom-slice %d/%d within 1e-9 relative (worst %.2e)", int_ok,
                    n_int, real_ok, n_real, slice_ok, n_slice, worst)};
}

Outcome constraints() {
  std::mt19937_64 rng(4242);
  const int trials = 1000;
  long violations = 0;
  for (int t = 0; t < trials; ++t) {
    const Instance in = random_instance(rng, t % 2 == 0);
    const ClosedSet cs = min_closed_set(in.g, t % 3 ? TieBreak::Largest : TieBreak::Smallest);
    const auto r = closure_to_surface(cs, in.g);
    const int X = in.g.rays;
    for (int x = 0; x < X; ++x) {
      const int rx = r[static_cast<std::size_t>(x)];
      const int f = in.fixed[static_cast<std::size_t>(x)];
      if (rx < f - in.dy || rx > f + std::min(in.dp, in.dy)) ++violations;
      if (x + 1 < X && std::abs(r[static_cast<std::size_t>(x + 1)] - rx) > in.g.dx) ++violations;
      if (in.g.wrap && X > 2 && x == X - 1 && std::abs(r[0] - rx) > in.g.dx) ++violations;
    }
  }
  return {violations == 0, fmt("%d random solves, %ld violations", trials, violations)};
}

struct PhantomRun {
  double dsc = 0.0;
  int tracked = 0;
  int failed = 0;
  double secs = 0.0;
  DiameterResult diameter;
};

PhantomRun run_phantom(CenterlineShape shape, double bulge) {
  const auto t0 = std::chrono::steady_clock::now();
  RunConfig rc;
  rc.phantom.shape = shape;
  rc.phantom.length = 60.0;
  rc.phantom.bulge_center = 30.0;
  rc.phantom.bulge_amplitude = bulge;
  rc.phantom.wall_offset = 4.0;
  rc.phantom.noise_sigma = 10.0;
  rc.phantom.seed = 11;
  const Phantom ph = generate_phantom(rc.phantom);
  const SliceSeries s = prepare_series(ph.volume, ph.truth->centerline(), rc);
  std::vector<SeedContour> seeds;
  for (int k : default_seed_slices(s.size())) {
    seeds.push_back({k, truth_contour(*ph.truth, s.slices[static_cast<std::size_t>(k)].plane, rc.tracking.unfold, Surface::Outer)});
  }
  const TrackResult tr = track_all(s.slices, s.lumens, seeds, rc.tracking, s.calcium_ceiling, true);
  const EvalReport rep = evaluate_against_truth(*ph.truth, s, tr, rc);
  PhantomRun out;
  out.dsc = rep.dsc.mean;
  out.failed = tr.failed;
  for (const auto& d : tr.diagnostics) out.tracked += d.status == SliceStatus::Tracked;
  out.diameter = rep.diameter_auto;
  out.secs = seconds_since(t0);
  return out;
}

Outcome phantom_dsc() {
  bool pass = true;
  std::string detail;
  for (auto shape : {CenterlineShape::Straight, CenterlineShape::Arc}) {
    for (double bulge : {10.0, 12.5, 15.0}) {
      const PhantomRun r = run_phantom(shape, bulge);
      const bool ok = r.dsc >= 0.90 && r.tracked >= 40 && r.secs <= 30.0;
      pass = pass && ok;
      detail += fmt("%s%s/%.1fmm DSC %.3f (%d tracked, %d failed, %.1f s)", detail.empty() ? "" : "; ",
                    shape == CenterlineShape::Straight ? "straight" : "arc", bulge, r.dsc, r.tracked, r.failed, r.secs);
    }
  }
  return {pass, detail};
}

struct CenterTally {
  int slices = 0;
  int triggered = 0;
  int correct = 0;
};

CenterTally tally_centers(double tissue) {
  CenterTally t;
  const double a = 16.0, b = 8.0;
  const double angles[] = {0.0, 35.0, 80.0, 125.0, 210.0};
  for (int i = 0; i < 5; ++i) {
    RunConfig rc;
    rc.phantom.length = 9.0;
    rc.phantom.bulge_center = 4.5;
    rc.phantom.lumen_radius = a;
    rc.phantom.lumen_eccentricity = std::sqrt(1.0 - (b * b) / (a * a));
    rc.phantom.lumen_angle = angles[i] * kPi / 180.0;
    const double side = i % 2 ? 1.0 : -1.0;
    rc.phantom.wall_offset = a * a / b - b;
    rc.phantom.wall_offset_angle = rc.phantom.lumen_angle + side * kPi / 2.0;
    rc.phantom.outer_radius = a * a / b + 1.0;
    rc.phantom.level_tissue = tissue;
    rc.phantom.noise_sigma = 10.0;
    rc.phantom.seed = 100 + static_cast<std::uint64_t>(i);
    rc.mpr.extent = 70.0;
    const Phantom ph = generate_phantom(rc.phantom);
    const SliceSeries s = prepare_series(ph.volume, ph.truth->centerline(), rc);
    for (int k = 0; k < s.size(); ++k) {
      ++t.slices;
      const auto& lum = s.lumens[static_cast<std::size_t>(k)];
      if (!lum) continue;
      EllipseFit fit;
      try {
        fit = fit_ellipse(lum->mask);
      } catch (const std::invalid_argument&) {
        continue;
      }
      if (!correction_triggered(fit, rc.tracking)) continue;
      ++t.triggered;
      const MprSlice& sl = s.slices[static_cast<std::size_t>(k)];
      const Vec2 chosen = choose_center(sl, lum->mask, fit, rc.tracking.center_square);
      const MaskMoments wall = mask_moments(ground_truth_masks(*ph.truth, sl.plane).second);
      const Vec2 wc{wall.cx, wall.cy};
      const Vec2 other = chosen == fit.candidates[0] ? fit.candidates[1] : fit.candidates[0];
      t.correct += norm(chosen - wc) < norm(other - wc);
    }
  }
  return t;
}

Outcome center_disambiguation() {
  const CenterTally fat = tally_centers(-100.0);
  const CenterTally soft = tally_centers(45.0);
  const double rate = fat.triggered ? static_cast<double>(fat.correct) / fat.triggered : 0.0;
  const double soft_rate = soft.triggered ? static_cast<double>(soft.correct) / soft.triggered : 0.0;
  return {fat.slices >= 50 && fat.triggered > 0 && rate >= 0.95,
          fmt("%d slices, %d triggered, thrombus side chosen %d (%.1f%%); at tissue 45 HU: %d/%d (%.1f%%, informational)",
              fat.slices, fat.triggered, fat.correct, 100.0 * rate, soft.correct, soft.triggered, 100.0 * soft_rate)};
}

Outcome plan_property() {
  const TrackPlan p = plan_tracks(10, {0, 5, 9});
  const std::vector<std::pair<int, int>> expect = {{0, 1}, {1, 2}, {5, 4}, {4, 3}, {5, 6}, {6, 7}, {9, 8}};
  const bool example = p.pairs == expect;
  std::mt19937_64 rng(31337);
  int valid = 0;
  std::string first_error;
  for (int t = 0; t < 1000; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 120)(rng);
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    std::shuffle(all.begin(), all.end(), rng);
    all.resize(static_cast<std::size_t>(std::uniform_int_distribution<int>(1, std::min(n, 8))(rng)));
    std::string why;
    const TrackPlan plan = plan_tracks(n, all);
    bool ok = plan_is_valid(plan, n, &why);
    std::vector<int> seen(static_cast<std::size_t>(n), 0);
    for (auto pr : plan.pairs) ++seen[static_cast<std::size_t>(pr.second)];
    for (int i = 0; i < n; ++i) {
      const bool seed = std::find(all.begin(), all.end(), i) != all.end();
      if (seen[static_cast<std::size_t>(i)] != (seed ? 0 : 1)) ok = false;
    }
    if (!ok && first_error.empty()) first_error = why;
    valid += ok;
  }
  return {example && valid == 1000,
          fmt("worked example %s; %d/1000 random plans assign every slice once in a valid order%s%s",
              example ? "reproduced" : "MISMATCH", valid, first_error.empty() ? "" : " - ", first_error.c_str())};
}

Outcome metric_sanity() {
  auto sq = [](int x0, int y0, int side) {
    Mask m(8, 8);
    for (int j = y0; j < y0 + side; ++j)
      for (int i = x0; i < x0 + side; ++i) m(i, j) = 1;
    return m;
  };
  const bool ident = dsc(sq(1, 1, 3), sq(1, 1, 3)) == 1.0 && dsc(sq(0, 0, 2), sq(4, 4, 2)) == 0.0 &&
                     dsc(sq(0, 0, 2), sq(1, 0, 2)) == 0.5;

  RunConfig rc;
  rc.phantom.length = 60.0;
  rc.phantom.bulge_center = 30.0;
  rc.phantom.bulge_amplitude = 12.0;
  rc.phantom.wall_offset = 4.0;
  rc.mpr.resolution = 0.5;
  const GroundTruth gt(rc.phantom);
  const auto planes = build_mpr_planes(gt.centerline(), rc.mpr);
  std::vector<std::optional<Mask>> walls, lumens;
  std::vector<RadialContour> outer;
  for (const auto& plane : planes) {
    auto [l, w] = ground_truth_masks(gt, plane);
    walls.push_back(std::move(w));
    lumens.push_back(std::move(l));
    outer.push_back(truth_contour(gt, plane, rc.tracking.unfold, Surface::Outer));
  }
  const double est = clot_volume(walls, lumens, rc.mpr.step, rc.mpr.resolution * rc.mpr.resolution);
  const double half = rc.mpr.step / 2.0;
  const double ref = gt.thrombus_volume(planes.front().arc_length - half, planes.back().arc_length + half) / 1000.0;
  const double err = std::abs(est - ref) / ref;
  const DiameterResult d = max_diameter(outer);
  const int bulge_slice = static_cast<int>(std::lround(rc.phantom.bulge_center / rc.mpr.step));
  const bool pass = ident && err <= 0.05 && std::abs(d.slice - bulge_slice) <= 1;
  return {pass, fmt("dsc identities %s; clot volume %.3f vs analytic %.3f cm3 (%.2f%%); max diameter %.2f mm at slice %d (bulge %d)",
                    ident ? "hold" : "FAIL", est, ref, 100.0 * err, d.mm, d.slice, bulge_slice)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  const fs::path dir = testing::scratch_dir("acceptance_golden");
  std::ofstream(dir / "run.cfg") << "seed = 7\nshape = arc\nbulge_amplitude = 12\nwall_offset = 4\n";
  for (const char* out : {"a", "b"}) {
    const std::string cmd = std::string(AORTASEG_CLI) + " pipeline --timestamp off --config " + (dir / "run.cfg").string() +
                            " --out " + (dir / out).string() + " > " + (dir / "log").string() + " 2>&1";
    const int st = std::system(cmd.c_str());
    if (!WIFEXITED(st) || WEXITSTATUS(st) != 0) return {false, fmt("pipeline run '%s' exited with status %d", out, st)};
  }
  int same = 0, total = 0;
  std::string diff;
  for (const auto& e : fs::directory_iterator(dir / "a")) {
    ++total;
    const fs::path other = dir / "b" / e.path().filename();
    if (fs::exists(other) && slurp(e.path()) == slurp(other)) {
      ++same;
    } else {
      diff += " " + e.path().filename().string();
    }
  }
  fs::remove_all(dir);
  return {total > 0 && same == total, fmt("%d/%d output files byte-identical across two runs%s", same, total, diff.c_str())};
}

}  // namespace

int main() {
  const std::vector<TestCase> cases = {
      {"1", "closure-solver exactness", closure_exactness},
      {"2", "telescoping identity", telescoping},
      {"3", "constraint satisfaction", constraints},
      {"4", "end-to-end phantom DSC", phantom_dsc},
      {"5", "center disambiguation", center_disambiguation},
      {"6", "tracking plan", plan_property},
      {"7", "metric sanity", metric_sanity},
      {"8", "determinism and golden files", determinism},
  };
  int failed = 0;
  for (const auto& c : cases) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s criterion %s (%s): %s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(cases.size()) - failed, cases.size());
  return failed == 0 ? 0 : 1;
}
