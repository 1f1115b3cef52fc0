#include <cmath>
#include <random>

#include "aortaseg/metrics.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace aortaseg;

namespace {

Mask rect(int w, int h, int x0, int y0, int x1, int y1) {
  Mask m(w, h);
  for (int j = y0; j < y1; ++j)
    for (int i = x0; i < x1; ++i) m(i, j) = 1;
  return m;
}

RadialContour round_contour(double radius_mm, int rays, int index = 39) {
  RadialContour c;
  c.r.assign(static_cast<std::size_t>(rays), index);
  c.dr = radius_mm / (index + 0.5);
  return c;
}

}  // namespace

TEST_CASE("dice identities") {
  const Mask a = rect(10, 10, 2, 2, 6, 6);
  CHECK(dsc(a, a) == 1.0);
  CHECK(dsc(a, rect(10, 10, 7, 7, 9, 9)) == 0.0);
  CHECK(dsc(rect(10, 10, 0, 0, 2, 2), rect(10, 10, 1, 0, 3, 2)) == 0.5);
  CHECK(dsc(Mask(4, 4), Mask(4, 4)) == 1.0);
  CHECK(dsc(a, Mask(10, 10)) == 0.0);
  CHECK_THROWS(dsc(a, Mask(9, 10)));

  std::mt19937_64 rng(8);
  std::bernoulli_distribution bit(0.3);
  for (int trial = 0; trial < 50; ++trial) {
    Mask x(16, 16), y(16, 16);
    for (auto& v : x.data) v = bit(rng);
    for (auto& v : y.data) v = bit(rng);
    CHECK(dsc(x, y) == dsc(y, x));
    CHECK(dsc(x, y) >= 0.0);
    CHECK(dsc(x, y) <= 1.0);
  }
}

TEST_CASE("clot volume") {
  const Mask wall = rect(30, 30, 0, 0, 20, 10);
  std::vector<std::optional<Mask>> w = {wall}, l = {Mask(30, 30)};
  CHECK(clot_volume(w, l, 5.0, 1.0) == doctest::Approx(1.0));
  CHECK(clot_volume(w, w, 5.0, 1.0) == 0.0);

  std::vector<std::optional<Mask>> ws, ls;
  for (int k = 0; k < 6; ++k) {
    ws.push_back(rect(30, 30, 0, 0, 10 + k, 10));
    ls.push_back(rect(30, 30, 0, 0, 3, 3));
  }
  ws[4].reset();
  std::vector<int> skipped;
  const double all = clot_volume(ws, ls, 2.0, 0.25, &skipped);
  CHECK(skipped == std::vector<int>{4});
  const std::vector<std::optional<Mask>> w0(ws.begin(), ws.begin() + 3), w1(ws.begin() + 3, ws.end());
  const std::vector<std::optional<Mask>> l0(ls.begin(), ls.begin() + 3), l1(ls.begin() + 3, ls.end());
  CHECK(all == doctest::Approx(clot_volume(w0, l0, 2.0, 0.25) + clot_volume(w1, l1, 2.0, 0.25)));
  CHECK_THROWS(clot_volume(ws, std::vector<std::optional<Mask>>{}, 1.0, 1.0));
}

TEST_CASE("contour diameter") {
  CHECK(contour_diameter(round_contour(20.0, 72)) == doctest::Approx(40.0).epsilon(1e-12));

  std::vector<Vec2> ellipse;
  for (int k = 0; k < 720; ++k) {
    const double t = 2.0 * kPi * k / 720;
    ellipse.push_back({100 + 25 * std::cos(t), 100 + 15 * std::sin(t)});
  }
  UnfoldParams p;
  const auto c = contour_from_polygon(ellipse, {100, 100}, 1.0, p, 0, true);
  REQUIRE(c.has_value());
  CHECK(std::abs(contour_diameter(*c) - 50.0) <= p.dr);

  RadialContour bumpy = round_contour(20.0, 36);
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> d(-5, 5);
  for (int& r : bumpy.r) r += d(rng);
  const double base = contour_diameter(bumpy);
  for (int k = 1; k < 36; ++k) {
    RadialContour rot = bumpy;
    std::rotate(rot.r.begin(), rot.r.begin() + k, rot.r.end());
    rot.theta0 = bumpy.theta0 + 2.0 * kPi * k / 36;
    CHECK(contour_diameter(rot) == doctest::Approx(base).epsilon(1e-12));
  }
}

TEST_CASE("maximal diameter picks the widest slice") {
  std::vector<RadialContour> cs;
  for (int k = 0; k < 7; ++k) {
    cs.push_back(round_contour(10.0 + (k == 4 ? 5 : k % 3), 36));
    cs.back().slice_index = k;
  }
  const DiameterResult r = max_diameter(cs);
  CHECK(r.slice == 4);
  CHECK(r.mm == doctest::Approx(30.0));
  cs[4] = round_contour(12.0, 36);
  cs[4].slice_index = 4;
  CHECK(max_diameter(cs).slice == 2);
  CHECK_THROWS(max_diameter({}));
}

TEST_CASE("summary statistics") {
  const DscSummary s = summarize({0.5, 1.0, 1.0, 0.5});
  CHECK(s.mean == 0.75);
  CHECK(s.std == 0.25);
  CHECK(s.min == 0.5);
  CHECK(s.max == 1.0);
  CHECK(dsc_line(s) == "DSC mean=0.750 std=0.250 min=0.500 max=1.000");
}

TEST_CASE("evaluation of a run") {
  EvalInput in;
  in.slice_spacing = 2.0;
  in.resolution = 0.5;
  for (int k = 0; k < 4; ++k) {
    const Mask wall = testing::disk_mask(40, 40, 20, 20, 12 + k);
    const Mask lumen = testing::disk_mask(40, 40, 20, 20, 6);
    in.truth_wall.push_back(wall);
    in.truth_lumen.push_back(lumen);
    in.auto_wall.push_back(wall);
    in.auto_lumen.push_back(lumen);
    RadialContour c = round_contour(6.0 + k, 36);
    in.auto_contours.push_back(c);
    in.truth_contours.push_back(c);
  }
  EvalReport r = evaluate_run(in);
  CHECK(r.dsc.mean == 1.0);
  CHECK(r.dsc.std == 0.0);
  CHECK(r.clot_cm3_auto == r.clot_cm3_reference);
  CHECK(r.voxels_auto == r.voxels_reference);
  CHECK(r.diameter_auto.slice == 3);
  CHECK(r.failed == 0);
  const std::string text = format_report(r);
  CHECK(text.find("DSC mean=1.000 std=0.000 min=1.000 max=1.000") != std::string::npos);
  CHECK(text.find("generated") == std::string::npos);
  CHECK(format_report(r, "2000-01-01T00:00:00Z").find("# generated 2000-01-01T00:00:00Z") != std::string::npos);
  CHECK(format_report_csv(r).rfind("slice,dsc,clot_mm3,diameter_mm,segmented\n", 0) == 0);

  in.auto_wall[1].reset();
  in.auto_contours[1].reset();
  r = evaluate_run(in);
  CHECK(r.failed == 1);
  CHECK(r.dsc.min == 0.0);
  CHECK(r.dsc.mean == 0.75);
  CHECK(format_report(r).find("    1   failed") != std::string::npos);

  in.truth_lumen.pop_back();
  CHECK_THROWS(evaluate_run(in));
}
