#include <cmath>
#include <random>

#include "aortaseg/wallgraph.hpp"
#include "doctest.h"

using namespace aortaseg;

namespace {

UnfoldedSlice unfolded(int rays, int z, float fill) {
  UnfoldedSlice u;
  u.samples = Grid2D<float>(rays, z, fill);
  return u;
}

CostTable column(std::vector<double> values) {
  CostTable c(1, static_cast<int>(values.size()));
  for (int z = 0; z < c.height; ++z) c(0, z) = values[static_cast<std::size_t>(z)];
  return c;
}

}  // namespace

TEST_CASE("base costs") {
  auto u = unfolded(8, 4, 40);
  for (double v : base_costs(u, 40).data) CHECK(v == 0.0);
  u.samples(0, 0) = 300;
  u.samples(1, 0) = 10;
  auto c = base_costs(u, 40);
  CHECK(c(0, 0) == 260.0);
  CHECK(c(1, 0) == 30.0);
  CHECK_THROWS(base_costs(u, std::nan("")));
}

TEST_CASE("differenced weights telescope") {
  auto w = differenced_weights(column({5, 1, 4}));
  CHECK(w(0, 0) == 5);
  CHECK(w(0, 1) == -4);
  CHECK(w(0, 2) == 3);
  auto flat = differenced_weights(column({7, 7, 7, 7}));
  CHECK(flat(0, 0) == 7);
  for (int z = 1; z < 4; ++z) CHECK(flat(0, z) == 0);

  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 300);
  CostTable c(6, 30);
  for (double& v : c.data) v = d(rng);
  auto wr = differenced_weights(c);
  for (int x = 0; x < 6; ++x) {
    double sum = 0;
    for (int z = 0; z < 30; ++z) {
      sum += wr(x, z);
      CHECK(sum == c(x, z));
    }
  }
}

TEST_CASE("fixed prefix and forbidden zone") {
  CostTable w(2, 6, 1.0);
  const std::vector<int> fixed = {3, 1};
  WallGraph g = apply_fixed_and_forbidden(w, fixed, 1, 2, 2, true);
  const double M = g.forcing;
  CHECK(M > 0);
  CHECK(std::exp2(std::round(std::log2(M))) == M);
  for (int z = 0; z < 6; ++z) {
    CHECK(g.weight(0, 0, z) == (z <= 3 ? -M : kInfiniteWeight));
    CHECK(g.weight(0, 1, z) == (z == 5 ? kInfiniteWeight : 1.0));
    CHECK(g.weight(1, 1, z) == (z >= 3 ? kInfiniteWeight : 1.0));
  }
  WallGraph loose = apply_fixed_and_forbidden(w, fixed, 6, 2, 2, true);
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 6; ++z) CHECK(loose.weight(x, 1, z) == 1.0);
  WallGraph tight = apply_fixed_and_forbidden(w, fixed, 0, 2, 2, true);
  for (int x = 0; x < 2; ++x)
    for (int z = 0; z < 6; ++z) CHECK(std::isinf(tight.weight(x, 1, z)) == (z > fixed[static_cast<std::size_t>(x)]));
  CHECK_THROWS(apply_fixed_and_forbidden(w, std::vector<int>{6, 0}, 1, 2, 2, true));
  CHECK_THROWS(apply_fixed_and_forbidden(w, std::vector<int>{1}, 1, 2, 2, true));
}

TEST_CASE("forcing weight exceeds any layer-1 swing") {
  CostTable w = differenced_weights(column({5, 1, 4, 0, 9}));
  const double M = forcing_weight(w);
  CHECK(M >= 1 + 9);
  CHECK(std::exp2(std::round(std::log2(M))) == M);
}

TEST_CASE("arc enumeration") {
  auto arcs = build_arcs(2, 2, 2, 1, 1, false);
  CHECK(arcs.size() == 20);
  int counts[3] = {0, 0, 0};
  for (const auto& a : arcs) ++counts[static_cast<int>(a.kind)];
  CHECK(counts[0] == 4);
  CHECK(counts[1] == 8);
  CHECK(counts[2] == 8);
  for (std::size_t i = 1; i < arcs.size(); ++i) CHECK(static_cast<int>(arcs[i - 1].kind) <= static_cast<int>(arcs[i].kind));
  CHECK(build_arcs(2, 2, 2, 1, 1, true).size() == 20);
  CHECK(build_arcs(3, 1, 2, 1, 1, true).size() == 3 * 1 + 3 * 2 * 2);
  CHECK(build_arcs(3, 1, 2, 1, 1, false).size() == 3 * 1 + 4 * 2);

  WallGraph g(5, 2, 7, 0, 3, true);
  auto zof = [&](int node) { return node % g.samples; };
  for (const auto& a : build_arcs(g)) {
    REQUIRE(a.head >= 0);
    REQUIRE(a.head < static_cast<int>(g.node_count()));
    CHECK(zof(a.head) <= zof(a.tail));
    if (a.kind == ArcKind::XZ) CHECK(zof(a.head) == zof(a.tail));
    if (zof(a.tail) == 0) CHECK(zof(a.head) == 0);
  }
}

TEST_CASE("infinity never below the fixed contour on layer 1") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> fz(0, 19), dp(0, 6);
  for (int trial = 0; trial < 50; ++trial) {
    CostTable w(8, 20, 0.5);
    std::vector<int> fixed(8);
    for (int& f : fixed) f = fz(rng);
    WallGraph g = apply_fixed_and_forbidden(w, fixed, dp(rng), 2, 2, true);
    for (int x = 0; x < 8; ++x)
      for (int z = 0; z <= fixed[static_cast<std::size_t>(x)]; ++z) CHECK(std::isfinite(g.weight(x, 1, z)));
  }
}

TEST_CASE("thrombus mean from the ring") {
  const int X = 16, Z = 40;
  auto u = unfolded(X, Z, 300);
  std::mt19937_64 rng(2);
  std::normal_distribution<float> noise(0, 10);
  std::vector<int> lumen(X, 9), fixed(X, 30);
  std::size_t n = 0;
  for (int x = 0; x < X; ++x)
    for (int z = 10; z < Z; ++z) {
      u.samples(x, z) = 40 + noise(rng);
      n += z <= 30;
    }
  auto est = estimate_thrombus_mean(u, lumen, fixed, 600, 99);
  CHECK(est.samples == n);
  CHECK(!est.fallback);
  CHECK(std::abs(est.mean - 40) < 3 * 10 / std::sqrt(static_cast<double>(n)));

  auto none = estimate_thrombus_mean(u, lumen, lumen, 600, 42);
  CHECK(none.fallback);
  CHECK(none.mean == 42);
  CHECK(!none.note.empty());

  auto clean = unfolded(X, Z, 40);
  for (int x = 0; x < X; ++x)
    for (int z = 0; z <= 9; ++z) clean.samples(x, z) = 300;
  clean.samples(3, 15) = 900;
  clean.samples(3, 16) = 900;
  auto speck = estimate_thrombus_mean(clean, lumen, fixed, 600, 0);
  CHECK(std::abs(speck.mean - 40) <= 2);
  CHECK(speck.samples == n - 2);

  auto margin = estimate_thrombus_mean(clean, lumen, fixed, 600, 0, 2);
  CHECK(margin.samples == n - 2 - 2 * X);
}

TEST_CASE("tracking parameter validation") {
  TrackingParams p;
  p.dy = 5;
  CHECK_THROWS(p.validate());
  p = TrackingParams{};
  p.dx = -1;
  CHECK_THROWS(p.validate());
  Config cfg;
  cfg.set("dy", "3");
  cfg.set("wrap", "false");
  cfg.set("thrombus_mean_mode", "fixed");
  cfg.set("rays", "36");
  auto q = TrackingParams::from_config(cfg);
  CHECK(q.dy == 3);
  CHECK(!q.wrap);
  CHECK(q.thrombus_mode == ThrombusMeanMode::Fixed);
  CHECK(q.unfold.rays == 36);
  cfg.set("thrombus_mean_mode", "median");
  CHECK_THROWS(TrackingParams::from_config(cfg));
}

TEST_CASE("layer dump") {
  WallGraph g(2, 2, 3, 1, 1, false);
  g.weight(0, 1, 2) = kInfiniteWeight;
  g.weight(1, 1, 0) = -1.5;
  CHECK(dump_layer(g, 1) == "0 0 inf\n-1.5 0 0\n");
}
