#include "aortaseg/volume.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "aortaseg/config.hpp"

namespace aortaseg {

Volume::Volume(std::array<int, 3> d, Vec3 s, Vec3 o, float fill) : dims(d), spacing(s), origin(o) {
  if (d[0] < 1 || d[1] < 1 || d[2] < 1) throw std::invalid_argument("volume dims must be >= 1");
  intensities.assign(voxel_count(), fill);
  validate();
}

void Volume::validate() const {
  if (dims[0] < 1 || dims[1] < 1 || dims[2] < 1) throw std::invalid_argument("volume dims must be >= 1");
  if (!(spacing.x > 0.0 && spacing.y > 0.0 && spacing.z > 0.0)) {
    throw std::invalid_argument("volume spacing must be positive");
  }
  if (intensities.size() != voxel_count()) {
    throw std::invalid_argument("volume payload size " + std::to_string(intensities.size()) +
                                " does not match dims (" + std::to_string(voxel_count()) + ")");
  }
}

namespace {

static_assert(sizeof(float) == 4);

std::uint32_t to_little(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

}  // namespace

Volume load_volume(const std::filesystem::path& header_path) {
  if (!std::filesystem::exists(header_path)) {
    throw std::runtime_error("volume header not found: " + header_path.string());
  }
  const Config hdr = Config::load(header_path);
  if (hdr.get_string("magic", "") != "VVOL1") throw std::runtime_error("not a VVOL1 header: " + header_path.string());
  if (hdr.get_string("dtype", "f32le") != "f32le") throw std::runtime_error("unsupported dtype (expected f32le)");

  const auto d = hdr.get_doubles("dims", 3);
  const auto s = hdr.get_doubles("spacing", 3);
  const auto o = hdr.has("origin") ? hdr.get_doubles("origin", 3) : std::vector<double>{0, 0, 0};
  for (double x : d) {
    if (x < 1 || x != std::floor(x)) throw std::runtime_error("dims must be positive integers");
  }
  for (double x : s) {
    if (!(x > 0.0)) throw std::runtime_error("non-positive spacing in " + header_path.string());
  }

  Volume v;
  v.dims = {static_cast<int>(d[0]), static_cast<int>(d[1]), static_cast<int>(d[2])};
  v.spacing = {s[0], s[1], s[2]};
  v.origin = {o[0], o[1], o[2]};

  const auto data_path = header_path.parent_path() / hdr.require_string("data");
  std::ifstream in(data_path, std::ios::binary);
  if (!in) throw std::runtime_error("volume payload not found: " + data_path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (bytes.size() != v.voxel_count() * 4) {
    throw std::runtime_error("payload size mismatch: header declares " + std::to_string(v.voxel_count()) +
                             " voxels, payload holds " + std::to_string(bytes.size() / 4.0));
  }
  v.intensities.resize(v.voxel_count());
  for (std::size_t n = 0; n < v.intensities.size(); ++n) {
    std::uint32_t raw = 0;
    std::memcpy(&raw, bytes.data() + 4 * n, 4);
    raw = to_little(raw);
    std::memcpy(&v.intensities[n], &raw, 4);
  }
  v.validate();
  return v;
}

void save_volume(const Volume& v, const std::filesystem::path& header_path) {
  v.validate();
  auto data_name = header_path.stem().string() + ".raw";
  {
    std::ofstream hdr(header_path);
    if (!hdr) throw std::runtime_error("cannot write " + header_path.string());
    hdr.precision(17);
    hdr << "magic = VVOL1\n"
        << "dims = " << v.dims[0] << ' ' << v.dims[1] << ' ' << v.dims[2] << '\n'
        << "spacing = " << v.spacing.x << ' ' << v.spacing.y << ' ' << v.spacing.z << '\n'
        << "origin = " << v.origin.x << ' ' << v.origin.y << ' ' << v.origin.z << '\n'
        << "dtype = f32le\n"
        << "data = " << data_name << '\n';
  }
  std::ofstream out(header_path.parent_path() / data_name, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write volume payload");
  std::vector<char> bytes(v.intensities.size() * 4);
  for (std::size_t n = 0; n < v.intensities.size(); ++n) {
    std::uint32_t raw = 0;
    std::memcpy(&raw, &v.intensities[n], 4);
    raw = to_little(raw);
    std::memcpy(bytes.data() + 4 * n, &raw, 4);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

double trilinear_sample(const Volume& v, const Vec3& p, double fill) {
  const double f[3] = {(p.x - v.origin.x) / v.spacing.x, (p.y - v.origin.y) / v.spacing.y,
                       (p.z - v.origin.z) / v.spacing.z};
  int i0[3];
  double t[3];
  for (int a = 0; a < 3; ++a) {
    const int n = v.dims[a];
    if (f[a] < -0.5 || f[a] > n - 0.5) return fill;
    const double c = std::clamp(f[a], 0.0, static_cast<double>(n - 1));
    i0[a] = std::min(static_cast<int>(std::floor(c)), std::max(n - 2, 0));
    t[a] = n > 1 ? c - i0[a] : 0.0;
  }
  const int i1 = std::min(i0[0] + 1, v.dims[0] - 1);
  const int j1 = std::min(i0[1] + 1, v.dims[1] - 1);
  const int k1 = std::min(i0[2] + 1, v.dims[2] - 1);
  auto lerp = [](double a, double b, double s) { return a + (b - a) * s; };
  const double c00 = lerp(v.at(i0[0], i0[1], i0[2]), v.at(i1, i0[1], i0[2]), t[0]);
  const double c10 = lerp(v.at(i0[0], j1, i0[2]), v.at(i1, j1, i0[2]), t[0]);
  const double c01 = lerp(v.at(i0[0], i0[1], k1), v.at(i1, i0[1], k1), t[0]);
  const double c11 = lerp(v.at(i0[0], j1, k1), v.at(i1, j1, k1), t[0]);
  return lerp(lerp(c00, c10, t[1]), lerp(c01, c11, t[1]), t[2]);
}

Centerline::Centerline(std::vector<Vec3> points) : points_(std::move(points)) {
  if (points_.size() < 2) throw std::invalid_argument("centerline needs at least 2 points");
  arc_.resize(points_.size(), 0.0);
  for (std::size_t n = 1; n < points_.size(); ++n) {
    const double seg = norm(points_[n] - points_[n - 1]);
    if (!(seg > 0.0)) throw std::invalid_argument("centerline has repeated point at index " + std::to_string(n));
    arc_[n] = arc_[n - 1] + seg;
  }
}

Vec3 Centerline::point_at(double s) const {
  s = std::clamp(s, 0.0, length());
  auto it = std::upper_bound(arc_.begin(), arc_.end(), s);
  std::size_t hi = static_cast<std::size_t>(it - arc_.begin());
  if (hi >= points_.size()) return points_.back();
  if (hi == 0) return points_.front();
  const std::size_t lo = hi - 1;
  const double t = (s - arc_[lo]) / (arc_[hi] - arc_[lo]);
  return points_[lo] + (points_[hi] - points_[lo]) * t;
}

Vec3 Centerline::tangent_at(double s, double h) const {
  const double a = std::max(0.0, s - h);
  const double b = std::min(length(), s + h);
  return normalized(point_at(b) - point_at(a));
}

Centerline load_centerline(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open centerline " + path.string());
  std::vector<Vec3> pts;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    Vec3 p;
    if (!(ls >> p.x >> p.y >> p.z)) {
      throw std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": expected 'x y z'");
    }
    pts.push_back(p);
  }
  return Centerline(std::move(pts));
}

void save_centerline(const Centerline& c, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "# x y z (mm)\n";
  char buf[128];
  for (const auto& p : c.points()) {
    std::snprintf(buf, sizeof buf, "%.6f %.6f %.6f\n", p.x, p.y, p.z);
    out << buf;
  }
}

int MprPlane::size() const { return 2 * static_cast<int>(std::ceil(extent / resolution - 1e-9)) + 1; }

Vec2 MprPlane::center_px() const {
  const double c = size() / 2;
  return {c, c};
}

Vec3 MprPlane::world_at(double px, double py) const {
  const Vec2 c = center_px();
  return center + axis1 * ((px - c.x) * resolution) + axis2 * ((py - c.y) * resolution);
}

namespace {

// Least-aligned world axis, orthogonalised against the tangent.
Vec3 initial_axis(const Vec3& t) {
  const Vec3 candidates[3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
  int best = 0;
  for (int a = 1; a < 3; ++a) {
    if (std::abs(dot(candidates[a], t)) < std::abs(dot(candidates[best], t)) - 1e-12) best = a;
  }
  return normalized(candidates[best] - t * dot(candidates[best], t));
}

}  // namespace

std::vector<MprPlane> build_mpr_planes(const Centerline& c, const MprGeometry& geom,
                                       std::vector<std::string>* warnings) {
  if (!(geom.step > 0.0)) throw std::invalid_argument("MPR step must be positive");
  if (!(geom.extent > 0.0) || !(geom.resolution > 0.0)) {
    throw std::invalid_argument("MPR extent and resolution must be positive");
  }
  if (geom.step > 5.0 && warnings) {
    warnings->push_back("MPR step " + std::to_string(geom.step) +
                        " mm exceeds 5 mm; adjacent sections may differ too much for tracking");
  }

  const double h = std::min(1.0, 0.5 * geom.step);
  const int count = static_cast<int>(std::floor(c.length() / geom.step + 1e-9)) + 1;
  std::vector<MprPlane> planes;
  planes.reserve(static_cast<std::size_t>(count));
  Vec3 u;
  for (int k = 0; k < count; ++k) {
    MprPlane p;
    p.arc_length = k * geom.step;
    p.slice_index = k;
    p.center = c.point_at(p.arc_length);
    p.normal = c.tangent_at(p.arc_length, h);
    if (k == 0) {
      u = initial_axis(p.normal);
    } else {
      // Project the previous axis onto the new plane (rotation-minimising transport).
      const Vec3 projected = u - p.normal * dot(u, p.normal);
      u = norm(projected) > 1e-9 ? normalized(projected) : initial_axis(p.normal);
    }
    p.axis1 = u;
    p.axis2 = normalized(cross(p.normal, u));
    p.extent = geom.extent;
    p.resolution = geom.resolution;
    planes.push_back(p);
  }
  return planes;
}

MprSlice resample_mpr(const Volume& v, const MprPlane& plane, double fill) {
  const int n = plane.size();
  MprSlice s{plane, Image(n, n), plane.center_px()};
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      s.pixels(i, j) = static_cast<float>(trilinear_sample(v, plane.world_at(i, j), fill));
    }
  }
  return s;
}

}  // namespace aortaseg

namespace aortaseg {

bool inside_volume(const Volume& v, const Vec3& p) {
  const double f[3] = {(p.x - v.origin.x) / v.spacing.x, (p.y - v.origin.y) / v.spacing.y,
                       (p.z - v.origin.z) / v.spacing.z};
  for (int a = 0; a < 3; ++a) {
    if (f[a] < -0.5 || f[a] > v.dims[a] - 0.5) return false;
  }
  return true;
}

}  // namespace aortaseg
