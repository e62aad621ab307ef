#include "nlos/render.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace nlos {

void validate_scene(const Scene& scene) {
  for (std::size_t i = 0; i < scene.points.size(); ++i) {
    const auto& p = scene.points[i];
    if (!(p.position.z > 0.0)) {
      throw Error(ErrorKind::Geometry,
                  "scatterer " + std::to_string(i) + " lies on or behind the relay wall");
    }
    if (!(p.albedo >= 0.3 && p.albedo <= 1.0)) {
      throw Error(ErrorKind::Geometry,
                  "scatterer " + std::to_string(i) + " albedo outside [0.3, 1]");
    }
  }
}

Scene read_scene(std::istream& in) {
  Scene scene;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<double> values;
    double v;
    while (fields >> v) values.push_back(v);
    if (!fields.eof()) {
      throw Error(ErrorKind::Format, "scene line " + std::to_string(line_no) + ": not a number");
    }
    if (values.empty()) continue;
    if (values.size() != 4 && values.size() != 7) {
      throw Error(ErrorKind::Format, "scene line " + std::to_string(line_no) +
                                         ": expected 'x y z albedo [nx ny nz]'");
    }
    Scatterer s{{values[0], values[1], values[2]}, values[3], std::nullopt};
    if (values.size() == 7) {
      Vec3 n{values[4], values[5], values[6]};
      const double len = n.norm();
      if (!(len > 0.0)) {
        throw Error(ErrorKind::Format, "scene line " + std::to_string(line_no) + ": zero normal");
      }
      s.normal = n * (1.0 / len);
    }
    scene.points.push_back(s);
  }
  return scene;
}

Scene read_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open scene file " + path);
  return read_scene(in);
}

void write_scene(std::ostream& out, const Scene& scene) {
  out << "# x y z albedo [nx ny nz]\n" << std::setprecision(17);
  for (const auto& p : scene.points) {
    out << p.position.x << ' ' << p.position.y << ' ' << p.position.z << ' ' << p.albedo;
    if (p.normal) out << ' ' << p.normal->x << ' ' << p.normal->y << ' ' << p.normal->z;
    out << '\n';
  }
}

namespace {

struct PathSample {
  double bin_position;  // fractional bin index
  double weight;
};

struct RenderSetup {
  int bins;
  double bin_seconds;
  int t0;
};

RenderSetup check_setup(const Scene& scene, const ScanGrid& grid, int bins, double bin_resolution_ps,
                        bool want_confocal) {
  if (grid.confocal != want_confocal) {
    throw Error(ErrorKind::Configuration,
                want_confocal ? "confocal render needs a confocal grid"
                              : "non-confocal render needs a non-confocal grid");
  }
  if (!want_confocal && !grid.laser_point_m) {
    throw Error(ErrorKind::MissingParameter, "non-confocal render needs a laser point");
  }
  if (bins < 1) throw Error(ErrorKind::Shape, "render needs at least one time bin");
  if (!(bin_resolution_ps > 0.0)) throw Error(ErrorKind::Domain, "bin resolution must be positive");
  validate_scene(scene);
  return {bins, bin_resolution_ps * 1e-12, 0};
}

double object_cosine(const Scatterer& s, const Vec3& toward, double dist, const RenderOptions& o) {
  if (!o.object_cosine || !s.normal) return 1.0;
  return std::max(0.0, s.normal->dot(toward) / dist);
}

PathSample confocal_sample(const Scatterer& s, const Vec3& pixel, const RenderSetup& setup,
                           const RenderOptions& o) {
  const Vec3 d = s.position - pixel;
  const double r = d.norm();
  const double cos_wall = o.wall_cosine ? std::max(0.0, d.z / r) : 1.0;
  const double cos_obj = object_cosine(s, pixel - s.position, r, o);
  const double r2 = r * r;
  return {setup.t0 + 2.0 * r / (kSpeedOfLight * setup.bin_seconds),
          s.albedo * cos_wall * cos_obj / (r2 * r2)};
}

PathSample nonconfocal_sample(const Scatterer& s, const Vec3& pixel, const Vec3& laser,
                              const RenderSetup& setup, const RenderOptions& o) {
  const double r1 = (laser - s.position).norm();
  const Vec3 d = s.position - pixel;
  const double r2 = d.norm();
  const double cos_wall = o.wall_cosine ? std::max(0.0, d.z / r2) : 1.0;
  const double cos_obj = object_cosine(s, pixel - s.position, r2, o);
  return {setup.t0 + (r1 + r2) / (kSpeedOfLight * setup.bin_seconds),
          s.albedo * cos_wall * cos_obj / (r1 * r1 * r2 * r2)};
}

// Linear two-bin split; returns false when the upper bin falls off the axis.
inline bool deposit(double* histogram, std::size_t stride, int bins, const PathSample& p) {
  const double lower = std::floor(p.bin_position);
  if (lower < 0.0 || lower + 1.0 >= bins) return false;
  const auto b = static_cast<std::size_t>(lower);
  const double frac = p.bin_position - lower;
  histogram[b * stride] += p.weight * (1.0 - frac);
  histogram[(b + 1) * stride] += p.weight * frac;
  return true;
}

[[noreturn]] void throw_truncation(const Scene& scene, const ScanGrid& grid, const RenderSetup& setup,
                                   const RenderOptions& o) {
  double worst = -1.0;
  std::size_t worst_index = 0;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Vec3 pixel = grid.pixel_center(iy, ix);
      for (std::size_t s = 0; s < scene.points.size(); ++s) {
        const PathSample p = grid.confocal
                                 ? confocal_sample(scene.points[s], pixel, setup, o)
                                 : nonconfocal_sample(scene.points[s], pixel, *grid.laser_point_m, setup, o);
        if (p.bin_position > worst) {
          worst = p.bin_position;
          worst_index = s;
        }
      }
    }
  }
  std::ostringstream msg;
  msg << "time axis too short: scatterer " << worst_index << " reaches bin " << std::fixed
      << std::setprecision(2) << worst << " but only " << setup.bins << " bins are available";
  throw Error(ErrorKind::Truncation, msg.str());
}

template <typename SampleFn>
TransientVolume render_pixel_major(const Scene& scene, const ScanGrid& grid, const RenderSetup& setup,
                                   double bin_resolution_ps, const RenderOptions& o, SampleFn sample) {
  TransientVolume out = make_transient(grid, setup.bins, bin_resolution_ps);
  const std::size_t stride = grid.pixel_count();
  const long long pixels = static_cast<long long>(stride);
  int overflow = 0;
  double* base = out.data.data();
#pragma omp parallel for schedule(static) reduction(| : overflow)
  for (long long idx = 0; idx < pixels; ++idx) {
    const int iy = static_cast<int>(idx / grid.nx);
    const int ix = static_cast<int>(idx % grid.nx);
    const Vec3 pixel = grid.pixel_center(iy, ix);
    double* histogram = base + idx;
    for (const auto& s : scene.points) {
      if (!deposit(histogram, stride, setup.bins, sample(s, pixel))) overflow = 1;
    }
  }
  if (overflow) throw_truncation(scene, grid, setup, o);
  return out;
}

template <typename SampleFn>
TransientVolume render_scatterer_major(const Scene& scene, const ScanGrid& grid,
                                       const RenderSetup& setup, double bin_resolution_ps,
                                       const RenderOptions& o, SampleFn sample) {
  TransientVolume out = make_transient(grid, setup.bins, bin_resolution_ps);
  const std::size_t stride = grid.pixel_count();
  for (const auto& s : scene.points) {
    for (int iy = 0; iy < grid.ny; ++iy) {
      for (int ix = 0; ix < grid.nx; ++ix) {
        double* histogram = &out.data(0, iy, ix);
        if (!deposit(histogram, stride, setup.bins, sample(s, grid.pixel_center(iy, ix)))) {
          throw_truncation(scene, grid, setup, o);
        }
      }
    }
  }
  return out;
}

}  // namespace

TransientVolume render_confocal(const Scene& scene, const ScanGrid& grid, int bins,
                                double bin_resolution_ps, const RenderOptions& options) {
  const RenderSetup setup = check_setup(scene, grid, bins, bin_resolution_ps, true);
  return render_pixel_major(scene, grid, setup, bin_resolution_ps, options,
                            [&](const Scatterer& s, const Vec3& pixel) {
                              return confocal_sample(s, pixel, setup, options);
                            });
}

TransientVolume render_nonconfocal(const Scene& scene, const ScanGrid& grid, int bins,
                                   double bin_resolution_ps, const RenderOptions& options) {
  const RenderSetup setup = check_setup(scene, grid, bins, bin_resolution_ps, false);
  const Vec3 laser = *grid.laser_point_m;
  return render_pixel_major(scene, grid, setup, bin_resolution_ps, options,
                            [&](const Scatterer& s, const Vec3& pixel) {
                              return nonconfocal_sample(s, pixel, laser, setup, options);
                            });
}

TransientVolume render(const Scene& scene, const ScanGrid& grid, int bins, double bin_resolution_ps,
                       const RenderOptions& options) {
  return grid.confocal ? render_confocal(scene, grid, bins, bin_resolution_ps, options)
                       : render_nonconfocal(scene, grid, bins, bin_resolution_ps, options);
}

namespace reference {

TransientVolume render_confocal(const Scene& scene, const ScanGrid& grid, int bins,
                                double bin_resolution_ps, const RenderOptions& options) {
  const RenderSetup setup = check_setup(scene, grid, bins, bin_resolution_ps, true);
  return render_scatterer_major(scene, grid, setup, bin_resolution_ps, options,
                                [&](const Scatterer& s, const Vec3& pixel) {
                                  return confocal_sample(s, pixel, setup, options);
                                });
}

TransientVolume render_nonconfocal(const Scene& scene, const ScanGrid& grid, int bins,
                                   double bin_resolution_ps, const RenderOptions& options) {
  const RenderSetup setup = check_setup(scene, grid, bins, bin_resolution_ps, false);
  const Vec3 laser = *grid.laser_point_m;
  return render_scatterer_major(scene, grid, setup, bin_resolution_ps, options,
                                [&](const Scatterer& s, const Vec3& pixel) {
                                  return nonconfocal_sample(s, pixel, laser, setup, options);
                                });
}

}  // namespace reference

// ---------------------------------------------------------------------------
// Procedural scenes

BaseShape parse_base_shape(const std::string& name) {
  if (name == "plane") return BaseShape::PlanePatch;
  if (name == "box") return BaseShape::Box;
  if (name == "sphere") return BaseShape::SphereShell;
  if (name == "letter") return BaseShape::LetterGlyph;
  throw Error(ErrorKind::Configuration, "unknown base shape '" + name + "' (plane|box|sphere|letter)");
}

const char* to_string(BaseShape shape) {
  switch (shape) {
    case BaseShape::PlanePatch: return "plane";
    case BaseShape::Box: return "box";
    case BaseShape::SphereShell: return "sphere";
    case BaseShape::LetterGlyph: return "letter";
  }
  return "unknown";
}

std::vector<Scatterer> base_shape_points(BaseShape shape) {
  std::vector<Scatterer> pts;
  const Vec3 facing_wall{0.0, 0.0, -1.0};
  switch (shape) {
    case BaseShape::PlanePatch: {
      constexpr int n = 12;
      constexpr double side = 0.6;
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const double x = (j + 0.5) / n * side - 0.5 * side;
          const double y = (i + 0.5) / n * side - 0.5 * side;
          pts.push_back({{x, y, 0.0}, 1.0, facing_wall});
        }
      }
      break;
    }
    case BaseShape::Box: {
      constexpr int n = 6;
      constexpr double half = 0.25;
      for (int axis = 0; axis < 3; ++axis) {
        for (int sign = -1; sign <= 1; sign += 2) {
          for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
              const double u = ((i + 0.5) / n - 0.5) * 2.0 * half;
              const double v = ((j + 0.5) / n - 0.5) * 2.0 * half;
              std::array<double, 3> p{}, nrm{};
              p[axis] = sign * half;
              p[(axis + 1) % 3] = u;
              p[(axis + 2) % 3] = v;
              nrm[axis] = sign;
              pts.push_back({{p[0], p[1], p[2]}, 1.0, Vec3{nrm[0], nrm[1], nrm[2]}});
            }
          }
        }
      }
      break;
    }
    case BaseShape::SphereShell: {
      constexpr int n = 200;
      constexpr double radius = 0.3;
      const double golden = kPi * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < n; ++i) {
        const double y = 1.0 - 2.0 * (i + 0.5) / n;
        const double ring = std::sqrt(1.0 - y * y);
        const Vec3 dir{ring * std::cos(golden * i), y, ring * std::sin(golden * i)};
        pts.push_back({dir * radius, 1.0, dir});
      }
      break;
    }
    case BaseShape::LetterGlyph: {
      // "L": a 0.6 m stem and a 0.4 m foot, 0.1 m thick, 0.04 m spacing.
      constexpr double step = 0.04;
      for (double y = -0.3 + 0.5 * step; y < 0.3; y += step) {
        for (double x = -0.2 + 0.5 * step; x < -0.1; x += step) pts.push_back({{x, y, 0.0}, 1.0, facing_wall});
      }
      for (double y = -0.3 + 0.5 * step; y < -0.2; y += step) {
        for (double x = -0.1 + 0.5 * step; x < 0.2; x += step) pts.push_back({{x, y, 0.0}, 1.0, facing_wall});
      }
      break;
    }
  }
  return pts;
}

namespace {

double draw(std::mt19937_64& rng, double lo, double hi) {
  if (hi <= lo) return lo;
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct Rotation {
  std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

  static Rotation euler(double ax, double ay, double az) {
    const double cx = std::cos(ax), sx = std::sin(ax);
    const double cy = std::cos(ay), sy = std::sin(ay);
    const double cz = std::cos(az), sz = std::sin(az);
    // Rz * Ry * Rx
    Rotation r;
    r.m = {cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx,
           sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx,
           -sy,     cy * sx,                cy * cx};
    return r;
  }

  Vec3 apply(const Vec3& v) const {
    return {m[0] * v.x + m[1] * v.y + m[2] * v.z, m[3] * v.x + m[4] * v.y + m[5] * v.z,
            m[6] * v.x + m[7] * v.y + m[8] * v.z};
  }
};

bool inside_cube(const std::vector<Scatterer>& pts) {
  return std::all_of(pts.begin(), pts.end(), [](const Scatterer& s) {
    return std::abs(s.position.x) <= 1.0 && std::abs(s.position.y) <= 1.0 && s.position.z > 0.0 &&
           s.position.z <= 2.0;
  });
}

}  // namespace

Scene sample_scene(std::mt19937_64& rng, BaseShape base_shape, const AugmentParams& augment) {
  if (!(augment.scale_min > 0.0) || augment.scale_max < augment.scale_min || augment.rotation_deg < 0.0 ||
      augment.shift_m < 0.0) {
    throw Error(ErrorKind::Configuration, "augmentation ranges must be well-ordered and positive");
  }
  const double max_rad = augment.rotation_deg * kPi / 180.0;
  const Rotation rot = Rotation::euler(draw(rng, -max_rad, max_rad), draw(rng, -max_rad, max_rad),
                                       draw(rng, -max_rad, max_rad));
  const double scale = draw(rng, augment.scale_min, augment.scale_max);

  std::vector<Scatterer> placed = base_shape_points(base_shape);
  for (auto& s : placed) {
    s.position = rot.apply(s.position) * scale;
    if (s.normal) s.normal = rot.apply(*s.normal);
  }

  constexpr int kMaxAttempts = 100;
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const Vec3 offset{draw(rng, -augment.shift_m, augment.shift_m),
                      draw(rng, -augment.shift_m, augment.shift_m),
                      augment.center_distance_m + draw(rng, -augment.shift_m, augment.shift_m)};
    Scene scene;
    scene.points = placed;
    for (auto& s : scene.points) s.position = s.position + offset;
    if (!inside_cube(scene.points)) continue;
    for (auto& s : scene.points) s.albedo = draw(rng, 0.3, 1.0);
    return scene;
  }
  throw Error(ErrorKind::Geometry, "augmented scene left the 2 m cube after 100 attempts");
}

}  // namespace nlos
