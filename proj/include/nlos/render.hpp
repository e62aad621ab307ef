#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

struct Scatterer {
  Vec3 position;
  double albedo = 1.0;
  std::optional<Vec3> normal;  // unit; absent means isotropic
};

struct Scene {
  std::vector<Scatterer> points;
};

/// Throws a geometry error for points at z <= 0 or albedo outside [0.3, 1].
void validate_scene(const Scene& scene);

Scene read_scene(std::istream& in);
Scene read_scene_file(const std::string& path);
void write_scene(std::ostream& out, const Scene& scene);

struct RenderOptions {
  bool wall_cosine = true;
  bool object_cosine = true;
};

/// Confocal three-bounce render. Each (pixel, scatterer) pair deposits
/// albedo * cos_wall * cos_obj / r^4 split linearly between the two bins
/// around 2r / (c dt).
TransientVolume render_confocal(const Scene& scene, const ScanGrid& grid, int bins,
                                double bin_resolution_ps, const RenderOptions& options = {});

/// Non-confocal render with laser at grid.laser_point_m, weight
/// albedo * cosines / (r1^2 r2^2) at path length r1 + r2.
TransientVolume render_nonconfocal(const Scene& scene, const ScanGrid& grid, int bins,
                                   double bin_resolution_ps, const RenderOptions& options = {});

/// Dispatches on grid.confocal.
TransientVolume render(const Scene& scene, const ScanGrid& grid, int bins,
                       double bin_resolution_ps, const RenderOptions& options = {});

namespace reference {
/// Scatterer-major serial loops; same arithmetic as the parallel renderers.
TransientVolume render_confocal(const Scene& scene, const ScanGrid& grid, int bins,
                                double bin_resolution_ps, const RenderOptions& options = {});
TransientVolume render_nonconfocal(const Scene& scene, const ScanGrid& grid, int bins,
                                   double bin_resolution_ps, const RenderOptions& options = {});
}  // namespace reference

enum class BaseShape { PlanePatch, Box, SphereShell, LetterGlyph };

BaseShape parse_base_shape(const std::string& name);
const char* to_string(BaseShape shape);

/// Procedural point set centered on the origin.
std::vector<Scatterer> base_shape_points(BaseShape shape);

struct AugmentParams {
  double rotation_deg = 15.0;
  double scale_min = 0.8;
  double scale_max = 1.2;
  double shift_m = 0.3;
  double center_distance_m = 1.0;

  static AugmentParams training() { return {}; }
  static AugmentParams validation() { return {5.0, 1.0, 1.0, 0.1, 1.0}; }
  static AugmentParams identity() { return {0.0, 1.0, 1.0, 0.0, 1.0}; }
};

/// Rotates (x, y, z Euler angles), scales, centers at (0, 0, center distance)
/// and shifts a base shape, drawing albedos in [0.3, 1]. Shifts that leave
/// the 2 m cube are redrawn, up to 100 attempts.
Scene sample_scene(std::mt19937_64& rng, BaseShape base_shape, const AugmentParams& augment);

}  // namespace nlos
