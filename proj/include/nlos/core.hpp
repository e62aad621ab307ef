#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "nlos/array.hpp"
#include "nlos/error.hpp"

namespace nlos {

inline constexpr double kSpeedOfLight = 299'792'458.0;  // m/s
inline constexpr double kPi = 3.14159265358979323846;

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const { return std::sqrt(dot(*this)); }
  bool operator==(const Vec3&) const = default;
};

/// Sampling lattice on the relay wall (plane z = 0). Pixel centers lie at
/// x0_m + j * delta_p_m and y0_m + i * delta_p_m. Grids built by
/// make_scan_grid are centered on the origin; sub-grids produced by the
/// sampling module keep the parent's lattice positions.
struct ScanGrid {
  double width_m = 0.0;
  double height_m = 0.0;
  int nx = 0;
  int ny = 0;
  double delta_p_m = 0.0;
  bool confocal = true;
  std::optional<Vec3> laser_point_m;
  double x0_m = 0.0;
  double y0_m = 0.0;

  double pixel_x(int ix) const { return x0_m + ix * delta_p_m; }
  double pixel_y(int iy) const { return y0_m + iy * delta_p_m; }
  Vec3 pixel_center(int iy, int ix) const { return {pixel_x(ix), pixel_y(iy), 0.0}; }
  std::size_t pixel_count() const { return static_cast<std::size_t>(nx) * ny; }

  bool operator==(const ScanGrid&) const = default;
};

ScanGrid make_scan_grid(double width_m, double height_m, int nx, int ny, bool confocal,
                        std::optional<Vec3> laser_point = std::nullopt);

/// Photon histograms over [T, ny, nx]. Bin 0 starts t0_offset_bins bins
/// before the illumination leaves the wall (0 for aligned measurements).
struct TransientVolume {
  Array3<double> data;
  double bin_resolution_ps = 32.0;
  int t0_offset_bins = 0;
  ScanGrid grid;

  int bins() const { return static_cast<int>(data.dim(0)); }
};

TransientVolume make_transient(const ScanGrid& grid, int bins, double bin_resolution_ps);

/// DFT frequency bookkeeping for a time axis of T bins.
struct FrequencyAxis {
  int T = 0;
  double bin_resolution_ps = 0.0;
  std::vector<double> omega;  // 2*pi*k / (T * dt), k = 0..T-1, rad/s

  double step() const;                 // rad/s between neighboring indices
  double signed_omega(int k) const;    // negative for k > T/2
  int nearest_index(double omega_rad_s) const;  // in [0, T/2]
  bool operator==(const FrequencyAxis&) const = default;
};

FrequencyAxis frequency_axis(int T, double bin_resolution_ps);

struct ReconVolume {
  Array3<double> data;  // [nz, ny, nx]
  double pitch_x_m = 0.0;
  double pitch_y_m = 0.0;
  double pitch_z_m = 0.0;
  double z_near_m = 0.0;
  double z_far_m = 0.0;
  std::vector<double> depths_m;
  ScanGrid grid;
};

/// Depth planes at voxel centers: z_near + (i + 0.5) * (z_far - z_near) / nz.
std::vector<double> depth_planes(double z_near_m, double z_far_m, int nz);

void normalize_max(Array3<double>& values);
TransientVolume normalize_max(TransientVolume volume);
ReconVolume normalize_max(ReconVolume volume);

/// Lateral resolution limit 0.61 * lambda * L / d of a phasor camera.
double resolution_limit(double lambda_m, double distance_m, double aperture_m);

}  // namespace nlos
