#include "nlos/core.hpp"

#include <algorithm>
#include <string>

namespace nlos {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Geometry: return "geometry";
    case ErrorKind::MissingParameter: return "missing-parameter";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Shape: return "shape";
    case ErrorKind::Truncation: return "truncation";
    case ErrorKind::Configuration: return "configuration";
    case ErrorKind::Calibration: return "calibration";
    case ErrorKind::Format: return "format";
    case ErrorKind::Integrity: return "integrity";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format:
    case ErrorKind::Integrity:
    case ErrorKind::Io:
      return 3;
    case ErrorKind::Budget:
      return 4;
    default:
      return 2;
  }
}

ScanGrid make_scan_grid(double width_m, double height_m, int nx, int ny, bool confocal,
                        std::optional<Vec3> laser_point) {
  if (!(width_m > 0.0) || !(height_m > 0.0) || nx < 1 || ny < 1) {
    throw Error(ErrorKind::Geometry, "scan grid needs positive extents and counts");
  }
  const double dx = width_m / nx;
  const double dy = height_m / ny;
  if (std::abs(dx - dy) > 1e-12 * std::max(dx, dy)) {
    throw Error(ErrorKind::Geometry,
                "non-square pixels: " + std::to_string(dx) + " m x " + std::to_string(dy) + " m");
  }
  if (!confocal && !laser_point) {
    throw Error(ErrorKind::MissingParameter, "non-confocal grid requires a laser point");
  }
  ScanGrid grid;
  grid.width_m = width_m;
  grid.height_m = height_m;
  grid.nx = nx;
  grid.ny = ny;
  grid.delta_p_m = dx;
  grid.confocal = confocal;
  if (!confocal) grid.laser_point_m = laser_point;
  grid.x0_m = -0.5 * width_m + 0.5 * dx;
  grid.y0_m = -0.5 * height_m + 0.5 * dx;
  return grid;
}

TransientVolume make_transient(const ScanGrid& grid, int bins, double bin_resolution_ps) {
  if (bins < 1) throw Error(ErrorKind::Shape, "transient needs at least one time bin");
  if (!(bin_resolution_ps > 0.0)) throw Error(ErrorKind::Domain, "bin resolution must be positive");
  TransientVolume v;
  v.data = Array3<double>(bins, grid.ny, grid.nx);
  v.bin_resolution_ps = bin_resolution_ps;
  v.grid = grid;
  return v;
}

double FrequencyAxis::step() const {
  return 2.0 * kPi / (T * bin_resolution_ps * 1e-12);
}

double FrequencyAxis::signed_omega(int k) const {
  return (2 * k > T ? k - T : k) * step();
}

int FrequencyAxis::nearest_index(double omega_rad_s) const {
  const int k = static_cast<int>(std::lround(omega_rad_s / step()));
  return std::clamp(k, 0, T / 2);
}

FrequencyAxis frequency_axis(int T, double bin_resolution_ps) {
  if (T < 1) throw Error(ErrorKind::Domain, "frequency axis needs T >= 1");
  if (!(bin_resolution_ps > 0.0)) throw Error(ErrorKind::Domain, "bin resolution must be positive");
  FrequencyAxis axis;
  axis.T = T;
  axis.bin_resolution_ps = bin_resolution_ps;
  axis.omega.resize(T);
  const double step = axis.step();
  for (int k = 0; k < T; ++k) axis.omega[k] = k * step;
  return axis;
}

std::vector<double> depth_planes(double z_near_m, double z_far_m, int nz) {
  if (nz < 1 || !(z_far_m > z_near_m) || z_near_m < 0.0) {
    throw Error(ErrorKind::Domain, "depth range must satisfy 0 <= near < far and nz >= 1");
  }
  std::vector<double> depths(nz);
  const double dz = (z_far_m - z_near_m) / nz;
  for (int i = 0; i < nz; ++i) depths[i] = z_near_m + (i + 0.5) * dz;
  return depths;
}

void normalize_max(Array3<double>& values) {
  double peak = 0.0;
  for (double v : values.values()) peak = std::max(peak, v);
  if (peak <= 0.0) return;
  for (double& v : values.values()) v /= peak;
}

TransientVolume normalize_max(TransientVolume volume) {
  normalize_max(volume.data);
  return volume;
}

ReconVolume normalize_max(ReconVolume volume) {
  normalize_max(volume.data);
  return volume;
}

double resolution_limit(double lambda_m, double distance_m, double aperture_m) {
  if (!(lambda_m > 0.0) || !(distance_m > 0.0) || !(aperture_m > 0.0)) {
    throw Error(ErrorKind::Domain, "resolution limit needs positive wavelength, distance and aperture");
  }
  return 0.61 * lambda_m * distance_m / aperture_m;
}

}  // namespace nlos
