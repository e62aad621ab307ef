#include "nlos/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace nlos {

namespace {

int whole_pixels(double extent_m, double delta_p_m, const char* what) {
  const double n = extent_m / delta_p_m;
  const double rounded = std::round(n);
  if (rounded < 1.0 || std::abs(n - rounded) > 1e-9 * std::max(1.0, rounded)) {
    std::ostringstream msg;
    msg << what << " of " << extent_m << " m is not a whole number of " << delta_p_m << " m pixels";
    throw Error(ErrorKind::Geometry, msg.str());
  }
  return static_cast<int>(rounded);
}

// Index of `position` on the lattice starting at `origin`.
int lattice_index(double position, double origin, double delta_p, const char* what) {
  const double n = (position - origin) / delta_p;
  const double rounded = std::round(n);
  if (std::abs(n - rounded) > 1e-6) {
    throw Error(ErrorKind::Geometry, std::string(what) + " is not aligned with the target lattice");
  }
  return static_cast<int>(rounded);
}

TransientVolume with_grid(const TransientVolume& like, const ScanGrid& grid, int bins) {
  TransientVolume out = make_transient(grid, bins, like.bin_resolution_ps);
  out.t0_offset_bins = like.t0_offset_bins;
  return out;
}

TransientVolume select_pixels(const TransientVolume& volume, const ScanGrid& grid, int y0, int x0, int step) {
  TransientVolume out = with_grid(volume, grid, volume.bins());
  for (int t = 0; t < volume.bins(); ++t) {
    for (int y = 0; y < grid.ny; ++y) {
      for (int x = 0; x < grid.nx; ++x) out.data(t, y, x) = volume.data(t, y0 + y * step, x0 + x * step);
    }
  }
  return out;
}

}  // namespace

ScanGrid stride_grid(const ScanGrid& grid, int stride) {
  if (stride < 1 || grid.nx % stride != 0 || grid.ny % stride != 0) {
    throw Error(ErrorKind::Shape, "stride " + std::to_string(stride) + " does not divide " +
                                      std::to_string(grid.ny) + "x" + std::to_string(grid.nx));
  }
  ScanGrid sub = grid;
  sub.nx = grid.nx / stride;
  sub.ny = grid.ny / stride;
  sub.delta_p_m = grid.delta_p_m * stride;
  sub.width_m = sub.nx * sub.delta_p_m;
  sub.height_m = sub.ny * sub.delta_p_m;
  return sub;
}

TransientVolume subsample_stride(const TransientVolume& volume, int stride) {
  const ScanGrid sub = stride_grid(volume.grid, stride);
  if (stride == 1) return volume;
  return select_pixels(volume, sub, 0, 0, stride);
}

ScanGrid crop_grid(const ScanGrid& grid, double extent_x_m, double extent_y_m) {
  const int nx = whole_pixels(extent_x_m, grid.delta_p_m, "crop width");
  const int ny = whole_pixels(extent_y_m, grid.delta_p_m, "crop height");
  if (nx > grid.nx || ny > grid.ny || (grid.nx - nx) % 2 != 0 || (grid.ny - ny) % 2 != 0) {
    throw Error(ErrorKind::Geometry, "crop must fit inside the aperture and be centered on whole pixels");
  }
  ScanGrid sub = grid;
  sub.nx = nx;
  sub.ny = ny;
  sub.width_m = nx * grid.delta_p_m;
  sub.height_m = ny * grid.delta_p_m;
  sub.x0_m = grid.pixel_x((grid.nx - nx) / 2);
  sub.y0_m = grid.pixel_y((grid.ny - ny) / 2);
  return sub;
}

TransientVolume crop_aperture(const TransientVolume& volume, double extent_x_m, double extent_y_m) {
  const ScanGrid sub = crop_grid(volume.grid, extent_x_m, extent_y_m);
  if (sub.nx == volume.grid.nx && sub.ny == volume.grid.ny) return volume;
  return select_pixels(volume, sub, (volume.grid.ny - sub.ny) / 2, (volume.grid.nx - sub.nx) / 2, 1);
}

namespace {

std::pair<int, int> upsample_factors(const ScanGrid& source, const ScanGrid& target) {
  if (target.nx % source.nx != 0 || target.ny % source.ny != 0) {
    throw Error(ErrorKind::Shape, "target resolution is not an integer multiple of the source");
  }
  const int fx = target.nx / source.nx;
  const int fy = target.ny / source.ny;
  if (fx != fy) throw Error(ErrorKind::Shape, "upsampling factors must match along x and y");
  return {fx, fy};
}

}  // namespace

TransientVolume upsample_nearest(const TransientVolume& volume, const ScanGrid& target) {
  const auto [fx, fy] = upsample_factors(volume.grid, target);
  TransientVolume out = with_grid(volume, target, volume.bins());
  for (int t = 0; t < volume.bins(); ++t) {
    for (int y = 0; y < target.ny; ++y) {
      for (int x = 0; x < target.nx; ++x) out.data(t, y, x) = volume.data(t, y / fy, x / fx);
    }
  }
  return out;
}

namespace {

struct LinearTap {
  int lo;
  int hi;
  double frac;
};

std::vector<LinearTap> linear_taps(int source_n, int factor) {
  std::vector<LinearTap> taps(static_cast<std::size_t>(source_n) * factor);
  for (int j = 0; j < source_n * factor; ++j) {
    double u = (j + 0.5) / factor - 0.5;
    u = std::clamp(u, 0.0, static_cast<double>(source_n - 1));
    const int lo = static_cast<int>(std::floor(u));
    const int hi = std::min(lo + 1, source_n - 1);
    taps[j] = {lo, hi, u - lo};
  }
  return taps;
}

}  // namespace

TransientVolume upsample_trilinear(const TransientVolume& volume, const ScanGrid& target, int time_factor) {
  const auto [fx, fy] = upsample_factors(volume.grid, target);
  if (time_factor < 1) throw Error(ErrorKind::Shape, "time factor must be >= 1");
  const auto tx = linear_taps(volume.grid.nx, fx);
  const auto ty = linear_taps(volume.grid.ny, fy);
  const auto tt = linear_taps(volume.bins(), time_factor);
  TransientVolume out = with_grid(volume, target, volume.bins() * time_factor);
  out.bin_resolution_ps = volume.bin_resolution_ps / time_factor;
  out.t0_offset_bins = volume.t0_offset_bins * time_factor;
  const auto& d = volume.data;
  for (int t = 0; t < out.bins(); ++t) {
    const LinearTap& a = tt[t];
    for (int y = 0; y < target.ny; ++y) {
      const LinearTap& b = ty[y];
      for (int x = 0; x < target.nx; ++x) {
        const LinearTap& c = tx[x];
        auto bilinear = [&](int ti) {
          const double top = d(ti, b.lo, c.lo) * (1.0 - c.frac) + d(ti, b.lo, c.hi) * c.frac;
          const double bottom = d(ti, b.hi, c.lo) * (1.0 - c.frac) + d(ti, b.hi, c.hi) * c.frac;
          return top * (1.0 - b.frac) + bottom * b.frac;
        };
        out.data(t, y, x) = a.frac == 0.0 ? bilinear(a.lo) : bilinear(a.lo) * (1.0 - a.frac) + bilinear(a.hi) * a.frac;
      }
    }
  }
  return out;
}

std::pair<int, int> pad_widths(const ScanGrid& source, const ScanGrid& target) {
  if (std::abs(source.delta_p_m - target.delta_p_m) > 1e-12 * target.delta_p_m) {
    throw Error(ErrorKind::Geometry, "zero padding needs equal sampling distances");
  }
  if (target.nx < source.nx || target.ny < source.ny) {
    throw Error(ErrorKind::Geometry, "padding target is smaller than the source aperture");
  }
  return {target.nx - source.nx, target.ny - source.ny};
}

ScanGrid padded_grid(const ScanGrid& source, double width_m, double height_m) {
  const int nx = whole_pixels(width_m, source.delta_p_m, "padded width");
  const int ny = whole_pixels(height_m, source.delta_p_m, "padded height");
  ScanGrid grid = make_scan_grid(nx * source.delta_p_m, ny * source.delta_p_m, nx, ny, source.confocal,
                                 source.laser_point_m);
  grid.delta_p_m = source.delta_p_m;
  return grid;
}

TransientVolume zero_pad_aperture(const TransientVolume& volume, const ScanGrid& target) {
  const auto& src = volume.grid;
  pad_widths(src, target);
  const int x_off = lattice_index(src.x0_m, target.x0_m, target.delta_p_m, "source x origin");
  const int y_off = lattice_index(src.y0_m, target.y0_m, target.delta_p_m, "source y origin");
  if (x_off < 0 || y_off < 0 || x_off + src.nx > target.nx || y_off + src.ny > target.ny) {
    throw Error(ErrorKind::Geometry, "source aperture does not fit inside the padding target");
  }
  TransientVolume out = with_grid(volume, target, volume.bins());
  for (int t = 0; t < volume.bins(); ++t) {
    for (int y = 0; y < src.ny; ++y) {
      for (int x = 0; x < src.nx; ++x) out.data(t, y + y_off, x + x_off) = volume.data(t, y, x);
    }
  }
  return out;
}

TemporalCrop temporal_crop(const TransientVolume& volume, int window) {
  const int T = volume.bins();
  if (window < 1 || window > T) throw Error(ErrorKind::Shape, "temporal window must be in [1, T]");
  if (window == T) return {volume, 0};
  const std::size_t plane = volume.data.plane_size();
  std::vector<double> per_bin(T, 0.0);
  for (int t = 0; t < T; ++t) {
    const double* row = volume.data.data() + static_cast<std::size_t>(t) * plane;
    double sum = 0.0;
    for (std::size_t p = 0; p < plane; ++p) sum += row[p];
    per_bin[t] = sum;
  }
  // Window sums recomputed exactly per start so ties compare exactly.
  int best_start = 0;
  double best = -1.0;
  for (int s = 0; s + window <= T; ++s) {
    double sum = 0.0;
    for (int t = s; t < s + window; ++t) sum += per_bin[t];
    if (sum > best) {
      best = sum;
      best_start = s;
    }
  }
  TransientVolume out = with_grid(volume, volume.grid, window);
  std::copy_n(volume.data.data() + static_cast<std::size_t>(best_start) * plane, static_cast<std::size_t>(window) * plane,
              out.data.data());
  out.t0_offset_bins = volume.t0_offset_bins - best_start;
  return {std::move(out), best_start};
}

TransientVolume temporal_uncrop(const TransientVolume& cropped, int offset_bins, int bins) {
  if (offset_bins < 0 || offset_bins + cropped.bins() > bins) {
    throw Error(ErrorKind::Shape, "cropped window does not fit the restored time axis");
  }
  TransientVolume out = with_grid(cropped, cropped.grid, bins);
  const std::size_t plane = cropped.data.plane_size();
  std::copy_n(cropped.data.data(), cropped.data.size(), out.data.data() + static_cast<std::size_t>(offset_bins) * plane);
  out.t0_offset_bins = cropped.t0_offset_bins + offset_bins;
  return out;
}

}  // namespace nlos
