#pragma once

#include <utility>

#include "nlos/core.hpp"

namespace nlos {

/// Keeps pixels at indices 0, stride, 2*stride, ... along x and y.
TransientVolume subsample_stride(const TransientVolume& volume, int stride);
ScanGrid stride_grid(const ScanGrid& grid, int stride);

/// Centered crop to extent_x_m x extent_y_m; delta_p is preserved.
TransientVolume crop_aperture(const TransientVolume& volume, double extent_x_m, double extent_y_m);
inline TransientVolume crop_aperture(const TransientVolume& volume, double extent_m) {
  return crop_aperture(volume, extent_m, extent_m);
}
ScanGrid crop_grid(const ScanGrid& grid, double extent_x_m, double extent_y_m);

/// Block replication onto a target lattice an integer multiple finer.
TransientVolume upsample_nearest(const TransientVolume& volume, const ScanGrid& target);

/// Bilinear in (x, y) with edge clamping and half-pixel aligned sample
/// positions; time_factor > 1 also interpolates the time axis.
TransientVolume upsample_trilinear(const TransientVolume& volume, const ScanGrid& target, int time_factor = 1);

/// Total zero padding (x, y) in pixels needed to embed `source` in `target`.
std::pair<int, int> pad_widths(const ScanGrid& source, const ScanGrid& target);

/// Places the source at its lattice position inside a zero field on target.
TransientVolume zero_pad_aperture(const TransientVolume& volume, const ScanGrid& target);

/// Grid with the extents of `target_extent` on the lattice of `source`
/// (same delta_p), centered on the origin. Used for padding cropped scans.
ScanGrid padded_grid(const ScanGrid& source, double width_m, double height_m);

struct TemporalCrop {
  TransientVolume volume;
  int offset_bins = 0;
};

/// Window of `window` bins with the largest photon total (ties: earliest).
TemporalCrop temporal_crop(const TransientVolume& volume, int window);

/// Inverse placement of temporal_crop: zeros outside [offset, offset + T').
TransientVolume temporal_uncrop(const TransientVolume& cropped, int offset_bins, int bins);

}  // namespace nlos
