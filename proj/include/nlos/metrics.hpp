#pragma once

#include <optional>
#include <string>

#include "nlos/core.hpp"

namespace nlos {

/// Row-major 2D image [ny, nx].
struct Image {
  int ny = 0;
  int nx = 0;
  std::vector<double> pixels;

  Image() = default;
  Image(int rows, int cols, double fill = 0.0) : ny(rows), nx(cols), pixels(static_cast<std::size_t>(rows) * cols, fill) {}
  double& operator()(int y, int x) { return pixels[static_cast<std::size_t>(y) * nx + x]; }
  double operator()(int y, int x) const { return pixels[static_cast<std::size_t>(y) * nx + x]; }
  bool operator==(const Image&) const = default;
};

/// Per-(y, x) maximum over depth, normalized by the global maximum.
Image max_intensity_projection(const Array3<double>& volume);

inline constexpr double kBackgroundDepth = 1.0;

/// Normalized depth (argmax + 0.5) / nz where the column maximum reaches
/// threshold_frac of the global maximum; kBackgroundDepth elsewhere.
Image depth_map(const Array3<double>& volume, double threshold_frac = 0.1);

/// Non-background pixels dilated by a kernel x kernel window.
Image foreground_mask(const Image& depth_gt, int kernel = 5);

double psnr(const Image& pred, const Image& gt);  // dB, capped at 100
double ssim(const Image& pred, const Image& gt);  // Gaussian 11x11, sigma 1.5
double rmse_depth(const Image& pred_depth, const Image& gt_depth, const Image* mask = nullptr);

struct EvalReport {
  double psnr_db = 0.0;
  double ssim = 0.0;
  double rmse_depth = 0.0;
  std::optional<double> psnr_db_foreground;
  std::optional<double> rmse_depth_foreground;
  double depth_threshold = 0.1;
  int mask_kernel = 5;
};

/// Projects and compares two reconstructed volumes.
EvalReport evaluate(const Array3<double>& pred, const Array3<double>& gt, double depth_threshold = 0.1,
                    int mask_kernel = 5);

}  // namespace nlos
