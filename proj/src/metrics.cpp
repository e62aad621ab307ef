#include "nlos/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace nlos {

namespace {

void check_same(const Image& a, const Image& b) {
  if (a.ny != b.ny || a.nx != b.nx) {
    throw Error(ErrorKind::Shape, "image shapes differ: " + std::to_string(a.ny) + "x" + std::to_string(a.nx) +
                                      " vs " + std::to_string(b.ny) + "x" + std::to_string(b.nx));
  }
}

}  // namespace

Image max_intensity_projection(const Array3<double>& volume) {
  const int nz = static_cast<int>(volume.dim(0));
  if (nz < 1) throw Error(ErrorKind::Shape, "projection needs at least one depth plane");
  Image img(static_cast<int>(volume.dim(1)), static_cast<int>(volume.dim(2)));
  for (int y = 0; y < img.ny; ++y) {
    for (int x = 0; x < img.nx; ++x) {
      double m = volume(0, y, x);
      for (int z = 1; z < nz; ++z) m = std::max(m, volume(z, y, x));
      img(y, x) = m;
    }
  }
  const double peak = *std::max_element(img.pixels.begin(), img.pixels.end());
  if (peak > 0.0) {
    for (double& v : img.pixels) v /= peak;
  }
  return img;
}

Image depth_map(const Array3<double>& volume, double threshold_frac) {
  if (!(threshold_frac > 0.0 && threshold_frac <= 1.0)) {
    throw Error(ErrorKind::Domain, "depth threshold must be in (0, 1]");
  }
  const int nz = static_cast<int>(volume.dim(0));
  Image depth(static_cast<int>(volume.dim(1)), static_cast<int>(volume.dim(2)), kBackgroundDepth);
  double global = 0.0;
  for (double v : volume.values()) global = std::max(global, v);
  if (!(global > 0.0)) return depth;
  for (int y = 0; y < depth.ny; ++y) {
    for (int x = 0; x < depth.nx; ++x) {
      int best = 0;
      for (int z = 1; z < nz; ++z) {
        if (volume(z, y, x) > volume(best, y, x)) best = z;
      }
      if (volume(best, y, x) >= threshold_frac * global) depth(y, x) = (best + 0.5) / nz;
    }
  }
  return depth;
}

Image foreground_mask(const Image& depth_gt, int kernel) {
  if (kernel < 1 || kernel % 2 == 0) throw Error(ErrorKind::Domain, "mask kernel must be odd and positive");
  const int r = kernel / 2;
  Image mask(depth_gt.ny, depth_gt.nx);
  for (int y = 0; y < depth_gt.ny; ++y) {
    for (int x = 0; x < depth_gt.nx; ++x) {
      // Average pooling with zero padding is positive iff any window pixel is foreground.
      double window = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int yy = y + dy, xx = x + dx;
          if (yy < 0 || xx < 0 || yy >= depth_gt.ny || xx >= depth_gt.nx) continue;
          window += depth_gt(yy, xx) < kBackgroundDepth ? 1.0 : 0.0;
        }
      }
      mask(y, x) = window / (kernel * kernel) > 0.0 ? 1.0 : 0.0;
    }
  }
  return mask;
}

double psnr(const Image& pred, const Image& gt) {
  check_same(pred, gt);
  double mse = 0.0;
  for (std::size_t i = 0; i < pred.pixels.size(); ++i) {
    const double d = pred.pixels[i] - gt.pixels[i];
    mse += d * d;
  }
  mse /= static_cast<double>(pred.pixels.size());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& pred, const Image& gt) {
  check_same(pred, gt);
  constexpr double k1 = 0.01, k2 = 0.03, range = 1.0, sigma = 1.5;
  const double c1 = (k1 * range) * (k1 * range);
  const double c2 = (k2 * range) * (k2 * range);
  int win = std::min({11, pred.ny, pred.nx});
  if (win % 2 == 0) --win;
  const int r = win / 2;
  std::vector<double> g(win);
  double gsum = 0.0;
  for (int i = 0; i < win; ++i) {
    g[i] = std::exp(-0.5 * (i - r) * (i - r) / (sigma * sigma));
    gsum += g[i];
  }
  for (double& v : g) v /= gsum;

  double total = 0.0;
  int count = 0;
  for (int y = r; y < pred.ny - r; ++y) {
    for (int x = r; x < pred.nx - r; ++x) {
      double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const double w = g[dy + r] * g[dx + r];
          const double a = pred(y + dy, x + dx), b = gt(y + dy, x + dx);
          mx += w * a;
          my += w * b;
          sxx += w * a * a;
          syy += w * b * b;
          sxy += w * a * b;
        }
      }
      const double vx = sxx - mx * mx, vy = syy - my * my, cxy = sxy - mx * my;
      total += ((2 * mx * my + c1) * (2 * cxy + c2)) / ((mx * mx + my * my + c1) * (vx + vy + c2));
      ++count;
    }
  }
  return total / count;
}

double rmse_depth(const Image& pred_depth, const Image& gt_depth, const Image* mask) {
  check_same(pred_depth, gt_depth);
  if (mask) check_same(pred_depth, *mask);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred_depth.pixels.size(); ++i) {
    if (mask && mask->pixels[i] <= 0.0) continue;
    const double d = pred_depth.pixels[i] - gt_depth.pixels[i];
    sum += d * d;
    ++n;
  }
  return n ? std::sqrt(sum / static_cast<double>(n)) : 0.0;
}

EvalReport evaluate(const Array3<double>& pred, const Array3<double>& gt, double depth_threshold, int mask_kernel) {
  if (pred.dims() != gt.dims()) throw Error(ErrorKind::Shape, "evaluated volumes differ in shape");
  EvalReport report;
  report.depth_threshold = depth_threshold;
  report.mask_kernel = mask_kernel;
  const Image p = max_intensity_projection(pred);
  const Image g = max_intensity_projection(gt);
  report.psnr_db = psnr(p, g);
  report.ssim = ssim(p, g);
  const Image pd = depth_map(pred, depth_threshold);
  const Image gd = depth_map(gt, depth_threshold);
  report.rmse_depth = rmse_depth(pd, gd);
  const Image mask = foreground_mask(gd, mask_kernel);
  if (std::any_of(mask.pixels.begin(), mask.pixels.end(), [](double v) { return v > 0.0; })) {
    report.rmse_depth_foreground = rmse_depth(pd, gd, &mask);
    double mse = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < mask.pixels.size(); ++i) {
      if (mask.pixels[i] <= 0.0) continue;
      const double d = p.pixels[i] - g.pixels[i];
      mse += d * d;
      ++n;
    }
    mse /= static_cast<double>(n);
    report.psnr_db_foreground = mse < 1e-10 ? 100.0 : 10.0 * std::log10(1.0 / mse);
  }
  return report;
}

}  // namespace nlos
