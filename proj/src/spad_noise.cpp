#include "nlos/spad_noise.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>

namespace nlos {

void NoiseParams::validate() const {
  if (jitter_fwhm_ps < 0.0) throw Error(ErrorKind::Configuration, "jitter FWHM must be >= 0");
  if (!(background_ratio_min >= 0.0 && background_ratio_min <= background_ratio_max)) {
    throw Error(ErrorKind::Configuration, "background ratio range must be well-ordered and >= 0");
  }
  if (!(exposure_min > 0.0 && exposure_min <= exposure_max)) {
    throw Error(ErrorKind::Configuration, "exposure range must be well-ordered and positive");
  }
  if (topk < 1) throw Error(ErrorKind::Configuration, "topk must be >= 1");
  if (!(photon_cap > 0.0)) throw Error(ErrorKind::Configuration, "photon cap must be positive");
  if (exposure && !(*exposure > 0.0)) throw Error(ErrorKind::Configuration, "exposure must be positive");
  if (background_ratio && *background_ratio < 0.0) {
    throw Error(ErrorKind::Configuration, "background ratio must be >= 0");
  }
}

double detection_efficiency(const TransientVolume& volume, std::size_t topk, double cap, TopkMode mode) {
  if (topk < 1) throw Error(ErrorKind::Domain, "topk must be >= 1");
  std::vector<double> ranked;
  if (mode == TopkMode::GlobalBins) {
    ranked.assign(volume.data.values().begin(), volume.data.values().end());
  } else {
    const std::size_t plane = volume.data.plane_size();
    ranked.assign(plane, 0.0);
    const auto bins = static_cast<std::size_t>(volume.bins());
    for (std::size_t t = 0; t < bins; ++t) {
      for (std::size_t p = 0; p < plane; ++p) {
        ranked[p] = std::max(ranked[p], volume.data.data()[t * plane + p]);
      }
    }
  }
  if (ranked.empty()) return 1.0;
  const std::size_t k = std::min(topk, ranked.size());
  std::nth_element(ranked.begin(), ranked.begin() + (k - 1), ranked.end(), std::greater<>());
  std::sort(ranked.begin(), ranked.begin() + k, std::greater<>());
  const double m = std::accumulate(ranked.begin(), ranked.begin() + k, 0.0) / static_cast<double>(k);
  return m > cap ? cap / m : 1.0;
}

std::vector<double> jitter_kernel(double fwhm_bins) {
  if (!(fwhm_bins > 0.0)) return {1.0};
  const double sigma = fwhm_bins / (2.0 * std::sqrt(2.0 * std::log(2.0)));
  const int radius = std::max(1, static_cast<int>(std::floor(3.0 * sigma)));
  std::vector<double> kernel(2 * radius + 1);
  for (int j = -radius; j <= radius; ++j) {
    kernel[j + radius] = std::exp(-0.5 * j * j / (sigma * sigma));
  }
  const double sum = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& w : kernel) w /= sum;
  return kernel;
}

namespace {

void convolve_histogram(std::span<const double> in, std::span<double> out, const std::vector<double>& kernel) {
  const int radius = static_cast<int>(kernel.size() / 2);
  const int n = static_cast<int>(in.size());
  for (int t = 0; t < n; ++t) {
    double acc = 0.0;
    const int lo = std::max(-radius, -t);
    const int hi = std::min(radius, n - 1 - t);
    for (int j = lo; j <= hi; ++j) acc += kernel[radius - j] * in[t + j];
    out[t] = acc;
  }
}

}  // namespace

TransientVolume apply_jitter(const TransientVolume& volume, double fwhm_ps) {
  if (fwhm_ps < 0.0) throw Error(ErrorKind::Domain, "jitter FWHM must be >= 0");
  if (fwhm_ps == 0.0) return volume;
  const std::vector<double> kernel = jitter_kernel(fwhm_ps / volume.bin_resolution_ps);
  TransientVolume out = volume;
  const std::size_t plane = volume.data.plane_size();
  const auto bins = static_cast<std::size_t>(volume.bins());
  const long long pixels = static_cast<long long>(plane);
#pragma omp parallel
  {
    std::vector<double> in(bins), res(bins);
#pragma omp for schedule(static)
    for (long long p = 0; p < pixels; ++p) {
      for (std::size_t t = 0; t < bins; ++t) in[t] = volume.data.data()[t * plane + p];
      convolve_histogram(in, res, kernel);
      for (std::size_t t = 0; t < bins; ++t) out.data.data()[t * plane + p] = res[t];
    }
  }
  return out;
}

namespace reference {

TransientVolume apply_jitter(const TransientVolume& volume, double fwhm_ps) {
  if (fwhm_ps == 0.0) return volume;
  const std::vector<double> kernel = jitter_kernel(fwhm_ps / volume.bin_resolution_ps);
  const int radius = static_cast<int>(kernel.size() / 2);
  TransientVolume out = volume;
  const int bins = volume.bins();
  for (std::size_t y = 0; y < volume.data.dim(1); ++y) {
    for (std::size_t x = 0; x < volume.data.dim(2); ++x) {
      for (int t = 0; t < bins; ++t) {
        double acc = 0.0;
        for (int j = -radius; j <= radius; ++j) {
          const int src = t + j;
          if (src >= 0 && src < bins) acc += kernel[radius - j] * volume.data(src, y, x);
        }
        out.data(t, y, x) = acc;
      }
    }
  }
  return out;
}

}  // namespace reference

std::uint64_t pixel_stream_seed(std::uint64_t seed, std::uint64_t pixel) {
  // splitmix64 finalizer over a combined key
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (pixel + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void sample_poisson(std::span<const double> rates, std::span<double> out, std::uint64_t seed,
                    std::uint64_t pixel) {
  std::mt19937_64 rng(pixel_stream_seed(seed, pixel));
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double rate = rates[i];
    if (!(rate > 0.0)) {
      out[i] = 0.0;
      continue;
    }
    std::poisson_distribution<long long> poisson(rate);
    out[i] = static_cast<double>(poisson(rng));
  }
}

TransientVolume corrupt(const TransientVolume& volume, const NoiseParams& params, std::uint64_t seed,
                        NoiseDraw* draw_out) {
  params.validate();
  for (double v : volume.data.values()) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorKind::Domain, "corrupt needs a finite non-negative volume");
    }
  }

  NoiseDraw draw;
  std::mt19937_64 global(pixel_stream_seed(seed, ~std::uint64_t{0}));
  draw.exposure = params.exposure
                      ? *params.exposure
                      : std::uniform_real_distribution<double>(params.exposure_min, params.exposure_max)(global);
  draw.background_ratio =
      params.background_ratio
          ? *params.background_ratio
          : std::uniform_real_distribution<double>(params.background_ratio_min,
                                                   params.background_ratio_max)(global);
  draw.eta = detection_efficiency(volume, params.topk, params.photon_cap, params.topk_mode);

  TransientVolume signal = volume;
  for (double& v : signal.data.values()) v *= draw.eta;
  signal = apply_jitter(signal, params.jitter_fwhm_ps);
  double peak = 0.0;
  for (double v : signal.data.values()) peak = std::max(peak, v);
  draw.background_level = draw.background_ratio * peak;

  TransientVolume out = signal;
  const std::size_t plane = volume.data.plane_size();
  const auto bins = static_cast<std::size_t>(volume.bins());
  const long long pixels = static_cast<long long>(plane);
#pragma omp parallel
  {
    std::vector<double> rates(bins), counts(bins);
#pragma omp for schedule(static)
    for (long long p = 0; p < pixels; ++p) {
      for (std::size_t t = 0; t < bins; ++t) {
        rates[t] = draw.exposure * (signal.data.data()[t * plane + p] + draw.background_level);
      }
      sample_poisson(rates, counts, seed, static_cast<std::uint64_t>(p));
      for (std::size_t t = 0; t < bins; ++t) out.data.data()[t * plane + p] = counts[t];
    }
  }
  if (draw_out) *draw_out = draw;
  return out;
}

}  // namespace nlos
