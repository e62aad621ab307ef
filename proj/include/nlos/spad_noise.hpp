#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

/// How the "top-k histograms" of the detection-efficiency rule are ranked.
enum class TopkMode {
  GlobalBins,      // every time bin of every pixel ranked together
  HistogramMaxima  // one value per pixel: its largest bin
};

struct NoiseParams {
  double jitter_fwhm_ps = 64.0;
  double background_ratio_min = 0.1;
  double background_ratio_max = 0.2;
  double exposure_min = 0.1;
  double exposure_max = 1.0;
  std::size_t topk = 10000;
  double photon_cap = 100.0;
  TopkMode topk_mode = TopkMode::GlobalBins;

  // Fixed values bypass the corresponding random draw.
  std::optional<double> exposure;
  std::optional<double> background_ratio;

  void validate() const;
};

/// eta = cap / m when m > cap, else 1, with m the mean of the top-k values.
double detection_efficiency(const TransientVolume& volume, std::size_t topk, double cap,
                            TopkMode mode = TopkMode::GlobalBins);

/// Truncated (+-3 sigma), unit-sum discrete Gaussian for the given FWHM in bins.
std::vector<double> jitter_kernel(double fwhm_bins);

/// Convolves each histogram along time with the jitter kernel (zero outside
/// the axis). fwhm_ps == 0 returns the input unchanged.
TransientVolume apply_jitter(const TransientVolume& volume, double fwhm_ps);

namespace reference {
TransientVolume apply_jitter(const TransientVolume& volume, double fwhm_ps);
}

/// Values drawn (or forced) for one corruption.
struct NoiseDraw {
  double eta = 1.0;
  double exposure = 1.0;
  double background_ratio = 0.0;
  double background_level = 0.0;
};

/// Per-pixel RNG seed derived from (seed, pixel index).
std::uint64_t pixel_stream_seed(std::uint64_t seed, std::uint64_t pixel);

/// Poisson(c * (eta * (H * g) + d)), deterministic in seed and independent
/// of thread scheduling.
TransientVolume corrupt(const TransientVolume& volume, const NoiseParams& params, std::uint64_t seed,
                        NoiseDraw* draw_out = nullptr);

/// Draws one Poisson sample per entry of `rates` using the stream for `pixel`.
void sample_poisson(std::span<const double> rates, std::span<double> out, std::uint64_t seed,
                    std::uint64_t pixel);

}  // namespace nlos
