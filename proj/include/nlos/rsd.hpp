#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "nlos/phasor.hpp"

namespace nlos {

/// Amplitude factor of the diffraction kernel. InvR keeps the 1/r of the
/// Rayleigh-Sommerfeld kernel; Unit drops every amplitude term.
enum class KernelAmplitude { InvR, Unit };

const char* to_string(KernelAmplitude amplitude);
KernelAmplitude parse_kernel_amplitude(const std::string& name);

/// exp(-i * Omega * d / c) * amplitude, with d = r or 2r (doubling) and
/// r = sqrt(dx^2 + dy^2 + z^2). The amplitude stays 1/r under doubling.
cd kernel_value(double dx_m, double dy_m, double z_m, double omega, bool doubling, KernelAmplitude amplitude);

/// Kernel sampled on a padded lattice of lateral offsets; entry (a, b) holds
/// the offset (a', b') * delta_p with a' = a for a < rows / 2 and a - rows
/// otherwise (circular layout ready for FFT convolution).
struct KernelLattice {
  int rows = 0;
  int cols = 0;
  std::vector<cd> values;

  const cd& at_offset(int dy, int dx) const {
    return values[static_cast<std::size_t>((dy + rows) % rows) * cols + (dx + cols) % cols];
  }
};

KernelLattice diffraction_kernel(const ScanGrid& grid, double z_m, double omega, bool doubling,
                                 KernelAmplitude amplitude = KernelAmplitude::InvR, int pad_factor = 2);

struct PropagationPlan {
  ScanGrid grid;
  std::vector<double> depths_m;
  double z_near_m = 0.0;
  double z_far_m = 0.0;
  int pad_factor = 2;
  bool doubling = true;
  KernelAmplitude amplitude = KernelAmplitude::InvR;
  double t0_s = 0.0;

  /// FFT of each kernel lattice keyed by (depth index, Omega). Filled by
  /// warm_cache; read-only during propagation.
  std::map<std::pair<std::size_t, double>, std::vector<cd>> kernel_spectra;

  /// Precomputes kernel spectra for the band when they fit in byte_budget.
  /// Returns true if the cache was filled.
  bool warm_cache(const FrequencyAxis& axis, const std::vector<int>& band,
                  std::size_t byte_budget = std::size_t{512} << 20);
};

PropagationPlan make_plan(const ScanGrid& grid, std::vector<double> depths_m, bool doubling, int pad_factor = 2,
                          KernelAmplitude amplitude = KernelAmplitude::InvR);

/// Depth planes at voxel centers of [z_near, z_far] split into nz slabs.
PropagationPlan make_plan(const ScanGrid& grid, double z_near_m, double z_far_m, int nz, bool doubling,
                          int pad_factor = 2, KernelAmplitude amplitude = KernelAmplitude::InvR);

enum class Execution { Parallel, Serial };

/// FFT-based propagation: per depth and band index, a padded 2D FFT
/// convolution with the kernel, then
/// I = | sum_k (dOmega / 2 pi) e^{i Omega_k t0} P(x_v, Omega_k) |^2.
ReconVolume propagate(const PhasorField& field, const PropagationPlan& plan,
                      Execution execution = Execution::Parallel);

inline constexpr double kDefaultDirectBudget = 2e9;

/// Same quantity by explicit summation over aperture pixels. Refuses when
/// voxels * aperture pixels * band size exceeds the budget.
ReconVolume propagate_direct(const PhasorField& field, const PropagationPlan& plan,
                             double budget = kDefaultDirectBudget);

}  // namespace nlos
