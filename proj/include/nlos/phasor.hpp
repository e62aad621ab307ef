#pragma once

#include <complex>
#include <span>
#include <vector>

#include "nlos/core.hpp"

namespace nlos {

using cd = std::complex<double>;

/// Gaussian-envelope virtual illumination restricted to its band S.
///
/// The envelope is centered on the DFT index nearest the carrier
/// 2*pi*c / lambda, so the retained band is symmetric about that index, has
/// odd size, and its peak coefficient is exactly 1. Coefficients are real
/// (the pulse is centered at t = 0).
struct IlluminationPacket {
  double lambda_m = 0.0;
  double n_cycles = 0.0;
  double sigma_s = 0.0;
  double gamma = 0.1;
  double omega_c = 0.0;  // nominal carrier, rad/s
  int center_index = 0;
  std::vector<int> band;  // contiguous DFT indices
  std::vector<cd> coeffs;
  FrequencyAxis axis;
};

/// Pulse width for a carrier of n_cycles periods across +-sigma.
double sigma_from_cycles(double lambda_m, double n_cycles);
double cycles_from_sigma(double lambda_m, double sigma_s);

IlluminationPacket illumination_packet(double lambda_m, double n_cycles, int T, double bin_resolution_ps,
                                       double gamma = 0.1);

/// Number of indices the thresholded envelope keeps for a given sigma
/// (ignoring the axis limits).
int band_count(double sigma_s, int T, double bin_resolution_ps, double gamma);

/// Largest sigma whose thresholded band has exactly target_count indices.
/// For target_count == 1 (which holds for all large sigma) returns twice the
/// sigma at which the band first shrinks to a single index.
double calibrate_sigma(double lambda_m, int T, double bin_resolution_ps, double gamma, int target_count);

/// Reference calibration: lambda 9.375 cm, T 512, 32 ps bins, gamma 0.1,
/// 47 indices. Returned as a cycle count so it transfers to other carriers.
struct ReferenceCalibration {
  double lambda_m = 0.09375;
  int T = 512;
  double bin_resolution_ps = 32.0;
  double gamma = 0.1;
  int target_count = 47;
  double sigma_s = 0.0;
  double n_cycles = 0.0;
};
const ReferenceCalibration& reference_calibration();

/// Input packet wavelengths: coefficient * 2 * delta_p.
inline constexpr double kInputWavelengthCoefficients[] = {0.8, 0.9, 1.0, 1.25, 1.5, 2.0, 2.5};

std::vector<IlluminationPacket> input_packets(double delta_p_m, int T, double bin_resolution_ps,
                                              double n_cycles, double gamma = 0.1);

/// Time-axis spectrum of a measurement over indices 0..T/2, computed with
/// the e^{+i Omega t} kernel: a return delayed by tau carries phase
/// e^{+i Omega tau}, which the e^{-i Omega r / c} diffraction kernel
/// refocuses at t = 0.
struct MeasurementSpectrum {
  Array3<cd> values;  // [T/2 + 1, ny, nx]
  FrequencyAxis axis;
  ScanGrid grid;
};

MeasurementSpectrum spectrum(const TransientVolume& volume);

struct PhasorField {
  Array3<cd> values;  // [K, ny, nx]
  std::vector<int> band;
  FrequencyAxis axis;
  ScanGrid grid;
  double lambda_m = 0.0;
};

/// Measurement spectrum times packet coefficients on the packet band.
PhasorField aperture_field(const MeasurementSpectrum& measurement, const IlluminationPacket& packet);

/// One band-restricted field per packet (frequency-domain form of the
/// time convolution with each packet).
std::vector<PhasorField> convolve_inputs(const TransientVolume& volume,
                                         std::span<const IlluminationPacket> packets);

/// Inverse transform with zeros off-band: complex time signal [T, ny, nx].
Array3<cd> time_domain(const PhasorField& field);

/// Sum over band and pixels of |re(a - b)| + |im(a - b)|.
double band_l1(const PhasorField& a, const PhasorField& b);

/// Keeps DFT components with lo <= |Omega| < hi (both conjugate halves).
TransientVolume bandpass_filter(const TransientVolume& volume, double omega_lo, double omega_hi);

}  // namespace nlos
