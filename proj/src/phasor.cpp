#include "nlos/phasor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fft.hpp"

namespace nlos {

namespace {

double envelope(double sigma_s, double delta_omega) {
  return std::exp(-0.5 * sigma_s * sigma_s * delta_omega * delta_omega);
}

// Largest j >= 0 with envelope(sigma, j * step) >= gamma.
long long band_radius(double sigma_s, double step, double gamma) {
  const double estimate = std::sqrt(2.0 * std::log(1.0 / gamma)) / (sigma_s * step);
  if (!(estimate < 1e9)) return std::numeric_limits<int>::max() / 4;
  auto j = static_cast<long long>(std::floor(estimate));
  while (j > 0 && envelope(sigma_s, j * step) < gamma) --j;
  while (envelope(sigma_s, (j + 1) * step) >= gamma) ++j;
  return j;
}

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw Error(ErrorKind::Configuration, "peak ratio gamma must be in (0, 1]");
}

}  // namespace

double sigma_from_cycles(double lambda_m, double n_cycles) { return n_cycles * lambda_m / (2.0 * kSpeedOfLight); }
double cycles_from_sigma(double lambda_m, double sigma_s) { return 2.0 * kSpeedOfLight * sigma_s / lambda_m; }

IlluminationPacket illumination_packet(double lambda_m, double n_cycles, int T, double bin_resolution_ps,
                                       double gamma) {
  if (!(lambda_m > 0.0)) throw Error(ErrorKind::Domain, "wavelength must be positive");
  if (!(n_cycles > 0.0)) throw Error(ErrorKind::Domain, "n_cycles must be positive");
  check_gamma(gamma);
  IlluminationPacket p;
  p.axis = frequency_axis(T, bin_resolution_ps);
  p.lambda_m = lambda_m;
  p.n_cycles = n_cycles;
  p.sigma_s = sigma_from_cycles(lambda_m, n_cycles);
  p.gamma = gamma;
  p.omega_c = 2.0 * kPi * kSpeedOfLight / lambda_m;
  const double step = p.axis.step();
  const double k_exact = p.omega_c / step;
  if (k_exact >= T / 2.0 + 0.5) {
    std::ostringstream msg;
    msg << "carrier for lambda " << lambda_m << " m lies above the Nyquist index of a " << T
        << "-bin axis";
    throw Error(ErrorKind::Configuration, msg.str());
  }
  p.center_index = static_cast<int>(std::lround(k_exact));
  const long long radius = band_radius(p.sigma_s, step, gamma);
  if (p.center_index - radius < 1 || p.center_index + radius > T / 2) {
    const int room = std::min(p.center_index - 1, T / 2 - p.center_index);
    std::ostringstream msg;
    msg << "band of " << 2 * radius + 1 << " indices around index " << p.center_index
        << " does not fit the positive half axis";
    if (room >= 0) {
      const double min_sigma = std::sqrt(2.0 * std::log(1.0 / gamma)) / ((room + 1) * step);
      msg << "; use n_cycles >= " << cycles_from_sigma(lambda_m, min_sigma);
    }
    throw Error(ErrorKind::Configuration, msg.str());
  }
  for (long long j = -radius; j <= radius; ++j) {
    p.band.push_back(static_cast<int>(p.center_index + j));
    p.coeffs.emplace_back(envelope(p.sigma_s, static_cast<double>(j) * step), 0.0);
  }
  return p;
}

int band_count(double sigma_s, int T, double bin_resolution_ps, double gamma) {
  check_gamma(gamma);
  const double step = frequency_axis(T, bin_resolution_ps).step();
  return static_cast<int>(2 * band_radius(sigma_s, step, gamma) + 1);
}

double calibrate_sigma(double lambda_m, int T, double bin_resolution_ps, double gamma, int target_count) {
  if (!(lambda_m > 0.0)) throw Error(ErrorKind::Domain, "wavelength must be positive");
  check_gamma(gamma);
  if (target_count < 1 || target_count % 2 == 0) {
    throw Error(ErrorKind::Calibration, "band count target must be odd and >= 1");
  }
  const double step = frequency_axis(T, bin_resolution_ps).step();
  const double reach = std::sqrt(2.0 * std::log(1.0 / gamma));
  if (target_count == 1) {
    return gamma == 1.0 ? 1.0 / step : 2.0 * reach / step;
  }
  if (gamma == 1.0) throw Error(ErrorKind::Calibration, "gamma = 1 only admits a single-index band");
  const long long radius = target_count / 2;
  double lo = reach / ((radius + 2) * step);  // band wider than the target
  double hi = reach / ((radius - 0.5) * step);  // band narrower than the target
  auto count = [&](double s) { return 2 * band_radius(s, step, gamma) + 1; };
  if (count(lo) < target_count || count(hi) >= target_count) {
    throw Error(ErrorKind::Calibration, "could not bracket the band-count target");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count(mid) >= target_count) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // Step back from the exact edge so a round trip through n_cycles keeps the count.
  const double sigma = lo * (1.0 - 1e-9);
  if (count(sigma) != target_count) {
    throw Error(ErrorKind::Calibration, "band count " + std::to_string(target_count) + " is unreachable");
  }
  return sigma;
}

const ReferenceCalibration& reference_calibration() {
  static const ReferenceCalibration cal = [] {
    ReferenceCalibration c;
    c.sigma_s = calibrate_sigma(c.lambda_m, c.T, c.bin_resolution_ps, c.gamma, c.target_count);
    c.n_cycles = cycles_from_sigma(c.lambda_m, c.sigma_s);
    return c;
  }();
  return cal;
}

std::vector<IlluminationPacket> input_packets(double delta_p_m, int T, double bin_resolution_ps, double n_cycles,
                                              double gamma) {
  std::vector<IlluminationPacket> packets;
  for (double coefficient : kInputWavelengthCoefficients) {
    packets.push_back(illumination_packet(coefficient * 2.0 * delta_p_m, n_cycles, T, bin_resolution_ps, gamma));
  }
  return packets;
}

MeasurementSpectrum spectrum(const TransientVolume& volume) {
  const int T = volume.bins();
  const int half = T / 2 + 1;
  const auto plane = volume.data.plane_size();
  MeasurementSpectrum out;
  out.axis = frequency_axis(T, volume.bin_resolution_ps);
  out.grid = volume.grid;
  out.values = Array3<cd>(half, volume.data.dim(1), volume.data.dim(2));
  const fft::TimeAxisFft plan(T, static_cast<int>(plane));
  plan.forward(volume.data.data(), out.values.data());
  for (cd& v : out.values.values()) v = std::conj(v);
  return out;
}

PhasorField aperture_field(const MeasurementSpectrum& measurement, const IlluminationPacket& packet) {
  if (!(measurement.axis == packet.axis)) {
    throw Error(ErrorKind::Shape, "measurement and packet frequency axes differ (T " +
                                      std::to_string(measurement.axis.T) + " vs " +
                                      std::to_string(packet.axis.T) + ")");
  }
  const auto half = static_cast<int>(measurement.values.dim(0));
  for (int k : packet.band) {
    if (k < 0 || k >= half) throw Error(ErrorKind::Shape, "packet band exceeds the measurement spectrum");
  }
  PhasorField field;
  field.band = packet.band;
  field.axis = packet.axis;
  field.grid = measurement.grid;
  field.lambda_m = packet.lambda_m;
  const std::size_t plane = measurement.values.plane_size();
  field.values = Array3<cd>(packet.band.size(), measurement.values.dim(1), measurement.values.dim(2));
  for (std::size_t i = 0; i < packet.band.size(); ++i) {
    const cd* src = measurement.values.data() + static_cast<std::size_t>(packet.band[i]) * plane;
    cd* dst = field.values.data() + i * plane;
    for (std::size_t p = 0; p < plane; ++p) dst[p] = src[p] * packet.coeffs[i];
  }
  return field;
}

std::vector<PhasorField> convolve_inputs(const TransientVolume& volume, std::span<const IlluminationPacket> packets) {
  for (const auto& p : packets) {
    if (p.axis.T != volume.bins() || p.axis.bin_resolution_ps != volume.bin_resolution_ps) {
      throw Error(ErrorKind::Shape, "packet axis does not match the volume time axis");
    }
  }
  const MeasurementSpectrum spec = spectrum(volume);
  std::vector<PhasorField> fields;
  fields.reserve(packets.size());
  for (const auto& p : packets) fields.push_back(aperture_field(spec, p));
  return fields;
}

Array3<cd> time_domain(const PhasorField& field) {
  const int T = field.axis.T;
  const std::size_t plane = field.values.plane_size();
  Array3<cd> out(T, field.values.dim(1), field.values.dim(2));
  for (std::size_t i = 0; i < field.band.size(); ++i) {
    const double omega_step = 2.0 * kPi * field.band[i] / T;
    const cd* src = field.values.data() + i * plane;
    for (int t = 0; t < T; ++t) {
      const cd phase = std::polar(1.0 / T, -omega_step * t);
      cd* dst = out.data() + static_cast<std::size_t>(t) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] += src[p] * phase;
    }
  }
  return out;
}

double band_l1(const PhasorField& a, const PhasorField& b) {
  if (a.band != b.band || a.values.dims() != b.values.dims()) {
    throw Error(ErrorKind::Shape, "band_l1 needs fields on identical bands and grids");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    const cd d = a.values.data()[i] - b.values.data()[i];
    total += std::abs(d.real()) + std::abs(d.imag());
  }
  return total;
}

TransientVolume bandpass_filter(const TransientVolume& volume, double omega_lo, double omega_hi) {
  if (!(omega_lo >= 0.0 && omega_lo < omega_hi)) {
    throw Error(ErrorKind::Domain, "band-pass needs 0 <= omega_lo < omega_hi");
  }
  const int T = volume.bins();
  const int half = T / 2 + 1;
  const std::size_t plane = volume.data.plane_size();
  const FrequencyAxis axis = frequency_axis(T, volume.bin_resolution_ps);
  std::vector<cd> spec(static_cast<std::size_t>(half) * plane);
  const fft::TimeAxisFft plan(T, static_cast<int>(plane));
  plan.forward(volume.data.data(), spec.data());
  for (int k = 0; k < half; ++k) {
    const double w = std::abs(axis.signed_omega(k));
    if (w >= omega_lo && w < omega_hi) continue;
    std::fill_n(spec.begin() + static_cast<std::ptrdiff_t>(k * plane), plane, cd{});
  }
  TransientVolume out = volume;
  plan.inverse(spec.data(), out.data.data());
  for (double& v : out.data.values()) v /= T;
  return out;
}

}  // namespace nlos
