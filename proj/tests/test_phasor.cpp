#include <doctest.h>

#include <cmath>
#include <random>

#include "nlos/phasor.hpp"
#include "test_util.hpp"

using namespace nlos;
using nlos::test::error_kind;

namespace {

// Exhaustive count of indices whose envelope reaches gamma around the
// index nearest the carrier.
int brute_band(double lambda_m, double sigma_s, int T, double dt_ps, double gamma) {
  const double step = 2.0 * kPi / (T * dt_ps * 1e-12);
  const int kc = static_cast<int>(std::lround(2.0 * kPi * kSpeedOfLight / lambda_m / step));
  int count = 0;
  for (int k = -4 * T; k <= 4 * T; ++k) {
    const double d = (k - kc) * step;
    if (std::exp(-0.5 * sigma_s * sigma_s * d * d) >= gamma) ++count;
  }
  return count;
}

TransientVolume impulse_volume(const ScanGrid& grid, int T, int iy, int ix) {
  auto v = make_transient(grid, T, 32.0);
  v.data(0, iy, ix) = 1.0;
  return v;
}

}  // namespace

TEST_CASE("reference calibration keeps 47 indices") {
  const auto& cal = reference_calibration();
  CHECK(brute_band(0.09375, cal.sigma_s, 512, 32.0, 0.1) == 47);
  CHECK(brute_band(0.09375, cal.sigma_s * (1.0 + 1e-6), 512, 32.0, 0.1) < 47);
  CHECK(band_count(cal.sigma_s, 512, 32.0, 0.1) == 47);

  const auto p = illumination_packet(0.09375, cal.n_cycles, 512, 32.0, 0.1);
  CHECK(p.center_index == 52);
  REQUIRE(p.band.size() == 47);
  CHECK(p.band.front() == 29);
  CHECK(p.band.back() == 75);
  CHECK(p.coeffs[23] == cd(1.0, 0.0));
  for (std::size_t i = 0; i < p.band.size(); ++i) {
    CHECK(std::abs(p.coeffs[i]) <= 1.0);
    CHECK(std::abs(p.coeffs[i]) >= 0.1);
    if (i > 0) CHECK(p.band[i] == p.band[i - 1] + 1);
  }
  // Recomputing gives the same sigma.
  CHECK(calibrate_sigma(0.09375, 512, 32.0, 0.1, 47) == cal.sigma_s);
  CHECK(sigma_from_cycles(0.09375, cal.n_cycles) == doctest::Approx(cal.sigma_s).epsilon(1e-14));
}

TEST_CASE("calibration targets") {
  for (int target : {1, 3, 5, 11, 23, 47, 95}) {
    const double s = calibrate_sigma(0.09375, 512, 32.0, 0.1, target);
    CHECK(brute_band(0.09375, s, 512, 32.0, 0.1) == target);
  }
  CHECK(error_kind([] { calibrate_sigma(0.09375, 512, 32.0, 0.1, 46); }) == ErrorKind::Calibration);
  CHECK(error_kind([] { calibrate_sigma(0.09375, 512, 32.0, 1.0, 3); }) == ErrorKind::Calibration);
}

TEST_CASE("gamma of one keeps only the peak") {
  const auto p = illumination_packet(0.09375, 5.0, 512, 32.0, 1.0);
  REQUIRE(p.band.size() == 1);
  CHECK(p.band[0] == 52);
  CHECK(p.coeffs[0] == cd(1.0, 0.0));
}

TEST_CASE("packets that overflow the axis name the minimum cycle count") {
  try {
    illumination_packet(0.09375, 0.2, 512, 32.0, 0.1);
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Configuration);
    CHECK(std::string(e.what()).find("n_cycles >=") != std::string::npos);
  }
  CHECK(error_kind([] { illumination_packet(0.001, 5.0, 512, 32.0, 0.1); }) == ErrorKind::Configuration);
  CHECK(error_kind([] { illumination_packet(-1.0, 5.0, 512, 32.0, 0.1); }) == ErrorKind::Domain);
}

TEST_CASE("impulse at t = 0 reproduces the packet coefficients") {
  const auto grid = make_scan_grid(2.0, 2.0, 64, 64, true);
  const auto packets = input_packets(grid.delta_p_m, 512, 32.0, reference_calibration().n_cycles);
  REQUIRE(packets.size() == 7);
  for (std::size_t i = 0; i < 7; ++i) {
    CHECK(packets[i].lambda_m == doctest::Approx(kInputWavelengthCoefficients[i] * 2.0 * 0.03125));
  }
  const auto fields = convolve_inputs(impulse_volume(grid, 512, 3, 5), packets);
  REQUIRE(fields.size() == 7);
  std::size_t planes = 0;
  for (std::size_t i = 0; i < 7; ++i) {
    const auto& f = fields[i];
    CHECK(f.band == packets[i].band);
    CHECK(f.values.dim(0) == f.band.size());
    for (std::size_t k = 0; k < f.band.size(); ++k) {
      CHECK(std::abs(f.values(k, 3, 5) - packets[i].coeffs[k]) < 1e-12);
      CHECK(f.values(k, 3, 4) == cd(0.0, 0.0));
    }
    planes += 2;
  }
  CHECK(planes == 14);
}

TEST_CASE("aperture field") {
  const auto grid = make_scan_grid(2.0, 2.0, 4, 4, true);
  const auto p = illumination_packet(0.25, reference_calibration().n_cycles, 512, 32.0);
  const auto zero = aperture_field(spectrum(make_transient(grid, 512, 32.0)), p);
  for (const cd& v : zero.values.values()) CHECK(v == cd(0.0, 0.0));

  MeasurementSpectrum ones;
  ones.axis = frequency_axis(512, 32.0);
  ones.grid = grid;
  ones.values = Array3<cd>(257, 4, 4);
  for (cd& v : ones.values.values()) v = cd(1.0, 0.0);
  const auto f = aperture_field(ones, p);
  for (std::size_t k = 0; k < p.band.size(); ++k) {
    for (int y = 0; y < 4; ++y) {
      for (int x = 0; x < 4; ++x) CHECK(f.values(k, y, x) == p.coeffs[k]);
    }
  }
  const auto other = illumination_packet(0.25, reference_calibration().n_cycles, 256, 32.0);
  CHECK(error_kind([&] { aperture_field(ones, other); }) == ErrorKind::Shape);
}

TEST_CASE("frequency product equals circular convolution") {
  const int T = 32;
  const double lambda = kSpeedOfLight * T * 32e-12 / 8.0;  // carrier on index 8
  const double sigma = calibrate_sigma(lambda, T, 32.0, 0.1, 5);
  const auto p = illumination_packet(lambda, cycles_from_sigma(lambda, sigma), T, 32.0);
  REQUIRE(p.band.size() == 5);
  // Packet pulse in time from its coefficients.
  std::vector<cd> pulse(T);
  for (int t = 0; t < T; ++t) {
    for (std::size_t j = 0; j < p.band.size(); ++j) {
      pulse[t] += p.coeffs[j] * std::polar(1.0, -2.0 * kPi * p.band[j] * t / T) / static_cast<double>(T);
    }
  }
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto v = make_transient(make_scan_grid(1.0, 1.0, 1, 1, true), T, 32.0);
  for (int t = 0; t < T; ++t) v.data(t, 0, 0) = u(rng);
  const auto y = time_domain(aperture_field(spectrum(v), p));
  double err = 0.0, scale = 0.0;
  for (int t = 0; t < T; ++t) {
    cd ref;
    for (int s = 0; s < T; ++s) ref += v.data(s, 0, 0) * pulse[(t - s + T) % T];
    err = std::max(err, std::abs(y(t, 0, 0) - ref));
    scale = std::max(scale, std::abs(ref));
  }
  CHECK(err / scale <= 1e-10);
}

TEST_CASE("band l1") {
  const auto grid = make_scan_grid(2.0, 2.0, 2, 2, true);
  PhasorField a;
  a.grid = grid;
  a.axis = frequency_axis(64, 32.0);
  a.band = {3, 4};
  a.values = Array3<cd>(2, 2, 2);
  PhasorField b = a;
  CHECK(band_l1(a, b) == 0.0);
  a.values(1, 0, 1) = cd(3.0, 4.0);
  CHECK(band_l1(a, b) == 7.0);
  b.band = {4, 5};
  CHECK(error_kind([&] { band_l1(a, b); }) == ErrorKind::Shape);
}

TEST_CASE("bandpass filter") {
  auto v = make_transient(make_scan_grid(2.0, 2.0, 2, 2, true), 128, 32.0);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& x : v.data.values()) x = u(rng);
  const auto full = bandpass_filter(v, 0.0, std::numeric_limits<double>::infinity());
  for (std::size_t i = 0; i < v.data.size(); ++i) CHECK(full.data.data()[i] == doctest::Approx(v.data.data()[i]).epsilon(1e-10));

  const auto axis = frequency_axis(128, 32.0);
  auto s = make_transient(make_scan_grid(2.0, 2.0, 2, 2, true), 128, 32.0);
  for (int t = 0; t < 128; ++t) {
    for (std::size_t p = 0; p < 4; ++p) s.data.data()[t * 4 + p] = std::cos(2.0 * kPi * 10 * t / 128.0) + 1.0;
  }
  // Stopband covers index 10; the constant at index 0 is also removed.
  const auto killed = bandpass_filter(s, 15 * axis.step(), 40 * axis.step());
  for (double x : killed.data.values()) CHECK(std::abs(x) < 1e-9);
  // Passband keeps the sinusoid and drops the constant.
  const auto kept = bandpass_filter(s, 5 * axis.step(), 15 * axis.step());
  for (int t = 0; t < 128; ++t) CHECK(kept.data(t, 1, 1) == doctest::Approx(std::cos(2.0 * kPi * 10 * t / 128.0)).epsilon(1e-9));
}
