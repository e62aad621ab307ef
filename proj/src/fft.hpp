#pragma once

// Thin RAII layer over FFTW. Plans are built with FFTW_ESTIMATE so the
// chosen algorithm (and therefore rounding) is identical run to run; the
// planner is serialized, execution with new arrays is thread-safe.

#include <fftw3.h>

#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>

namespace nlos::fft {

using cd = std::complex<double>;

std::mutex& planner_mutex();

struct PlanDeleter {
  void operator()(fftw_plan_s* p) const {
    if (p) fftw_destroy_plan(p);
  }
};
using PlanHandle = std::unique_ptr<fftw_plan_s, PlanDeleter>;

inline fftw_complex* as_fftw(cd* p) { return reinterpret_cast<fftw_complex*>(p); }

/// Batched real-to-complex / complex-to-real transforms along the slowest
/// axis of a [n, batch] row-major array (one transform per column).
class TimeAxisFft {
 public:
  TimeAxisFft(int n, int batch);

  // out: [n/2 + 1, batch]; exponent sign -1 (FFTW forward).
  void forward(const double* in, cd* out) const;
  // in: [n/2 + 1, batch] (consumed); out: [n, batch]; unnormalized.
  void inverse(cd* in, double* out) const;

  int length() const { return n_; }

 private:
  int n_;
  int batch_;
  PlanHandle r2c_;
  PlanHandle c2r_;
};

/// Unnormalized 2D complex transforms on a [rows, cols] array.
class Fft2 {
 public:
  Fft2(int rows, int cols);

  void forward(cd* in, cd* out) const;
  void inverse(cd* in, cd* out) const;

  int rows() const { return rows_; }
  int cols() const { return cols_; }

 private:
  int rows_;
  int cols_;
  PlanHandle fwd_;
  PlanHandle bwd_;
};

}  // namespace nlos::fft
