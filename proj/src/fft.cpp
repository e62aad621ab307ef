#include "fft.hpp"

#include <vector>

#include "nlos/error.hpp"

namespace nlos::fft {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

TimeAxisFft::TimeAxisFft(int n, int batch) : n_(n), batch_(batch) {
  const int half = n / 2 + 1;
  std::vector<double> real(static_cast<std::size_t>(n) * batch);
  std::vector<cd> spec(static_cast<std::size_t>(half) * batch);
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  r2c_.reset(fftw_plan_many_dft_r2c(1, &n, batch, real.data(), nullptr, batch, 1, as_fftw(spec.data()),
                                    nullptr, batch, 1, flags));
  c2r_.reset(fftw_plan_many_dft_c2r(1, &n, batch, as_fftw(spec.data()), nullptr, batch, 1, real.data(),
                                    nullptr, batch, 1, flags | FFTW_DESTROY_INPUT));
  if (!r2c_ || !c2r_) throw Error(ErrorKind::Configuration, "FFTW failed to plan time-axis transform");
}

void TimeAxisFft::forward(const double* in, cd* out) const {
  fftw_execute_dft_r2c(r2c_.get(), const_cast<double*>(in), as_fftw(out));
}

void TimeAxisFft::inverse(cd* in, double* out) const {
  fftw_execute_dft_c2r(c2r_.get(), as_fftw(in), out);
}

Fft2::Fft2(int rows, int cols) : rows_(rows), cols_(cols) {
  std::vector<cd> a(static_cast<std::size_t>(rows) * cols), b(a.size());
  std::lock_guard lock(planner_mutex());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  fwd_.reset(fftw_plan_dft_2d(rows, cols, as_fftw(a.data()), as_fftw(b.data()), FFTW_FORWARD, flags));
  bwd_.reset(fftw_plan_dft_2d(rows, cols, as_fftw(a.data()), as_fftw(b.data()), FFTW_BACKWARD, flags));
  if (!fwd_ || !bwd_) throw Error(ErrorKind::Configuration, "FFTW failed to plan 2D transform");
}

void Fft2::forward(cd* in, cd* out) const { fftw_execute_dft(fwd_.get(), as_fftw(in), as_fftw(out)); }
void Fft2::inverse(cd* in, cd* out) const { fftw_execute_dft(bwd_.get(), as_fftw(in), as_fftw(out)); }

}  // namespace nlos::fft
