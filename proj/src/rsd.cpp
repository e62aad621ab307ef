#include "nlos/rsd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fft.hpp"

namespace nlos {

const char* to_string(KernelAmplitude amplitude) {
  return amplitude == KernelAmplitude::InvR ? "inv_r" : "unit";
}

KernelAmplitude parse_kernel_amplitude(const std::string& name) {
  if (name == "inv_r") return KernelAmplitude::InvR;
  if (name == "unit") return KernelAmplitude::Unit;
  throw Error(ErrorKind::Configuration, "kernel amplitude must be inv_r or unit, got '" + name + "'");
}

cd kernel_value(double dx_m, double dy_m, double z_m, double omega, bool doubling, KernelAmplitude amplitude) {
  const double r = std::sqrt(dx_m * dx_m + dy_m * dy_m + z_m * z_m);
  const double path = doubling ? 2.0 * r : r;
  const double magnitude = amplitude == KernelAmplitude::InvR ? 1.0 / r : 1.0;
  return std::polar(magnitude, -omega * path / kSpeedOfLight);
}

KernelLattice diffraction_kernel(const ScanGrid& grid, double z_m, double omega, bool doubling,
                                 KernelAmplitude amplitude, int pad_factor) {
  if (!(z_m > 0.0)) throw Error(ErrorKind::Domain, "kernel depth must be positive");
  if (pad_factor < 2) throw Error(ErrorKind::Configuration, "pad factor must be >= 2");
  KernelLattice k;
  k.rows = pad_factor * grid.ny;
  k.cols = pad_factor * grid.nx;
  k.values.resize(static_cast<std::size_t>(k.rows) * k.cols);
  for (int a = 0; a < k.rows; ++a) {
    const int dy = a < k.rows / 2 ? a : a - k.rows;
    for (int b = 0; b < k.cols; ++b) {
      const int dx = b < k.cols / 2 ? b : b - k.cols;
      k.values[static_cast<std::size_t>(a) * k.cols + b] =
          kernel_value(dx * grid.delta_p_m, dy * grid.delta_p_m, z_m, omega, doubling, amplitude);
    }
  }
  return k;
}

namespace {

void validate_plan(const PropagationPlan& plan) {
  if (plan.depths_m.empty()) throw Error(ErrorKind::Configuration, "propagation plan has no depth planes");
  for (std::size_t i = 0; i < plan.depths_m.size(); ++i) {
    if (!(plan.depths_m[i] > 0.0) || (i > 0 && !(plan.depths_m[i] > plan.depths_m[i - 1]))) {
      throw Error(ErrorKind::Configuration, "depth planes must be positive and strictly increasing");
    }
  }
  if (plan.pad_factor < 2) throw Error(ErrorKind::Configuration, "pad factor must be >= 2");
}

void check_field(const PhasorField& field, const PropagationPlan& plan) {
  const auto& g = plan.grid;
  if (field.grid.nx != g.nx || field.grid.ny != g.ny || field.grid.delta_p_m != g.delta_p_m ||
      field.values.dim(1) != static_cast<std::size_t>(g.ny) ||
      field.values.dim(2) != static_cast<std::size_t>(g.nx)) {
    std::ostringstream msg;
    msg << "field grid " << field.grid.ny << "x" << field.grid.nx << " (dp " << field.grid.delta_p_m
        << ") does not match plan grid " << g.ny << "x" << g.nx << " (dp " << g.delta_p_m << ")";
    throw Error(ErrorKind::Shape, msg.str());
  }
  if (field.values.dim(0) != field.band.size()) throw Error(ErrorKind::Shape, "field band size mismatch");
}

ReconVolume empty_volume(const PhasorField& field, const PropagationPlan& plan) {
  ReconVolume out;
  const auto nz = plan.depths_m.size();
  out.data = Array3<double>(nz, field.values.dim(1), field.values.dim(2));
  out.pitch_x_m = plan.grid.delta_p_m;
  out.pitch_y_m = plan.grid.delta_p_m;
  out.pitch_z_m = nz > 1 ? (plan.depths_m.back() - plan.depths_m.front()) / static_cast<double>(nz - 1)
                         : plan.z_far_m - plan.z_near_m;
  out.z_near_m = plan.z_near_m;
  out.z_far_m = plan.z_far_m;
  out.depths_m = plan.depths_m;
  out.grid = plan.grid;
  return out;
}

// Quadrature weight times time phase for band entry i.
std::vector<cd> band_weights(const PhasorField& field, double t0_s) {
  const double weight = field.axis.step() / (2.0 * kPi);
  std::vector<cd> w;
  for (int k : field.band) w.push_back(std::polar(weight, field.axis.signed_omega(k) * t0_s));
  return w;
}

std::vector<cd> kernel_spectrum(const PropagationPlan& plan, std::size_t depth, double omega,
                                const fft::Fft2& fft2) {
  KernelLattice k = diffraction_kernel(plan.grid, plan.depths_m[depth], omega, plan.doubling, plan.amplitude,
                                       plan.pad_factor);
  std::vector<cd> spec(k.values.size());
  fft2.forward(k.values.data(), spec.data());
  return spec;
}

}  // namespace

bool PropagationPlan::warm_cache(const FrequencyAxis& axis, const std::vector<int>& band, std::size_t byte_budget) {
  validate_plan(*this);
  const std::size_t lattice = static_cast<std::size_t>(pad_factor) * grid.ny * pad_factor * grid.nx;
  const std::size_t bytes = lattice * sizeof(cd) * depths_m.size() * band.size();
  if (bytes > byte_budget) return false;
  const fft::Fft2 fft2(pad_factor * grid.ny, pad_factor * grid.nx);
  for (std::size_t d = 0; d < depths_m.size(); ++d) {
    for (int k : band) {
      const double omega = axis.signed_omega(k);
      const auto key = std::make_pair(d, omega);
      if (!kernel_spectra.contains(key)) kernel_spectra.emplace(key, kernel_spectrum(*this, d, omega, fft2));
    }
  }
  return true;
}

PropagationPlan make_plan(const ScanGrid& grid, std::vector<double> depths_m, bool doubling, int pad_factor,
                          KernelAmplitude amplitude) {
  PropagationPlan plan;
  plan.grid = grid;
  plan.depths_m = std::move(depths_m);
  plan.doubling = doubling;
  plan.pad_factor = pad_factor;
  plan.amplitude = amplitude;
  validate_plan(plan);
  if (plan.depths_m.size() > 1) {
    const double half = 0.5 * (plan.depths_m[1] - plan.depths_m[0]);
    plan.z_near_m = std::max(0.0, plan.depths_m.front() - half);
    plan.z_far_m = plan.depths_m.back() + half;
  } else {
    plan.z_near_m = 0.0;
    plan.z_far_m = 2.0 * plan.depths_m.front();
  }
  return plan;
}

PropagationPlan make_plan(const ScanGrid& grid, double z_near_m, double z_far_m, int nz, bool doubling,
                          int pad_factor, KernelAmplitude amplitude) {
  PropagationPlan plan = make_plan(grid, depth_planes(z_near_m, z_far_m, nz), doubling, pad_factor, amplitude);
  plan.z_near_m = z_near_m;
  plan.z_far_m = z_far_m;
  return plan;
}

ReconVolume propagate(const PhasorField& field, const PropagationPlan& plan, Execution execution) {
  validate_plan(plan);
  check_field(field, plan);
  ReconVolume out = empty_volume(field, plan);
  const int ny = plan.grid.ny;
  const int nx = plan.grid.nx;
  const int rows = plan.pad_factor * ny;
  const int cols = plan.pad_factor * nx;
  const std::size_t lattice = static_cast<std::size_t>(rows) * cols;
  const std::size_t plane = static_cast<std::size_t>(ny) * nx;
  const long long band_size = static_cast<long long>(field.band.size());
  const long long depths = static_cast<long long>(plan.depths_m.size());
  const bool parallel = execution == Execution::Parallel;
  const fft::Fft2 fft2(rows, cols);
  const std::vector<cd> weights = band_weights(field, plan.t0_s);
  const double norm = 1.0 / static_cast<double>(lattice);

  // Padded field spectra, one per band index.
  std::vector<cd> field_spectra(lattice * field.band.size());
#pragma omp parallel if (parallel)
  {
    std::vector<cd> padded(lattice);
#pragma omp for schedule(static)
    for (long long i = 0; i < band_size; ++i) {
      std::fill(padded.begin(), padded.end(), cd{});
      const cd* src = field.values.data() + static_cast<std::size_t>(i) * plane;
      for (int y = 0; y < ny; ++y) {
        std::copy_n(src + static_cast<std::size_t>(y) * nx, nx, padded.begin() + static_cast<std::ptrdiff_t>(y) * cols);
      }
      fft2.forward(padded.data(), field_spectra.data() + static_cast<std::size_t>(i) * lattice);
    }
  }

  // Each depth plane owns its accumulator; band indices are summed in order.
#pragma omp parallel if (parallel)
  {
    std::vector<cd> product(lattice), conv(lattice), acc(plane);
#pragma omp for schedule(dynamic)
    for (long long d = 0; d < depths; ++d) {
      std::fill(acc.begin(), acc.end(), cd{});
      for (long long i = 0; i < band_size; ++i) {
        const double omega = field.axis.signed_omega(field.band[static_cast<std::size_t>(i)]);
        const auto cached = plan.kernel_spectra.find({static_cast<std::size_t>(d), omega});
        std::vector<cd> local;
        const cd* kspec = nullptr;
        if (cached != plan.kernel_spectra.end()) {
          kspec = cached->second.data();
        } else {
          local = kernel_spectrum(plan, static_cast<std::size_t>(d), omega, fft2);
          kspec = local.data();
        }
        const cd* fspec = field_spectra.data() + static_cast<std::size_t>(i) * lattice;
        for (std::size_t j = 0; j < lattice; ++j) product[j] = fspec[j] * kspec[j];
        fft2.inverse(product.data(), conv.data());
        const cd w = weights[static_cast<std::size_t>(i)] * norm;
        for (int y = 0; y < ny; ++y) {
          for (int x = 0; x < nx; ++x) {
            acc[static_cast<std::size_t>(y) * nx + x] += w * conv[static_cast<std::size_t>(y) * cols + x];
          }
        }
      }
      double* dst = out.data.data() + static_cast<std::size_t>(d) * plane;
      for (std::size_t p = 0; p < plane; ++p) dst[p] = std::norm(acc[p]);
    }
  }
  return out;
}

ReconVolume propagate_direct(const PhasorField& field, const PropagationPlan& plan, double budget) {
  validate_plan(plan);
  check_field(field, plan);
  const double plane = static_cast<double>(plan.grid.nx) * plan.grid.ny;
  const double work = plane * plane * static_cast<double>(plan.depths_m.size()) * static_cast<double>(field.band.size());
  if (work > budget) {
    std::ostringstream msg;
    msg << "direct propagation needs " << work << " kernel evaluations, budget is " << budget << " ("
        << plan.grid.ny << "x" << plan.grid.nx << " aperture, " << plan.depths_m.size() << " depths, "
        << field.band.size() << " band indices)";
    throw Error(ErrorKind::Budget, msg.str());
  }
  ReconVolume out = empty_volume(field, plan);
  const int ny = plan.grid.ny;
  const int nx = plan.grid.nx;
  const double dp = plan.grid.delta_p_m;
  const std::vector<cd> weights = band_weights(field, plan.t0_s);
  for (std::size_t d = 0; d < plan.depths_m.size(); ++d) {
    const double z = plan.depths_m[d];
    for (int vy = 0; vy < ny; ++vy) {
      for (int vx = 0; vx < nx; ++vx) {
        cd total{};
        for (std::size_t i = 0; i < field.band.size(); ++i) {
          const double omega = field.axis.signed_omega(field.band[i]);
          cd sum{};
          for (int cy = 0; cy < ny; ++cy) {
            for (int cx = 0; cx < nx; ++cx) {
              sum += field.values(i, cy, cx) *
                     kernel_value((vx - cx) * dp, (vy - cy) * dp, z, omega, plan.doubling, plan.amplitude);
            }
          }
          total += weights[i] * sum;
        }
        out.data(d, vy, vx) = std::norm(total);
      }
    }
  }
  return out;
}

}  // namespace nlos
