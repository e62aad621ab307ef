#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "nlos/core.hpp"
#include "nlos/metrics.hpp"
#include "nlos/render.hpp"
#include "nlos/rsd.hpp"
#include "nlos/spad_noise.hpp"

namespace nlos {

enum class PatternKind { Identity, Stride, Crop };
enum class BuiltinEnhancer { Identity, Nearest, Trilinear };

struct PipelineConfig {
  ScanGrid grid = make_scan_grid(2.0, 2.0, 32, 32, true);
  int bins = 512;
  double bin_resolution_ps = 32.0;

  Scene scene;
  std::string scene_description = "inline";

  PatternKind pattern = PatternKind::Identity;
  int stride = 1;
  double crop_m = 0.0;  // crop extent when pattern == Crop (stride may also apply)

  bool noise_enabled = false;
  NoiseParams noise;
  double signal_gain = 1e6;  // clean render scale before corruption

  int temporal_window = 0;  // 0 disables the crop

  BuiltinEnhancer enhancer = BuiltinEnhancer::Nearest;
  std::string enhancer_command;  // external program: <cmd> <in.nlt> <out.nlt>

  double target_lambda_coeff = 3.0;  // times delta_p of the full grid
  std::optional<double> target_lambda_m;
  std::optional<double> n_cycles;  // defaults to the reference calibration
  double gamma = 0.1;

  int nz = 32;
  double z_near_m = 0.0;
  double z_far_m = 2.0;
  bool doubling = true;
  int pad_factor = 2;
  KernelAmplitude amplitude = KernelAmplitude::InvR;

  double depth_threshold = 0.1;
  int mask_kernel = 5;
};

/// Parses the JSON configuration (see README for the schema).
PipelineConfig parse_pipeline_config(const nlohmann::ordered_json& j);
PipelineConfig load_pipeline_config(const std::string& path);

struct PipelineOptions {
  std::uint64_t seed = 0;
  bool keep_intermediates = false;
  std::string out_dir = ".";
};

struct PipelineResult {
  nlohmann::ordered_json report;
  ReconVolume ground_truth;
  ReconVolume prediction;
};

/// Built-in enhancer: undoes a temporal crop, upsamples by the pitch ratio
/// (nearest or trilinear), zero-pads to `full` and normalizes by the peak.
TransientVolume interpolate_to_grid(const TransientVolume& partial, const ScanGrid& full, BuiltinEnhancer method,
                                    int temporal_offset_bins, int bins);

/// render -> subsample -> corrupt -> enhance -> aperture field -> RSD ->
/// project -> evaluate. Deterministic in (config, seed).
PipelineResult run_pipeline(const PipelineConfig& config, const PipelineOptions& options);

std::array<int, 3> argmax_voxel(const Array3<double>& volume);
int voxel_distance(const std::array<int, 3>& a, const std::array<int, 3>& b);  // Chebyshev

nlohmann::ordered_json report_to_json(const EvalReport& report);

}  // namespace nlos
