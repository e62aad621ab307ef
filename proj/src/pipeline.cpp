#include "nlos/pipeline.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <unistd.h>

#include "nlos/metrics.hpp"
#include "nlos/nlt_io.hpp"
#include "nlos/phasor.hpp"
#include "nlos/sampling.hpp"

namespace nlos {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

template <typename T>
T get_or(const ordered_json& j, const char* key, T fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  try {
    return j[key].get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("config field '") + key + "': " + e.what());
  }
}

Scene parse_scene(const ordered_json& j, std::string& description) {
  if (j.contains("points")) {
    Scene scene;
    for (const auto& row : j["points"]) {
      const auto v = row.get<std::vector<double>>();
      if (v.size() != 4 && v.size() != 7) {
        throw Error(ErrorKind::Configuration, "scene points need 4 or 7 numbers");
      }
      Scatterer s{{v[0], v[1], v[2]}, v[3], std::nullopt};
      if (v.size() == 7) s.normal = Vec3{v[4], v[5], v[6]};
      scene.points.push_back(s);
    }
    description = "inline";
    return scene;
  }
  if (j.contains("file")) {
    description = j["file"].get<std::string>();
    return read_scene_file(description);
  }
  if (j.contains("shape")) {
    const auto shape = parse_base_shape(j["shape"].get<std::string>());
    const auto seed = get_or<std::uint64_t>(j, "seed", 0);
    const auto preset = get_or<std::string>(j, "augment", "train");
    AugmentParams augment = preset == "train"        ? AugmentParams::training()
                            : preset == "validation" ? AugmentParams::validation()
                            : preset == "identity"   ? AugmentParams::identity()
                                                     : throw Error(ErrorKind::Configuration,
                                                                   "augment must be train|validation|identity");
    std::mt19937_64 rng(seed);
    description = std::string(to_string(shape)) + "/seed=" + std::to_string(seed) + "/" + preset;
    return sample_scene(rng, shape, augment);
  }
  throw Error(ErrorKind::Configuration, "scene needs 'points', 'file' or 'shape'");
}

}  // namespace

PipelineConfig parse_pipeline_config(const ordered_json& j) {
  PipelineConfig c;
  if (j.contains("grid")) {
    const auto& g = j["grid"];
    std::optional<Vec3> laser;
    if (g.contains("laser_point_m")) {
      const auto lp = g["laser_point_m"].get<std::vector<double>>();
      if (lp.size() != 3) throw Error(ErrorKind::Configuration, "laser_point_m needs 3 numbers");
      laser = Vec3{lp[0], lp[1], lp[2]};
    }
    c.grid = make_scan_grid(get_or(g, "width_m", 2.0), get_or(g, "height_m", 2.0), get_or(g, "nx", 32),
                            get_or(g, "ny", 32), get_or(g, "confocal", true), laser);
  }
  c.bins = get_or(j, "bins", c.bins);
  c.bin_resolution_ps = get_or(j, "bin_resolution_ps", c.bin_resolution_ps);
  if (!j.contains("scene")) throw Error(ErrorKind::Configuration, "config needs a 'scene'");
  c.scene = parse_scene(j["scene"], c.scene_description);

  if (j.contains("pattern")) {
    const auto& p = j["pattern"];
    const auto kind = get_or<std::string>(p, "kind", "identity");
    if (kind == "identity") {
      c.pattern = PatternKind::Identity;
    } else if (kind == "stride") {
      c.pattern = PatternKind::Stride;
    } else if (kind == "crop") {
      c.pattern = PatternKind::Crop;
    } else {
      throw Error(ErrorKind::Configuration, "pattern kind must be identity|stride|crop");
    }
    c.stride = get_or(p, "stride", 1);
    c.crop_m = get_or(p, "crop_m", 0.0);
  }
  if (j.contains("noise")) {
    const auto& n = j["noise"];
    c.noise_enabled = get_or(n, "enabled", true);
    c.noise.jitter_fwhm_ps = get_or(n, "jitter_fwhm_ps", c.noise.jitter_fwhm_ps);
    c.noise.topk = get_or<std::size_t>(n, "topk", c.noise.topk);
    c.noise.photon_cap = get_or(n, "photon_cap", c.noise.photon_cap);
    if (n.contains("exposure")) c.noise.exposure = n["exposure"].get<double>();
    if (n.contains("background_ratio")) c.noise.background_ratio = n["background_ratio"].get<double>();
    if (get_or<std::string>(n, "topk_mode", "global") == "histogram-max") {
      c.noise.topk_mode = TopkMode::HistogramMaxima;
    }
    c.signal_gain = get_or(n, "signal_gain", c.signal_gain);
    c.noise.validate();
  }
  c.temporal_window = get_or(j, "temporal_window", 0);
  const auto enhancer = get_or<std::string>(j, "enhancer", "nearest");
  if (enhancer == "identity") {
    c.enhancer = BuiltinEnhancer::Identity;
  } else if (enhancer == "nearest") {
    c.enhancer = BuiltinEnhancer::Nearest;
  } else if (enhancer == "trilinear") {
    c.enhancer = BuiltinEnhancer::Trilinear;
  } else {
    c.enhancer_command = enhancer;
  }
  if (j.contains("target")) {
    const auto& t = j["target"];
    c.target_lambda_coeff = get_or(t, "lambda_coeff", c.target_lambda_coeff);
    if (t.contains("lambda_m")) c.target_lambda_m = t["lambda_m"].get<double>();
    if (t.contains("n_cycles")) c.n_cycles = t["n_cycles"].get<double>();
    c.gamma = get_or(t, "gamma", c.gamma);
  }
  if (j.contains("reconstruction")) {
    const auto& r = j["reconstruction"];
    c.nz = get_or(r, "nz", c.nz);
    c.z_near_m = get_or(r, "z_near_m", c.z_near_m);
    c.z_far_m = get_or(r, "z_far_m", c.z_far_m);
    c.doubling = get_or(r, "doubling", c.grid.confocal);
    c.pad_factor = get_or(r, "pad_factor", c.pad_factor);
    c.amplitude = parse_kernel_amplitude(get_or<std::string>(r, "kernel_amplitude", "inv_r"));
  } else {
    c.doubling = c.grid.confocal;
  }
  if (j.contains("metrics")) {
    c.depth_threshold = get_or(j["metrics"], "depth_threshold", c.depth_threshold);
    c.mask_kernel = get_or(j["metrics"], "mask_kernel", c.mask_kernel);
  }
  return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open config " + path);
  try {
    return parse_pipeline_config(ordered_json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("config is not valid JSON: ") + e.what());
  }
}

std::array<int, 3> argmax_voxel(const Array3<double>& volume) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < volume.size(); ++i) {
    if (volume.data()[i] > volume.data()[best]) best = i;
  }
  const std::size_t plane = volume.plane_size();
  return {static_cast<int>(best / plane), static_cast<int>((best % plane) / volume.dim(2)),
          static_cast<int>(best % volume.dim(2))};
}

int voxel_distance(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  int d = 0;
  for (int i = 0; i < 3; ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["psnr_db"] = r.psnr_db;
  j["ssim"] = r.ssim;
  j["rmse_depth"] = r.rmse_depth;
  j["psnr_db_foreground"] = r.psnr_db_foreground ? ordered_json(*r.psnr_db_foreground) : ordered_json(nullptr);
  j["rmse_depth_foreground"] =
      r.rmse_depth_foreground ? ordered_json(*r.rmse_depth_foreground) : ordered_json(nullptr);
  j["depth_units"] = "normalized";
  j["depth_threshold"] = r.depth_threshold;
  j["mask_kernel"] = r.mask_kernel;
  return j;
}

namespace {

const char* stage_name(int stage) {
  static const char* names[] = {"render", "subsample", "corrupt", "convolve", "enhance",
                                "aperture-field", "reconstruct", "evaluate"};
  return names[stage];
}

template <typename Fn>
auto stage(int index, Fn fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.kind(), std::string("stage ") + stage_name(index) + ": " + e.what());
  }
}

std::string pattern_name(PatternKind p) {
  switch (p) {
    case PatternKind::Identity: return "identity";
    case PatternKind::Stride: return "stride";
    case PatternKind::Crop: return "crop";
  }
  return "?";
}

std::string enhancer_name(const PipelineConfig& c) {
  if (!c.enhancer_command.empty()) return "external";
  switch (c.enhancer) {
    case BuiltinEnhancer::Identity: return "identity";
    case BuiltinEnhancer::Nearest: return "nearest";
    case BuiltinEnhancer::Trilinear: return "trilinear";
  }
  return "?";
}

}  // namespace

TransientVolume interpolate_to_grid(const TransientVolume& partial, const ScanGrid& full, BuiltinEnhancer method,
                                    int temporal_offset_bins, int bins) {
  TransientVolume v = partial;
  if (v.bins() != bins) v = temporal_uncrop(v, temporal_offset_bins, bins);
  if (!(v.grid.nx == full.nx && v.grid.ny == full.ny && v.grid.delta_p_m == full.delta_p_m)) {
    if (method == BuiltinEnhancer::Identity) {
      throw Error(ErrorKind::Configuration, "identity enhancer needs a full-resolution input");
    }
    const double ratio = v.grid.delta_p_m / full.delta_p_m;
    const int factor = static_cast<int>(std::lround(ratio));
    if (factor < 1 || std::abs(ratio - factor) > 1e-9 * ratio) {
      throw Error(ErrorKind::Shape, "input pitch is not an integer multiple of the target pitch");
    }
    if (factor > 1) {
      ScanGrid dense = v.grid;
      dense.nx *= factor;
      dense.ny *= factor;
      dense.delta_p_m = full.delta_p_m;
      v = method == BuiltinEnhancer::Nearest ? upsample_nearest(v, dense) : upsample_trilinear(v, dense);
    }
    if (v.grid.nx != full.nx || v.grid.ny != full.ny) v = zero_pad_aperture(v, full);
  }
  return normalize_max(std::move(v));
}

PipelineResult run_pipeline(const PipelineConfig& config, const PipelineOptions& options) {
  const ScanGrid& full = config.grid;
  const double lambda = config.target_lambda_m.value_or(config.target_lambda_coeff * full.delta_p_m);
  const double n_cycles = config.n_cycles.value_or(reference_calibration().n_cycles);
  const fs::path dir = options.out_dir;
  if (options.keep_intermediates) fs::create_directories(dir);
  auto keep = [&](const std::string& name, const NltObject& obj) {
    if (options.keep_intermediates) write_nlt((dir / name).string(), obj);
  };

  const IlluminationPacket target =
      stage(3, [&] { return illumination_packet(lambda, n_cycles, config.bins, config.bin_resolution_ps, config.gamma); });
  PropagationPlan plan = stage(6, [&] {
    return make_plan(full, config.z_near_m, config.z_far_m, config.nz, config.doubling, config.pad_factor,
                     config.amplitude);
  });
  plan.warm_cache(target.axis, target.band);

  const TransientVolume clean = stage(0, [&] { return render(config.scene, full, config.bins, config.bin_resolution_ps); });
  keep("clean.nlt", clean);
  const ReconVolume gt = stage(6, [&] { return propagate(aperture_field(spectrum(clean), target), plan); });
  keep("ground_truth.nlt", gt);

  TransientVolume partial = stage(1, [&] {
    TransientVolume v = clean;
    if (config.pattern == PatternKind::Crop) v = crop_aperture(v, config.crop_m);
    if (config.pattern != PatternKind::Identity && config.stride > 1) v = subsample_stride(v, config.stride);
    return v;
  });
  keep("partial.nlt", partial);

  NoiseDraw draw;
  if (config.noise_enabled) {
    partial = stage(2, [&] {
      TransientVolume scaled = partial;
      for (double& v : scaled.data.values()) v *= config.signal_gain;
      return corrupt(scaled, config.noise, options.seed, &draw);
    });
    keep("noisy.nlt", partial);
  }

  int temporal_offset = 0;
  if (config.temporal_window > 0) {
    auto crop = stage(1, [&] { return temporal_crop(partial, config.temporal_window); });
    partial = std::move(crop.volume);
    temporal_offset = crop.offset_bins;
  }

  PhasorField field;
  if (!config.enhancer_command.empty()) {
    field = stage(4, [&] {
      const fs::path work = options.keep_intermediates
                                ? dir
                                : fs::temp_directory_path() /
                                      ("nlos_enhance_" + std::to_string(::getpid()) + "_" + std::to_string(options.seed));
      fs::create_directories(work);
      const fs::path in = work / "enhancer_input.nlt";
      const fs::path out = work / "enhancer_output.nlt";
      ordered_json meta;
      meta["target"] = {{"lambda_m", target.lambda_m},
                        {"n_cycles", target.n_cycles},
                        {"gamma", target.gamma},
                        {"band_indices", target.band}};
      meta["full_grid"] = grid_to_json(full);
      meta["bins"] = config.bins;
      meta["temporal_offset_bins"] = temporal_offset;
      write_nlt(in.string(), NltFile{partial, meta});
      const std::string cmd = config.enhancer_command + " '" + in.string() + "' '" + out.string() + "'";
      if (std::system(cmd.c_str()) != 0) throw Error(ErrorKind::Configuration, "enhancer command failed: " + cmd);
      NltFile result = read_nlt(out.string());
      if (!options.keep_intermediates) fs::remove_all(work);
      auto* f = std::get_if<PhasorField>(&result.object);
      if (!f) throw Error(ErrorKind::Configuration, "enhancer must write a phasor file");
      if (f->band != target.band || f->grid.nx != full.nx || f->grid.ny != full.ny) {
        throw Error(ErrorKind::Shape, "enhancer output band or grid does not match the target packet");
      }
      f->axis = target.axis;
      f->grid = full;
      return std::move(*f);
    });
  } else {
    const TransientVolume enhanced = stage(4, [&] {
      return interpolate_to_grid(partial, full, config.enhancer, temporal_offset, config.bins);
    });
    keep("enhanced.nlt", enhanced);
    field = stage(5, [&] { return aperture_field(spectrum(enhanced), target); });
  }
  keep("aperture_field.nlt", field);

  const ReconVolume pred = stage(6, [&] { return propagate(field, plan); });
  keep("prediction.nlt", pred);

  const EvalReport eval = stage(7, [&] { return evaluate(pred.data, gt.data, config.depth_threshold, config.mask_kernel); });
  ordered_json report = report_to_json(eval);
  const auto gt_peak = argmax_voxel(gt.data);
  const auto pred_peak = argmax_voxel(pred.data);
  report["localization"] = {{"ground_truth_voxel", gt_peak},
                            {"prediction_voxel", pred_peak},
                            {"offset_voxels", voxel_distance(gt_peak, pred_peak)}};
  ordered_json prov;
  prov["seed"] = options.seed;
  prov["scene"] = config.scene_description;
  prov["scene_points"] = config.scene.points.size();
  prov["grid"] = grid_to_json(full);
  prov["bins"] = config.bins;
  prov["bin_resolution_ps"] = config.bin_resolution_ps;
  prov["pattern"] = {{"kind", pattern_name(config.pattern)},
                     {"stride", config.stride},
                     {"crop_m", config.crop_m},
                     {"stride_anchor", 0},
                     {"order", "crop-then-stride"}};
  prov["enhancer"] = enhancer_name(config);
  ordered_json noise = ordered_json::object();
  noise["enabled"] = config.noise_enabled;
  if (config.noise_enabled) {
    noise["eta"] = draw.eta;
    noise["exposure"] = draw.exposure;
    noise["background_ratio"] = draw.background_ratio;
    noise["background_level"] = draw.background_level;
    noise["jitter_fwhm_ps"] = config.noise.jitter_fwhm_ps;
    noise["signal_gain"] = config.signal_gain;
  }
  prov["noise"] = noise;
  prov["temporal_window"] = config.temporal_window;
  prov["temporal_offset_bins"] = temporal_offset;
  const auto& cal = reference_calibration();
  prov["target_packet"] = {{"lambda_m", target.lambda_m},
                           {"n_cycles", target.n_cycles},
                           {"sigma_s", target.sigma_s},
                           {"gamma", target.gamma},
                           {"center_index", target.center_index},
                           {"band_size", target.band.size()},
                           {"band_first", target.band.front()},
                           {"band_last", target.band.back()}};
  prov["calibration"] = {{"lambda_m", cal.lambda_m}, {"T", cal.T},        {"bin_resolution_ps", cal.bin_resolution_ps},
                         {"gamma", cal.gamma},       {"target_count", cal.target_count},
                         {"sigma_s", cal.sigma_s},   {"n_cycles", cal.n_cycles}};
  prov["reconstruction"] = {{"nz", config.nz},
                            {"z_near_m", config.z_near_m},
                            {"z_far_m", config.z_far_m},
                            {"doubling", config.doubling},
                            {"pad_factor", config.pad_factor},
                            {"kernel_amplitude", to_string(config.amplitude)},
                            {"doubled_amplitude", "inv_r"},
                            {"t0_s", 0.0}};
  report["provenance"] = prov;

  if (options.keep_intermediates) {
    std::ofstream((dir / "report.json").string()) << report.dump(2) << '\n';
  }
  return {std::move(report), gt, pred};
}

}  // namespace nlos
