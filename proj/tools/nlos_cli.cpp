// nlos: command-line front end for rendering, corruption, sampling,
// phasor-field reconstruction and evaluation. Every subcommand maps input
// files, flags and a seed to output files deterministically.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "nlos/metrics.hpp"
#include "nlos/nlt_io.hpp"
#include "nlos/phasor.hpp"
#include "nlos/pipeline.hpp"
#include "nlos/render.hpp"
#include "nlos/rsd.hpp"
#include "nlos/sampling.hpp"
#include "nlos/spad_noise.hpp"

using namespace nlos;
using nlohmann::ordered_json;

namespace {

std::vector<double> parse_list(const std::string& text, std::size_t expected_min, std::size_t expected_max,
                               const char* what) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      values.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Configuration, std::string(what) + ": '" + item + "' is not a number");
    }
  }
  if (values.size() < expected_min || values.size() > expected_max) {
    throw Error(ErrorKind::Configuration, std::string(what) + ": wrong number of values in '" + text + "'");
  }
  return values;
}

template <typename T>
T expect(NltFile file, const std::string& path) {
  if (auto* v = std::get_if<T>(&file.object)) return std::move(*v);
  throw Error(ErrorKind::Format, path + " holds a '" + kind_name(file.object) + "' object of the wrong kind");
}

struct ReconstructArgs {
  std::string input;
  std::string output;
  std::string depths = "0,2,32";
  std::string volume_dims;
  std::optional<bool> doubling;
  std::string amplitude = "inv_r";
  int pad_factor = 2;
  std::optional<double> lambda_m;
  double lambda_coeff = 3.0;
  std::optional<double> n_cycles;
  double gamma = 0.1;
  double budget = kDefaultDirectBudget;
};

void add_reconstruct_flags(CLI::App* cmd, ReconstructArgs& a) {
  cmd->add_option("-i,--input", a.input, "phasor or transient .nlt")->required();
  cmd->add_option("-o,--output", a.output, "volume .nlt")->required();
  cmd->add_option("--depths", a.depths, "near,far,nz in meters");
  cmd->add_option("--volume-dims", a.volume_dims, "nz or nz,ny,nx (lateral dims must match the aperture)");
  cmd->add_flag("--doubling,!--no-doubling", a.doubling, "two-way (confocal) kernel distance");
  cmd->add_option("--kernel-amplitude", a.amplitude, "inv_r | unit");
  cmd->add_option("--pad-factor", a.pad_factor, "lateral zero-padding factor (>= 2)");
  cmd->add_option("--lambda-m", a.lambda_m, "target wavelength for transient input");
  cmd->add_option("--lambda-coeff", a.lambda_coeff, "target wavelength in units of delta_p");
  cmd->add_option("--n-cycles", a.n_cycles, "packet width in carrier cycles (default: calibrated)");
  cmd->add_option("--gamma", a.gamma, "peak ratio threshold");
}

int run_reconstruct(const ReconstructArgs& a, bool direct) {
  NltFile file = read_nlt(a.input);
  PhasorField field;
  ordered_json meta;
  if (auto* t = std::get_if<TransientVolume>(&file.object)) {
    const double lambda = a.lambda_m.value_or(a.lambda_coeff * t->grid.delta_p_m);
    const double cycles = a.n_cycles.value_or(reference_calibration().n_cycles);
    const auto packet = illumination_packet(lambda, cycles, t->bins(), t->bin_resolution_ps, a.gamma);
    field = aperture_field(spectrum(*t), packet);
    meta["lambda_m"] = lambda;
    meta["n_cycles"] = cycles;
    meta["sigma_s"] = packet.sigma_s;
  } else {
    field = expect<PhasorField>(std::move(file), a.input);
  }
  const auto range = parse_list(a.depths, 3, 3, "--depths");
  int nz = static_cast<int>(range[2]);
  if (!a.volume_dims.empty()) {
    const auto dims = parse_list(a.volume_dims, 1, 3, "--volume-dims");
    nz = static_cast<int>(dims[0]);
    if (dims.size() == 3 && (static_cast<int>(dims[1]) != field.grid.ny || static_cast<int>(dims[2]) != field.grid.nx)) {
      throw Error(ErrorKind::Shape, "--volume-dims lateral size must equal the aperture grid");
    }
  }
  const bool doubling = a.doubling.value_or(field.grid.confocal);
  const PropagationPlan plan = make_plan(field.grid, range[0], range[1], nz, doubling, a.pad_factor,
                                         parse_kernel_amplitude(a.amplitude));
  ReconVolume vol = direct ? propagate_direct(field, plan, a.budget) : propagate(field, plan);
  meta["method"] = direct ? "direct-sum" : "fft";
  meta["doubling"] = doubling;
  meta["doubled_amplitude"] = "inv_r";
  meta["kernel_amplitude"] = a.amplitude;
  meta["band_size"] = field.band.size();
  write_nlt(a.output, NltFile{std::move(vol), meta});
  return 0;
}

ReconVolume as_image_volume(const Image& img, const ReconVolume& like) {
  ReconVolume out = like;
  out.data = Array3<double>(1, img.ny, img.nx);
  std::copy(img.pixels.begin(), img.pixels.end(), out.data.data());
  out.depths_m = {};
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Non-line-of-sight transient simulation and phasor-field reconstruction"};
  app.require_subcommand(1);

  // render
  std::string scene_path, shape, augment = "train", out_path, laser;
  std::uint64_t seed = 0;
  double width = 2.0, height = 2.0, bin_ps = 32.0;
  int nx = 64, ny = 64, bins = 512;
  bool nonconfocal = false, no_wall_cos = false, no_obj_cos = false;
  auto* render_cmd = app.add_subcommand("render", "render a clean transient volume");
  auto* scene_opt = render_cmd->add_option("--scene", scene_path, "scene text file (x y z albedo [nx ny nz])");
  render_cmd->add_option("--shape", shape, "procedural shape: plane|box|sphere|letter")->excludes(scene_opt);
  render_cmd->add_option("--augment", augment, "train|validation|identity");
  render_cmd->add_option("--seed", seed, "shape sampling seed");
  render_cmd->add_option("--width", width);
  render_cmd->add_option("--height", height);
  render_cmd->add_option("--nx", nx);
  render_cmd->add_option("--ny", ny);
  render_cmd->add_option("--bins", bins);
  render_cmd->add_option("--bin-ps", bin_ps);
  render_cmd->add_flag("--nonconfocal", nonconfocal);
  render_cmd->add_option("--laser", laser, "x,y,z laser point for non-confocal scans");
  render_cmd->add_flag("--no-wall-cosine", no_wall_cos);
  render_cmd->add_flag("--no-object-cosine", no_obj_cos);
  render_cmd->add_option("-o,--output", out_path)->required();

  // corrupt
  std::string in_path;
  std::optional<double> exposure, background;
  double jitter = 64.0, photon_cap = 100.0, gain = 1.0;
  std::size_t topk = 10000;
  std::string topk_mode = "global";
  auto* corrupt_cmd = app.add_subcommand("corrupt", "apply the SPAD noise model");
  corrupt_cmd->add_option("-i,--input", in_path)->required();
  corrupt_cmd->add_option("-o,--output", out_path)->required();
  corrupt_cmd->add_option("--seed", seed);
  corrupt_cmd->add_option("--exposure", exposure, "fixed exposure c (default: uniform in [0.1, 1])");
  corrupt_cmd->add_option("--background", background, "fixed background ratio (default: uniform in [0.1, 0.2])");
  corrupt_cmd->add_option("--jitter-fwhm-ps", jitter);
  corrupt_cmd->add_option("--topk", topk);
  corrupt_cmd->add_option("--photon-cap", photon_cap);
  corrupt_cmd->add_option("--topk-mode", topk_mode, "global | histogram-max");
  corrupt_cmd->add_option("--gain", gain, "scale applied to the input before corruption");

  // subsample
  int stride = 1, temporal_window = 0;
  std::optional<double> crop_m, pad_to;
  auto* sub_cmd = app.add_subcommand("subsample", "crop, stride, pad and temporally crop a scan");
  sub_cmd->add_option("-i,--input", in_path)->required();
  sub_cmd->add_option("-o,--output", out_path)->required();
  sub_cmd->add_option("--stride", stride);
  sub_cmd->add_option("--crop-m", crop_m, "centered square crop extent in meters (applied before stride)");
  sub_cmd->add_option("--pad-to", pad_to, "zero-pad to a centered square aperture of this extent");
  sub_cmd->add_option("--temporal-window", temporal_window, "keep the max-photon window of this many bins");

  // filter
  std::optional<double> omega_lo, omega_hi;
  std::optional<int> index_lo, index_hi;
  auto* filter_cmd = app.add_subcommand("filter", "band-pass a transient along time");
  filter_cmd->add_option("-i,--input", in_path)->required();
  filter_cmd->add_option("-o,--output", out_path)->required();
  filter_cmd->add_option("--omega-lo", omega_lo, "rad/s");
  filter_cmd->add_option("--omega-hi", omega_hi, "rad/s");
  filter_cmd->add_option("--index-lo", index_lo, "DFT index (inclusive)");
  filter_cmd->add_option("--index-hi", index_hi, "DFT index (exclusive)");

  ReconstructArgs rargs;
  auto* recon_cmd = app.add_subcommand("reconstruct", "FFT-based RSD propagation");
  add_reconstruct_flags(recon_cmd, rargs);
  ReconstructArgs oargs;
  auto* oracle_cmd = app.add_subcommand("oracle", "direct-summation RSD propagation");
  add_reconstruct_flags(oracle_cmd, oargs);
  oracle_cmd->add_option("--budget", oargs.budget, "maximum kernel evaluations");

  // project
  std::string depth_out;
  double threshold = 0.1;
  auto* project_cmd = app.add_subcommand("project", "maximum intensity projection and depth map");
  project_cmd->add_option("-i,--input", in_path)->required();
  project_cmd->add_option("-o,--output", out_path)->required();
  project_cmd->add_option("--depth-out", depth_out);
  project_cmd->add_option("--threshold", threshold);

  // evaluate
  std::string pred_path, gt_path, report_path;
  int mask_kernel = 5;
  auto* eval_cmd = app.add_subcommand("evaluate", "compare a reconstruction against ground truth");
  eval_cmd->add_option("--pred", pred_path)->required();
  eval_cmd->add_option("--gt", gt_path)->required();
  eval_cmd->add_option("-o,--output", report_path, "report path (default stdout)");
  eval_cmd->add_option("--threshold", threshold);
  eval_cmd->add_option("--mask-kernel", mask_kernel);

  // pipeline
  std::string config_path, out_dir = ".", enhancer;
  bool keep = false;
  auto* pipe_cmd = app.add_subcommand("pipeline", "end-to-end partial-scan evaluation");
  pipe_cmd->add_option("--config", config_path)->required();
  pipe_cmd->add_option("--seed", seed);
  pipe_cmd->add_flag("--keep-intermediates", keep);
  pipe_cmd->add_option("--out-dir", out_dir);
  pipe_cmd->add_option("--enhancer", enhancer, "external enhancer command (reads transient, writes phasor)");
  pipe_cmd->add_option("-o,--output", report_path, "report path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*render_cmd) {
      std::optional<Vec3> laser_point;
      if (!laser.empty()) {
        const auto v = parse_list(laser, 3, 3, "--laser");
        laser_point = Vec3{v[0], v[1], v[2]};
      }
      const ScanGrid grid = make_scan_grid(width, height, nx, ny, !nonconfocal, laser_point);
      Scene scene;
      ordered_json meta;
      if (!scene_path.empty()) {
        scene = read_scene_file(scene_path);
        meta["scene"] = scene_path;
      } else if (!shape.empty()) {
        std::mt19937_64 rng(seed);
        const AugmentParams params = augment == "validation" ? AugmentParams::validation()
                                     : augment == "identity" ? AugmentParams::identity()
                                                             : AugmentParams::training();
        scene = sample_scene(rng, parse_base_shape(shape), params);
        meta["scene"] = shape;
        meta["seed"] = seed;
        meta["augment"] = augment;
      } else {
        throw Error(ErrorKind::MissingParameter, "render needs --scene or --shape");
      }
      RenderOptions opts;
      opts.wall_cosine = !no_wall_cos;
      opts.object_cosine = !no_obj_cos;
      meta["wall_cosine"] = opts.wall_cosine;
      meta["object_cosine"] = opts.object_cosine;
      write_nlt(out_path, NltFile{render(scene, grid, bins, bin_ps, opts), meta});
    } else if (*corrupt_cmd) {
      auto volume = expect<TransientVolume>(read_nlt(in_path), in_path);
      if (gain != 1.0) {
        for (double& v : volume.data.values()) v *= gain;
      }
      NoiseParams params;
      params.jitter_fwhm_ps = jitter;
      params.topk = topk;
      params.photon_cap = photon_cap;
      params.exposure = exposure;
      params.background_ratio = background;
      params.topk_mode = topk_mode == "histogram-max" ? TopkMode::HistogramMaxima : TopkMode::GlobalBins;
      NoiseDraw draw;
      auto noisy = corrupt(volume, params, seed, &draw);
      ordered_json meta{{"seed", seed},
                        {"eta", draw.eta},
                        {"exposure", draw.exposure},
                        {"background_ratio", draw.background_ratio},
                        {"background_level", draw.background_level},
                        {"jitter_fwhm_ps", jitter},
                        {"topk_mode", topk_mode}};
      write_nlt(out_path, NltFile{std::move(noisy), meta});
    } else if (*sub_cmd) {
      auto volume = expect<TransientVolume>(read_nlt(in_path), in_path);
      ordered_json meta{{"stride", stride}, {"stride_anchor", 0}, {"order", "crop-then-stride"}};
      if (crop_m) volume = crop_aperture(volume, *crop_m);
      volume = subsample_stride(volume, stride);
      if (pad_to) volume = zero_pad_aperture(volume, padded_grid(volume.grid, *pad_to, *pad_to));
      if (temporal_window > 0) {
        auto crop = temporal_crop(volume, temporal_window);
        volume = std::move(crop.volume);
        meta["temporal_offset_bins"] = crop.offset_bins;
      }
      write_nlt(out_path, NltFile{std::move(volume), meta});
    } else if (*filter_cmd) {
      auto volume = expect<TransientVolume>(read_nlt(in_path), in_path);
      const double step = frequency_axis(volume.bins(), volume.bin_resolution_ps).step();
      const double lo = index_lo ? *index_lo * step : omega_lo.value_or(0.0);
      const double hi = index_hi ? *index_hi * step : omega_hi.value_or(std::numeric_limits<double>::infinity());
      write_nlt(out_path, NltFile{bandpass_filter(volume, lo, hi), ordered_json{{"omega_lo", lo}, {"omega_hi", hi}}});
    } else if (*recon_cmd) {
      return run_reconstruct(rargs, false);
    } else if (*oracle_cmd) {
      return run_reconstruct(oargs, true);
    } else if (*project_cmd) {
      const auto vol = expect<ReconVolume>(read_nlt(in_path), in_path);
      write_nlt(out_path, NltFile{as_image_volume(max_intensity_projection(vol.data), vol),
                                  ordered_json{{"projection", "max-intensity"}}});
      if (!depth_out.empty()) {
        write_nlt(depth_out, NltFile{as_image_volume(depth_map(vol.data, threshold), vol),
                                     ordered_json{{"projection", "depth"}, {"threshold", threshold}}});
      }
    } else if (*eval_cmd) {
      const auto pred = expect<ReconVolume>(read_nlt(pred_path), pred_path);
      const auto gt = expect<ReconVolume>(read_nlt(gt_path), gt_path);
      ordered_json report = report_to_json(evaluate(pred.data, gt.data, threshold, mask_kernel));
      report["provenance"] = {{"pred", pred_path}, {"gt", gt_path}};
      if (report_path.empty()) {
        std::cout << report.dump(2) << '\n';
      } else {
        std::ofstream(report_path) << report.dump(2) << '\n';
      }
    } else if (*pipe_cmd) {
      PipelineConfig config = load_pipeline_config(config_path);
      if (!enhancer.empty()) config.enhancer_command = enhancer;
      PipelineOptions opts;
      opts.seed = seed;
      opts.keep_intermediates = keep;
      opts.out_dir = out_dir;
      const auto result = run_pipeline(config, opts);
      if (report_path.empty()) {
        std::cout << result.report.dump(2) << '\n';
      } else {
        std::ofstream(report_path) << result.report.dump(2) << '\n';
      }
    }
  } catch (const Error& e) {
    std::cerr << "nlos: " << to_string(e.kind()) << " error: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "nlos: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
