// Minimal external enhancer for the subprocess hook:
//   enhancer_stub <in.nlt> <out.nlt>
// Reads the partial transient, upsamples it with nearest interpolation and
// writes the target-band aperture field.

#include <iostream>

#include "nlos/nlt_io.hpp"
#include "nlos/phasor.hpp"
#include "nlos/pipeline.hpp"

using namespace nlos;

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: enhancer_stub <in.nlt> <out.nlt>\n";
    return 2;
  }
  try {
    const NltFile in = read_nlt(argv[1]);
    const auto& partial = std::get<TransientVolume>(in.object);
    const auto& meta = in.metadata;
    const ScanGrid full = grid_from_json(meta.at("full_grid"));
    const int bins = meta.at("bins").get<int>();
    const auto dense = interpolate_to_grid(partial, full, BuiltinEnhancer::Nearest,
                                           meta.at("temporal_offset_bins").get<int>(), bins);
    const auto& t = meta.at("target");
    const auto packet = illumination_packet(t.at("lambda_m").get<double>(), t.at("n_cycles").get<double>(), bins,
                                            partial.bin_resolution_ps, t.at("gamma").get<double>());
    write_nlt(argv[2], NltFile{aperture_field(spectrum(dense), packet)});
  } catch (const std::exception& e) {
    std::cerr << "enhancer_stub: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
