#include "nlos/nlt_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace nlos {

using nlohmann::ordered_json;

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::vector<std::uint8_t>& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

double get_f32(const std::uint8_t* p) { return std::bit_cast<float>(get_u32(p)); }

template <typename T>
T required(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::Format, std::string("header is missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("header field '") + key + "': " + e.what());
  }
}

}  // namespace

ordered_json grid_to_json(const ScanGrid& grid) {
  ordered_json g;
  g["width_m"] = grid.width_m;
  g["height_m"] = grid.height_m;
  g["nx"] = grid.nx;
  g["ny"] = grid.ny;
  g["confocal"] = grid.confocal;
  if (grid.laser_point_m) {
    g["laser_point_m"] = {grid.laser_point_m->x, grid.laser_point_m->y, grid.laser_point_m->z};
  }
  g["delta_p_m"] = grid.delta_p_m;
  g["origin_m"] = {grid.x0_m, grid.y0_m};
  return g;
}

ScanGrid grid_from_json(const ordered_json& j) {
  ScanGrid g;
  g.width_m = required<double>(j, "width_m");
  g.height_m = required<double>(j, "height_m");
  g.nx = required<int>(j, "nx");
  g.ny = required<int>(j, "ny");
  g.confocal = required<bool>(j, "confocal");
  if (g.nx < 1 || g.ny < 1 || !(g.width_m > 0.0) || !(g.height_m > 0.0)) {
    throw Error(ErrorKind::Format, "header grid has non-positive extents");
  }
  g.delta_p_m = j.contains("delta_p_m") ? j["delta_p_m"].get<double>() : g.width_m / g.nx;
  if (j.contains("laser_point_m")) {
    const auto lp = j["laser_point_m"].get<std::vector<double>>();
    if (lp.size() != 3) throw Error(ErrorKind::Format, "laser_point_m needs three coordinates");
    g.laser_point_m = Vec3{lp[0], lp[1], lp[2]};
  }
  if (j.contains("origin_m")) {
    const auto o = j["origin_m"].get<std::vector<double>>();
    if (o.size() != 2) throw Error(ErrorKind::Format, "origin_m needs two coordinates");
    g.x0_m = o[0];
    g.y0_m = o[1];
  } else {
    g.x0_m = -0.5 * g.width_m + 0.5 * g.delta_p_m;
    g.y0_m = -0.5 * g.height_m + 0.5 * g.delta_p_m;
  }
  return g;
}

const char* kind_name(const NltObject& object) {
  switch (object.index()) {
    case 0: return "transient";
    case 1: return "phasor";
    default: return "volume";
  }
}

std::vector<std::uint8_t> encode_nlt(const NltFile& file) {
  ordered_json h;
  std::vector<std::uint8_t> payload;
  std::visit(
      [&](const auto& obj) {
        using T = std::decay_t<decltype(obj)>;
        if constexpr (std::is_same_v<T, PhasorField>) {
          const auto& d = obj.values.dims();
          h["dims"] = {d[0], d[1], d[2]};
          h["dtype"] = "c64";
          h["kind"] = "phasor";
          h["bin_resolution_ps"] = obj.axis.bin_resolution_ps;
          h["T"] = obj.axis.T;
          h["grid"] = grid_to_json(obj.grid);
          h["band_indices"] = obj.band;
          h["lambda_m"] = obj.lambda_m;
          payload.reserve(obj.values.size() * 8);
          for (const cd& v : obj.values.values()) {
            put_f32(payload, v.real());
            put_f32(payload, v.imag());
          }
        } else {
          const auto& d = obj.data.dims();
          h["dims"] = {d[0], d[1], d[2]};
          h["dtype"] = "f32";
          if constexpr (std::is_same_v<T, TransientVolume>) {
            h["kind"] = "transient";
            h["bin_resolution_ps"] = obj.bin_resolution_ps;
            h["grid"] = grid_to_json(obj.grid);
            h["t0_offset_bins"] = obj.t0_offset_bins;
          } else {
            h["kind"] = "volume";
            h["grid"] = grid_to_json(obj.grid);
            h["depths_m"] = obj.depths_m;
            h["z_near_m"] = obj.z_near_m;
            h["z_far_m"] = obj.z_far_m;
            h["pitch_m"] = {obj.pitch_z_m, obj.pitch_y_m, obj.pitch_x_m};
          }
          payload.reserve(obj.data.size() * 4);
          for (double v : obj.data.values()) put_f32(payload, v);
        }
      },
      file.object);
  if (!file.metadata.empty()) h["extra"] = file.metadata;

  const std::string header = h.dump();
  std::vector<std::uint8_t> out(kNltMagic, kNltMagic + 4);
  put_u32(out, kNltVersion);
  put_u32(out, static_cast<std::uint32_t>(header.size()));
  out.insert(out.end(), header.begin(), header.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

NltFile decode_nlt(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kNltMagic, 4) != 0) {
    throw Error(ErrorKind::Format, "not an NLTV container (bad magic)");
  }
  if (bytes.size() < 12) throw Error(ErrorKind::Integrity, "truncated preamble");
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kNltVersion) {
    throw Error(ErrorKind::Format, "unsupported NLTV version " + std::to_string(version) + " (supported: " +
                                       std::to_string(kNltVersion) + ")");
  }
  const std::uint32_t header_len = get_u32(bytes.data() + 8);
  if (bytes.size() < 12 + static_cast<std::size_t>(header_len)) {
    throw Error(ErrorKind::Integrity, "truncated header");
  }
  ordered_json h;
  try {
    h = ordered_json::parse(bytes.begin() + 12, bytes.begin() + 12 + header_len);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Format, std::string("header is not valid JSON: ") + e.what());
  }
  const auto dims = required<std::vector<std::size_t>>(h, "dims");
  if (dims.size() != 3) throw Error(ErrorKind::Format, "dims must have three entries");
  const auto dtype = required<std::string>(h, "dtype");
  const auto kind = required<std::string>(h, "kind");
  const std::size_t width = dtype == "f32" ? 4 : dtype == "c64" ? 8 : 0;
  if (width == 0) throw Error(ErrorKind::Format, "unknown dtype '" + dtype + "'");
  const std::size_t count = dims[0] * dims[1] * dims[2];
  const std::size_t payload_len = bytes.size() - 12 - header_len;
  if (payload_len != count * width) {
    throw Error(ErrorKind::Integrity, "payload has " + std::to_string(payload_len) + " bytes, dims declare " +
                                          std::to_string(count * width));
  }
  const std::uint8_t* p = bytes.data() + 12 + header_len;

  NltFile file;
  if (h.contains("extra")) file.metadata = h["extra"];
  const ScanGrid grid = grid_from_json(required<ordered_json>(h, "grid"));
  if (dims[1] != static_cast<std::size_t>(grid.ny) || dims[2] != static_cast<std::size_t>(grid.nx)) {
    throw Error(ErrorKind::Integrity, "dims do not match the header grid");
  }
  if (kind == "phasor") {
    if (dtype != "c64") throw Error(ErrorKind::Format, "phasor payload must be c64");
    PhasorField f;
    f.axis = frequency_axis(required<int>(h, "T"), required<double>(h, "bin_resolution_ps"));
    f.grid = grid;
    f.band = required<std::vector<int>>(h, "band_indices");
    f.lambda_m = h.value("lambda_m", 0.0);
    if (f.band.size() != dims[0]) throw Error(ErrorKind::Integrity, "band_indices length differs from dims[0]");
    f.values = Array3<cd>(dims[0], dims[1], dims[2]);
    for (std::size_t i = 0; i < count; ++i) f.values.data()[i] = cd(get_f32(p + 8 * i), get_f32(p + 8 * i + 4));
    file.object = std::move(f);
  } else if (kind == "transient" || kind == "volume") {
    if (dtype != "f32") throw Error(ErrorKind::Format, kind + " payload must be f32");
    Array3<double> data(dims[0], dims[1], dims[2]);
    for (std::size_t i = 0; i < count; ++i) data.data()[i] = get_f32(p + 4 * i);
    if (kind == "transient") {
      TransientVolume v;
      v.data = std::move(data);
      v.bin_resolution_ps = required<double>(h, "bin_resolution_ps");
      v.t0_offset_bins = h.value("t0_offset_bins", 0);
      v.grid = grid;
      file.object = std::move(v);
    } else {
      ReconVolume v;
      v.data = std::move(data);
      v.grid = grid;
      v.depths_m = h.value("depths_m", std::vector<double>{});
      v.z_near_m = h.value("z_near_m", 0.0);
      v.z_far_m = h.value("z_far_m", 0.0);
      const auto pitch = h.value("pitch_m", std::vector<double>{0.0, grid.delta_p_m, grid.delta_p_m});
      if (pitch.size() != 3) throw Error(ErrorKind::Format, "pitch_m needs three entries");
      v.pitch_z_m = pitch[0];
      v.pitch_y_m = pitch[1];
      v.pitch_x_m = pitch[2];
      file.object = std::move(v);
    }
  } else {
    throw Error(ErrorKind::Format, "unknown kind '" + kind + "'");
  }
  return file;
}

void write_nlt(const std::string& path, const NltFile& file) {
  const auto bytes = encode_nlt(file);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "write failed for " + path);
}

NltFile read_nlt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_nlt(bytes);
}

}  // namespace nlos
