#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "nlos/core.hpp"
#include "nlos/phasor.hpp"

namespace nlos {

// Container layout (little-endian):
//   "NLTV" | u32 version | u32 header length | UTF-8 JSON header | payload
// The payload is f32 (transient, volume) or interleaved f32 re/im pairs
// (phasor) in declared dim-major order.
inline constexpr char kNltMagic[4] = {'N', 'L', 'T', 'V'};
inline constexpr std::uint32_t kNltVersion = 1;

using NltObject = std::variant<TransientVolume, PhasorField, ReconVolume>;

struct NltFile {
  NltObject object;
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();  // "extra" header block
};

std::vector<std::uint8_t> encode_nlt(const NltFile& file);
NltFile decode_nlt(const std::vector<std::uint8_t>& bytes);

void write_nlt(const std::string& path, const NltFile& file);
inline void write_nlt(const std::string& path, const NltObject& object) { write_nlt(path, NltFile{object}); }
NltFile read_nlt(const std::string& path);

const char* kind_name(const NltObject& object);

nlohmann::ordered_json grid_to_json(const ScanGrid& grid);
ScanGrid grid_from_json(const nlohmann::ordered_json& j);

}  // namespace nlos
