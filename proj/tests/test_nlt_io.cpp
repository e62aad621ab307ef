#include <doctest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <random>

#include "nlos/nlt_io.hpp"
#include "test_util.hpp"

using namespace nlos;
using nlos::test::error_kind;
using nlohmann::ordered_json;

namespace {

float rand_float(std::mt19937_64& rng) { return std::uniform_real_distribution<float>(0.0f, 10.0f)(rng); }

TransientVolume random_transient(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto v = make_transient(make_scan_grid(2.0, 1.0, 6, 3, false, Vec3{0.1, 0.2, 0.0}), 10, 16.0);
  v.t0_offset_bins = -3;
  for (double& x : v.data.values()) x = rand_float(rng);
  return v;
}

std::uint32_t read_u32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return b[at] | (b[at + 1] << 8) | (b[at + 2] << 16) | (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

}  // namespace

TEST_CASE("transient round trip") {
  const auto v = random_transient(1);
  const ordered_json meta{{"seed", 7}, {"note", "x"}};
  const auto bytes = encode_nlt(NltFile{v, meta});
  const auto back = decode_nlt(bytes);
  const auto& t = std::get<TransientVolume>(back.object);
  CHECK(t.data == v.data);
  CHECK(t.grid == v.grid);
  CHECK(t.bin_resolution_ps == 16.0);
  CHECK(t.t0_offset_bins == -3);
  CHECK(back.metadata == meta);
  CHECK(encode_nlt(back) == bytes);
}

TEST_CASE("container layout") {
  const auto v = random_transient(2);
  const auto bytes = encode_nlt(NltFile{v});
  CHECK(std::memcmp(bytes.data(), "NLTV", 4) == 0);
  CHECK(read_u32(bytes, 4) == 1);
  const std::uint32_t hlen = read_u32(bytes, 8);
  const auto header = ordered_json::parse(bytes.begin() + 12, bytes.begin() + 12 + hlen);
  CHECK(header["kind"] == "transient");
  CHECK(header["dtype"] == "f32");
  CHECK(header["dims"] == ordered_json::array({10, 3, 6}));
  CHECK(bytes.size() == 12 + hlen + 10 * 3 * 6 * 4);
  // Element (t=4, y=2, x=5), little-endian f32.
  const std::size_t at = 12 + hlen + 4 * ((4 * 3 + 2) * 6 + 5);
  const std::uint32_t raw = read_u32(bytes, at);
  CHECK(std::bit_cast<float>(raw) == static_cast<float>(v.data(4, 2, 5)));
}

TEST_CASE("phasor and volume round trips") {
  std::mt19937_64 rng(3);
  PhasorField f;
  f.grid = make_scan_grid(2.0, 2.0, 4, 4, true);
  f.axis = frequency_axis(512, 32.0);
  f.band = {50, 51, 52};
  f.lambda_m = 0.1875;
  f.values = Array3<cd>(3, 4, 4);
  for (cd& x : f.values.values()) x = cd(rand_float(rng), -rand_float(rng));
  const auto fb = encode_nlt(NltFile{f});
  const auto fr = std::get<PhasorField>(decode_nlt(fb).object);
  CHECK(fr.values == f.values);
  CHECK(fr.band == f.band);
  CHECK(fr.axis == f.axis);
  CHECK(fr.lambda_m == f.lambda_m);
  CHECK(encode_nlt(NltFile{fr}) == fb);

  ReconVolume r;
  r.grid = f.grid;
  r.data = Array3<double>(4, 4, 4);
  for (double& x : r.data.values()) x = rand_float(rng);
  r.depths_m = depth_planes(0.0, 2.0, 4);
  r.z_near_m = 0.0;
  r.z_far_m = 2.0;
  r.pitch_x_m = r.pitch_y_m = 0.5;
  r.pitch_z_m = 0.5;
  const auto rb = encode_nlt(NltFile{r});
  const auto rr = std::get<ReconVolume>(decode_nlt(rb).object);
  CHECK(rr.data == r.data);
  CHECK(rr.depths_m == r.depths_m);
  CHECK(rr.pitch_z_m == 0.5);
  CHECK(encode_nlt(NltFile{rr}) == rb);
}

TEST_CASE("file round trip") {
  const auto path = (std::filesystem::temp_directory_path() / "nlos_test_roundtrip.nlt").string();
  const auto v = random_transient(4);
  write_nlt(path, v);
  const auto back = read_nlt(path);
  CHECK(std::get<TransientVolume>(back.object).data == v.data);
  std::filesystem::remove(path);
  CHECK(error_kind([&] { read_nlt(path); }) == ErrorKind::Io);
}

TEST_CASE("malformed containers") {
  auto small = make_transient(make_scan_grid(2.0, 2.0, 2, 2, true), 2, 32.0);
  const auto good = encode_nlt(NltFile{small});

  auto short_payload = good;
  short_payload.resize(good.size() - 4);  // 7 floats for dims [2, 2, 2]
  CHECK(error_kind([&] { decode_nlt(short_payload); }) == ErrorKind::Integrity);

  auto long_payload = good;
  long_payload.push_back(0);
  CHECK(error_kind([&] { decode_nlt(long_payload); }) == ErrorKind::Integrity);

  auto bad_magic = good;
  bad_magic[0] = 'X';
  CHECK(error_kind([&] { decode_nlt(bad_magic); }) == ErrorKind::Format);

  auto bumped = good;
  bumped[4] = 2;
  try {
    decode_nlt(bumped);
    FAIL("expected a format error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Format);
    CHECK(std::string(e.what()).find("supported") != std::string::npos);
    CHECK(std::string(e.what()).find('1') != std::string::npos);
  }

  std::vector<std::uint8_t> truncated(good.begin(), good.begin() + 20);
  CHECK(error_kind([&] { decode_nlt(truncated); }) == ErrorKind::Integrity);
  CHECK(error_kind([&] { decode_nlt(std::vector<std::uint8_t>(good.begin(), good.begin() + 6)); }) == ErrorKind::Integrity);

  // Dims that disagree with the grid.
  const std::uint32_t hlen = read_u32(good, 8);
  auto header = ordered_json::parse(good.begin() + 12, good.begin() + 12 + hlen);
  header["dims"] = {2, 1, 4};
  const std::string text = header.dump();
  std::vector<std::uint8_t> edited(good.begin(), good.begin() + 8);
  const auto n = static_cast<std::uint32_t>(text.size());
  for (int i = 0; i < 4; ++i) edited.push_back(static_cast<std::uint8_t>(n >> (8 * i)));
  edited.insert(edited.end(), text.begin(), text.end());
  edited.insert(edited.end(), good.begin() + 12 + hlen, good.end());
  CHECK(error_kind([&] { decode_nlt(edited); }) == ErrorKind::Integrity);

  header["dims"] = {2, 2, 2};
  header["kind"] = "mystery";
  const std::string text2 = header.dump();
  std::vector<std::uint8_t> edited2(good.begin(), good.begin() + 8);
  const auto n2 = static_cast<std::uint32_t>(text2.size());
  for (int i = 0; i < 4; ++i) edited2.push_back(static_cast<std::uint8_t>(n2 >> (8 * i)));
  edited2.insert(edited2.end(), text2.begin(), text2.end());
  edited2.insert(edited2.end(), good.begin() + 12 + hlen, good.end());
  CHECK(error_kind([&] { decode_nlt(edited2); }) == ErrorKind::Format);
}

TEST_CASE("grid json round trip") {
  const auto g = make_scan_grid(1.8, 1.3, 180, 130, false, Vec3{0.1, 0.0, 0.0});
  CHECK(grid_from_json(grid_to_json(g)) == g);
}
