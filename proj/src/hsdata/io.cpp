#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "json.hpp"

#include "s5dscr/hsdata.hpp"
#include "binio.hpp"

namespace s5dscr::hsdata {
namespace {

constexpr std::array<char, 4> kMagic{'H', 'S', 'C', '1'};

}  // namespace

std::filesystem::path sidecar_path(const std::filesystem::path& cube_path) {
  auto p = cube_path;
  p.replace_extension(".json");
  return p;
}

void write_cube(const HsCube& hs, const std::filesystem::path& path, const std::optional<NormStats>& norm) {
  const Cube& cube = hs.cube;
  S5DSCR_CHECK(cube.data.size() == cube.channels * cube.height * cube.width, ErrorCode::ShapeMismatch,
               "cube payload does not match its dimensions");
  S5DSCR_CHECK(cube.all_finite(), ErrorCode::NonFinite, "refusing to write non-finite values");
  // Validates the band id.
  (void)BandInfo::for_band(hs.band.band_id);

  detail::ByteWriter buf;
  buf.reserve(kCubeHeaderBytes + cube.data.size() * 4);
  buf.put_bytes(kMagic.data(), kMagic.size());
  buf.put<std::uint16_t>(kCubeFormatVersion);
  buf.put<std::uint16_t>(static_cast<std::uint16_t>(hs.band.band_id));
  buf.put<std::uint32_t>(static_cast<std::uint32_t>(cube.channels));
  buf.put<std::uint32_t>(static_cast<std::uint32_t>(cube.height));
  buf.put<std::uint32_t>(static_cast<std::uint32_t>(cube.width));
  buf.put<double>(hs.band.wavelength_lo_nm);
  buf.put<double>(hs.band.wavelength_hi_nm);
  buf.put_zeros(16);
  for (float v : cube.data) buf.put<float>(v);
  buf.write_file(path);

  nlohmann::json side;
  side["provenance"] = hs.provenance;
  side["band"] = hs.band.band_id;
  side["reduced_channels"] = hs.reduced_channels();
  if (norm) side["norm_stats"] = {{"lo", norm->lo}, {"hi", norm->hi}};
  std::ofstream js(sidecar_path(path), std::ios::trunc);
  S5DSCR_CHECK(js.good(), ErrorCode::Io, "cannot write sidecar for " + path.string());
  js << side.dump(2) << '\n';
}

HsCube read_cube(const std::filesystem::path& path) {
  detail::ByteReader in(detail::ByteReader::slurp(path), ErrorCode::Truncated);
  S5DSCR_CHECK(in.starts_with(kMagic.data(), kMagic.size()), ErrorCode::BadMagic, path.string() + " is not an HSC cube");
  S5DSCR_CHECK(in.remaining() >= kCubeHeaderBytes, ErrorCode::Truncated, "header truncated in " + path.string());
  in.skip(4);
  const auto version = in.get<std::uint16_t>();
  S5DSCR_CHECK(version == kCubeFormatVersion, ErrorCode::VersionMismatch,
               "unsupported HSC version " + std::to_string(version));
  const auto band_id = in.get<std::uint16_t>();
  const std::size_t c = in.get<std::uint32_t>();
  const std::size_t h = in.get<std::uint32_t>();
  const std::size_t w = in.get<std::uint32_t>();
  const double wl_lo = in.get<double>();
  const double wl_hi = in.get<double>();

  BandInfo band;
  try {
    band = BandInfo::for_band(band_id);
  } catch (const Error& e) {
    throw Error(ErrorCode::HeaderMismatch, e.what());
  }
  S5DSCR_CHECK(c > 0 && h > 0 && w > 0, ErrorCode::HeaderMismatch, "zero dimension in header");
  S5DSCR_CHECK(wl_lo == band.wavelength_lo_nm && wl_hi == band.wavelength_hi_nm, ErrorCode::HeaderMismatch,
               "wavelength range does not match band " + std::to_string(band_id));
  for (int i = 0; i < 16; ++i)
    S5DSCR_CHECK(in.get<std::uint8_t>() == 0, ErrorCode::HeaderMismatch, "reserved header bytes are not zero");

  const std::size_t expected = c * h * w * 4;
  S5DSCR_CHECK(in.remaining() >= expected, ErrorCode::Truncated,
               "payload holds " + std::to_string(in.remaining() / 4) + " values, header declares " +
                   std::to_string(c * h * w));
  S5DSCR_CHECK(in.remaining() == expected, ErrorCode::HeaderMismatch, "trailing bytes after payload");

  HsCube hs;
  hs.band = band;
  hs.cube = Cube(c, h, w);
  for (auto& v : hs.cube.data) v = in.get<float>();
  S5DSCR_CHECK(hs.cube.all_finite(), ErrorCode::NonFinite, path.string() + " contains NaN or Inf");

  if (auto side = read_sidecar(path)) hs.provenance = side->provenance;
  return hs;
}

std::optional<Sidecar> read_sidecar(const std::filesystem::path& cube_path) {
  const auto sp = sidecar_path(cube_path);
  std::ifstream in(sp);
  if (!in.good()) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, "bad sidecar " + sp.string() + ": " + e.what());
  }
  Sidecar s;
  s.provenance = j.value("provenance", std::string{});
  if (j.contains("norm_stats")) s.norm = NormStats{j["norm_stats"].at("lo").get<double>(), j["norm_stats"].at("hi").get<double>()};
  return s;
}

}  // namespace s5dscr::hsdata
