#pragma once

#include <cstddef>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "s5dscr/error.hpp"

namespace s5dscr {

enum class Spectrometer { UV, UVIS, NIR, SWIR };

std::string_view to_string(Spectrometer s);

/// One Sentinel-5P radiance band. Band 1 is not supported (low SNR).
struct BandInfo {
  int band_id = 0;
  Spectrometer spectrometer = Spectrometer::UV;
  std::size_t n_channels = 0;
  double wavelength_lo_nm = 0.0;
  double wavelength_hi_nm = 0.0;

  /// Table lookup for bands 2..8; throws InvalidArgument otherwise.
  static BandInfo for_band(int band_id);

  friend bool operator==(const BandInfo&, const BandInfo&) = default;
};

/// Plain channel-major [C, H, W] float array.
struct Cube {
  std::size_t channels = 0;
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<float> data;

  Cube() = default;
  Cube(std::size_t c, std::size_t h, std::size_t w, float fill = 0.0f)
      : channels(c), height(h), width(w), data(c * h * w, fill) {}

  std::size_t plane_size() const { return height * width; }
  std::size_t size() const { return data.size(); }

  float& at(std::size_t c, std::size_t y, std::size_t x) { return data[(c * height + y) * width + x]; }
  float at(std::size_t c, std::size_t y, std::size_t x) const { return data[(c * height + y) * width + x]; }

  std::span<float> plane(std::size_t c) { return {data.data() + c * plane_size(), plane_size()}; }
  std::span<const float> plane(std::size_t c) const { return {data.data() + c * plane_size(), plane_size()}; }

  bool same_shape(const Cube& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }

  /// Spatial window [y0, y0+h) x [x0, x0+w), all channels.
  Cube crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const;

  bool all_finite() const;
};

/// Bitwise equality of shape and payload (distinguishes -0 from +0, NaN payloads).
inline bool bit_equal(std::span<const float> a, std::span<const float> b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(float)) == 0;
}
inline bool bit_equal(const Cube& a, const Cube& b) { return a.same_shape(b) && bit_equal(a.data, b.data); }

/// A single hyperspectral image plus its band metadata.
struct HsCube {
  BandInfo band;
  Cube cube;
  std::string provenance;

  /// Desk-scale cubes may carry fewer channels than the band defines.
  bool reduced_channels() const { return cube.channels != band.n_channels; }
};

}  // namespace s5dscr
