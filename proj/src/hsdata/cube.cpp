#include "s5dscr/cube.hpp"

#include <algorithm>
#include <cmath>

namespace s5dscr {

BandInfo BandInfo::for_band(int band_id) {
  switch (band_id) {
    case 2: return {2, Spectrometer::UV, 497, 300.0, 320.0};
    case 3: return {3, Spectrometer::UVIS, 497, 320.0, 405.0};
    case 4: return {4, Spectrometer::UVIS, 497, 405.0, 500.0};
    case 5: return {5, Spectrometer::NIR, 497, 675.0, 725.0};
    case 6: return {6, Spectrometer::NIR, 497, 725.0, 775.0};
    case 7: return {7, Spectrometer::SWIR, 480, 2305.0, 2345.0};
    case 8: return {8, Spectrometer::SWIR, 480, 2345.0, 2385.0};
    case 1:
      throw Error(ErrorCode::InvalidArgument, "band 1 is excluded (low signal-to-noise ratio)");
    default:
      throw Error(ErrorCode::InvalidArgument, "band id must be in 2..8, got " + std::to_string(band_id));
  }
}

Cube Cube::crop(std::size_t y0, std::size_t x0, std::size_t h, std::size_t w) const {
  S5DSCR_CHECK(y0 + h <= height && x0 + w <= width, ErrorCode::ShapeMismatch, "crop window outside cube");
  Cube out(channels, h, w);
  for (std::size_t c = 0; c < channels; ++c)
    for (std::size_t y = 0; y < h; ++y) {
      const float* src = &data[(c * height + y0 + y) * width + x0];
      std::copy(src, src + w, &out.data[(c * h + y) * w]);
    }
  return out;
}

bool Cube::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](float v) { return std::isfinite(v); });
}

}  // namespace s5dscr
