#include <algorithm>
#include <cmath>
#include <sstream>

#include "s5dscr/hsdata.hpp"
#include "s5dscr/resample.hpp"
#include "s5dscr/rng.hpp"

namespace s5dscr::hsdata {
namespace {

std::vector<double> blurred_noise(std::size_t h, std::size_t w, double sigma, Rng& rng) {
  Cube noise(1, h, w);
  for (auto& v : noise.data) v = static_cast<float>(standard_normal(rng));
  const auto taps = resample::gaussian_taps(sigma, 3.0);
  // Blur directly in double; the radius can exceed small images so the
  // kernel-size check of psf_blur does not apply here.
  const auto r = static_cast<std::ptrdiff_t>(taps.size() / 2);
  auto clamp = [](std::ptrdiff_t i, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(i, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  std::vector<double> tmp(h * w, 0.0), out(h * w, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d)
        acc += taps[static_cast<std::size_t>(d + r)] * noise.data[clamp(static_cast<std::ptrdiff_t>(y) + d, h) * w + x];
      tmp[y * w + x] = acc;
    }
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x) {
      double acc = 0.0;
      for (std::ptrdiff_t d = -r; d <= r; ++d)
        acc += taps[static_cast<std::size_t>(d + r)] * tmp[y * w + clamp(static_cast<std::ptrdiff_t>(x) + d, w)];
      out[y * w + x] = acc;
    }
  return out;
}

}  // namespace

HsCube synth_cube(const SynthParams& p) {
  S5DSCR_CHECK(p.n_channels >= 1 && p.height >= 8 && p.width >= 8, ErrorCode::InvalidArgument,
               "synthetic cube needs C >= 1 and H, W >= 8");
  S5DSCR_CHECK(p.spatial_sigma > 0.0, ErrorCode::InvalidArgument, "spatial_sigma must be positive");
  S5DSCR_CHECK(p.channel_mix >= 0.0 && p.channel_mix <= 1.0, ErrorCode::InvalidArgument,
               "channel_mix must be in [0, 1]");

  HsCube hs;
  hs.band = BandInfo::for_band(p.band_id);
  hs.cube = Cube(p.n_channels, p.height, p.width);
  std::ostringstream prov;
  prov << "synth seed=" << p.seed << " sigma=" << p.spatial_sigma << " mix=" << p.channel_mix;
  hs.provenance = prov.str();

  Rng rng(p.seed);
  const auto base = blurred_noise(p.height, p.width, p.spatial_sigma, rng);
  std::vector<double> mixed(base.size());
  for (std::size_t c = 0; c < p.n_channels; ++c) {
    const auto own = blurred_noise(p.height, p.width, p.spatial_sigma, rng);
    for (std::size_t i = 0; i < mixed.size(); ++i)
      mixed[i] = p.channel_mix * base[i] + (1.0 - p.channel_mix) * own[i];
    const auto [lo_it, hi_it] = std::minmax_element(mixed.begin(), mixed.end());
    const double lo = *lo_it, span = *hi_it - *lo_it;
    auto dst = hs.cube.plane(c);
    for (std::size_t i = 0; i < mixed.size(); ++i)
      dst[i] = span > 0.0 ? static_cast<float>(0.1 + 0.8 * (mixed[i] - lo) / span) : 0.5f;
  }
  return hs;
}

}  // namespace s5dscr::hsdata
