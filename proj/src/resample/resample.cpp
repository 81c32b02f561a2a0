#include "s5dscr/resample.hpp"

#include <array>
#include <cmath>

namespace s5dscr::resample {

DegradationSpec DegradationSpec::for_spectrometer(Spectrometer s) {
  DegradationSpec spec;
  spec.spectrometer = s;
  switch (s) {
    case Spectrometer::UV: spec.sigma_across = 0.37; spec.sigma_along = 0.36; break;
    case Spectrometer::UVIS: spec.sigma_across = 0.44; spec.sigma_along = 0.74; break;
    case Spectrometer::NIR: spec.sigma_across = 0.45; spec.sigma_along = 0.74; break;
    case Spectrometer::SWIR: spec.sigma_across = 0.15; spec.sigma_along = 0.20; break;
  }
  return spec;
}

std::vector<double> gaussian_taps(double sigma, double truncation) {
  S5DSCR_CHECK(sigma > 0.0 && std::isfinite(sigma), ErrorCode::InvalidArgument, "sigma must be positive");
  S5DSCR_CHECK(truncation > 0.0, ErrorCode::InvalidArgument, "truncation must be positive");
  const auto radius = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(truncation * sigma)));
  std::vector<double> taps(2 * radius + 1);
  double sum = 0.0;
  for (std::size_t i = 0; i < taps.size(); ++i) {
    const double x = static_cast<double>(i) - static_cast<double>(radius);
    taps[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += taps[i];
  }
  for (auto& t : taps) t /= sum;
  return taps;
}

Kernel2D gaussian_kernel(double sigma_across, double sigma_along, double truncation) {
  Kernel2D k;
  k.along_taps = gaussian_taps(sigma_along, truncation);
  k.across_taps = gaussian_taps(sigma_across, truncation);
  k.rows = k.along_taps.size();
  k.cols = k.across_taps.size();
  k.taps.resize(k.rows * k.cols);
  for (std::size_t r = 0; r < k.rows; ++r)
    for (std::size_t c = 0; c < k.cols; ++c) k.taps[r * k.cols + c] = k.along_taps[r] * k.across_taps[c];
  return k;
}

namespace {

inline std::size_t clamp_index(std::ptrdiff_t i, std::size_t n) {
  if (i < 0) return 0;
  if (static_cast<std::size_t>(i) >= n) return n - 1;
  return static_cast<std::size_t>(i);
}

}  // namespace

Cube psf_blur(const Cube& cube, const Kernel2D& kernel) {
  S5DSCR_CHECK(kernel.rows % 2 == 1 && kernel.cols % 2 == 1, ErrorCode::InvalidArgument, "kernel dims must be odd");
  S5DSCR_CHECK(kernel.rows <= cube.height && kernel.cols <= cube.width, ErrorCode::TooSmall,
               "kernel larger than image");
  const std::size_t h = cube.height, w = cube.width;
  const auto ry = static_cast<std::ptrdiff_t>(kernel.radius_rows());
  const auto rx = static_cast<std::ptrdiff_t>(kernel.radius_cols());
  Cube out(cube.channels, h, w);

#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(cube.channels); ++ci) {
    const auto c = static_cast<std::size_t>(ci);
    const auto in = cube.plane(c);
    auto dst = out.plane(c);
    // Vertical pass into a double buffer, then horizontal pass.
    std::vector<double> tmp(h * w, 0.0);
    for (std::size_t y = 0; y < h; ++y) {
      double* row = &tmp[y * w];
      for (std::ptrdiff_t dy = -ry; dy <= ry; ++dy) {
        const double t = kernel.along_taps[static_cast<std::size_t>(dy + ry)];
        const float* src = &in[clamp_index(static_cast<std::ptrdiff_t>(y) + dy, h) * w];
        for (std::size_t x = 0; x < w; ++x) row[x] += t * src[x];
      }
    }
    for (std::size_t y = 0; y < h; ++y) {
      const double* row = &tmp[y * w];
      for (std::size_t x = 0; x < w; ++x) {
        double acc = 0.0;
        for (std::ptrdiff_t dx = -rx; dx <= rx; ++dx)
          acc += kernel.across_taps[static_cast<std::size_t>(dx + rx)] *
                 row[clamp_index(static_cast<std::ptrdiff_t>(x) + dx, w)];
        dst[y * w + x] = static_cast<float>(acc);
      }
    }
  }
  return out;
}

Cube decimate(const Cube& cube, std::size_t scale) {
  S5DSCR_CHECK(scale >= 1, ErrorCode::InvalidArgument, "scale must be >= 1");
  S5DSCR_CHECK(cube.height % scale == 0 && cube.width % scale == 0, ErrorCode::ShapeMismatch,
               "spatial dims " + std::to_string(cube.height) + "x" + std::to_string(cube.width) +
                   " not divisible by " + std::to_string(scale));
  const std::size_t oh = cube.height / scale, ow = cube.width / scale;
  Cube out(cube.channels, oh, ow);
  for (std::size_t c = 0; c < cube.channels; ++c)
    for (std::size_t y = 0; y < oh; ++y)
      for (std::size_t x = 0; x < ow; ++x) out.at(c, y, x) = cube.at(c, y * scale, x * scale);
  return out;
}

Cube degrade(const Cube& cube, const DegradationSpec& spec) {
  S5DSCR_CHECK(spec.scale >= 2, ErrorCode::InvalidArgument, "scale must be >= 2");
  S5DSCR_CHECK(cube.height % spec.scale == 0 && cube.width % spec.scale == 0, ErrorCode::ShapeMismatch,
               "cube dims not divisible by scale");
  const auto kernel = gaussian_kernel(spec.effective_sigma_across(), spec.effective_sigma_along(), spec.truncation);
  return decimate(psf_blur(cube, kernel), spec.scale);
}

double keys_weight(double x) {
  constexpr double a = -0.5;
  x = std::abs(x);
  if (x <= 1.0) return ((a + 2.0) * x - (a + 3.0)) * x * x + 1.0;
  if (x < 2.0) return ((a * x - 5.0 * a) * x + 8.0 * a) * x - 4.0 * a;
  return 0.0;
}

namespace {

struct Taps {
  std::array<std::size_t, 4> index;
  std::array<double, 4> weight;
};

std::vector<Taps> cubic_taps(std::size_t n_in, std::size_t scale) {
  std::vector<Taps> taps(n_in * scale);
  for (std::size_t d = 0; d < taps.size(); ++d) {
    const double src = (static_cast<double>(d) + 0.5) / static_cast<double>(scale) - 0.5;
    const double base = std::floor(src);
    const double t = src - base;
    const auto i0 = static_cast<std::ptrdiff_t>(base);
    for (int k = 0; k < 4; ++k) {
      taps[d].index[k] = clamp_index(i0 - 1 + k, n_in);
      taps[d].weight[k] = keys_weight(t - static_cast<double>(k - 1));
    }
  }
  return taps;
}

}  // namespace

template <typename T>
void bicubic_upsample_plane(std::span<const T> in, std::size_t h, std::size_t w, std::size_t scale,
                            std::span<T> out) {
  S5DSCR_CHECK(scale >= 1, ErrorCode::InvalidArgument, "scale must be >= 1");
  S5DSCR_CHECK(in.size() == h * w && out.size() == h * w * scale * scale, ErrorCode::ShapeMismatch,
               "bicubic plane buffer size mismatch");
  const std::size_t oh = h * scale, ow = w * scale;
  const auto col_taps = cubic_taps(w, scale);
  const auto row_taps = cubic_taps(h, scale);

  std::vector<double> tmp(h * ow);
  for (std::size_t y = 0; y < h; ++y) {
    const T* src = &in[y * w];
    double* dst = &tmp[y * ow];
    for (std::size_t x = 0; x < ow; ++x) {
      const auto& t = col_taps[x];
      dst[x] = t.weight[0] * src[t.index[0]] + t.weight[1] * src[t.index[1]] + t.weight[2] * src[t.index[2]] +
               t.weight[3] * src[t.index[3]];
    }
  }
  for (std::size_t y = 0; y < oh; ++y) {
    const auto& t = row_taps[y];
    const double* r0 = &tmp[t.index[0] * ow];
    const double* r1 = &tmp[t.index[1] * ow];
    const double* r2 = &tmp[t.index[2] * ow];
    const double* r3 = &tmp[t.index[3] * ow];
    T* dst = &out[y * ow];
    for (std::size_t x = 0; x < ow; ++x)
      dst[x] = static_cast<T>(t.weight[0] * r0[x] + t.weight[1] * r1[x] + t.weight[2] * r2[x] + t.weight[3] * r3[x]);
  }
}

template void bicubic_upsample_plane<float>(std::span<const float>, std::size_t, std::size_t, std::size_t,
                                            std::span<float>);
template void bicubic_upsample_plane<double>(std::span<const double>, std::size_t, std::size_t, std::size_t,
                                             std::span<double>);

Cube bicubic_upsample(const Cube& cube, std::size_t scale) {
  S5DSCR_CHECK(scale >= 2, ErrorCode::InvalidArgument, "scale must be >= 2");
  Cube out(cube.channels, cube.height * scale, cube.width * scale);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(cube.channels); ++c)
    bicubic_upsample_plane<float>(cube.plane(static_cast<std::size_t>(c)), cube.height, cube.width, scale,
                                  out.plane(static_cast<std::size_t>(c)));
  return out;
}

}  // namespace s5dscr::resample
