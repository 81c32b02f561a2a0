#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "s5dscr/cube.hpp"

namespace s5dscr::resample {

struct DegradationSpec {
  Spectrometer spectrometer = Spectrometer::UVIS;
  double sigma_across = 0.44;  // columns
  double sigma_along = 0.74;   // rows
  std::size_t scale = 4;
  double truncation = 3.0;
  /// Multiply the sigmas by `scale` (LR-pixel reading of the sensor sigmas).
  bool sigma_in_lr_pixels = false;

  static DegradationSpec for_spectrometer(Spectrometer s);

  double effective_sigma_across() const { return sigma_in_lr_pixels ? sigma_across * scale : sigma_across; }
  double effective_sigma_along() const { return sigma_in_lr_pixels ? sigma_along * scale : sigma_along; }
};

/// Odd-sized, center-anchored, normalized kernel.
struct Kernel2D {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> taps;        // rows x cols, outer product of the two below
  std::vector<double> along_taps;  // length rows
  std::vector<double> across_taps; // length cols

  double at(std::size_t r, std::size_t c) const { return taps[r * cols + c]; }
  std::size_t radius_rows() const { return rows / 2; }
  std::size_t radius_cols() const { return cols / 2; }
};

/// Sampled, normalized 1-D Gaussian with radius max(1, ceil(truncation * sigma)).
std::vector<double> gaussian_taps(double sigma, double truncation);

/// Along-track sigma maps to image rows, across-track to columns.
Kernel2D gaussian_kernel(double sigma_across, double sigma_along, double truncation = 3.0);

/// Per-channel correlation with replicate padding, same output size.
Cube psf_blur(const Cube& cube, const Kernel2D& kernel);

/// Keeps samples at (0, s, 2s, ...) in both axes.
Cube decimate(const Cube& cube, std::size_t scale);

Cube degrade(const Cube& cube, const DegradationSpec& spec);

/// Keys cubic convolution weight, a = -0.5.
double keys_weight(double x);

/// One plane, half-pixel-center mapping, replicate edges. `out` must hold
/// (s*h) x (s*w) values. Accumulates in double.
template <typename T>
void bicubic_upsample_plane(std::span<const T> in, std::size_t h, std::size_t w, std::size_t scale,
                            std::span<T> out);

Cube bicubic_upsample(const Cube& cube, std::size_t scale);

}  // namespace s5dscr::resample
