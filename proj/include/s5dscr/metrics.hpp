#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "s5dscr/cube.hpp"

namespace s5dscr::metrics {

/// PSNR in dB; `identical` marks MSE == 0, where the value is unbounded.
struct Psnr {
  double db = 0.0;
  bool identical = false;

  std::string to_string() const;
};

/// 10 log10(max^2 / MSE) with the MSE taken over the whole cube.
Psnr psnr(const Cube& ref, const Cube& test, double max_val = 1.0);

double mse(const Cube& ref, const Cube& test);

struct SsimOptions {
  std::size_t window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double range = 1.0;
};

/// Gaussian-weighted single-scale SSIM over the valid window positions of
/// each channel, averaged over positions and then over channels.
double ssim(const Cube& ref, const Cube& test, const SsimOptions& options = {});

struct Scc {
  double value = 0.0;
  /// Set when a channel's filtered signal had zero variance (it contributed 0).
  bool degenerate_channel = false;
};

/// Pearson correlation of Laplacian-filtered channels (valid region), mean over channels.
Scc scc(const Cube& ref, const Cube& test);

struct MethodRow {
  std::string method;
  Psnr psnr;
  double scc = 0.0;
  double ssim = 0.0;
  std::size_t n_images = 0;
  bool best_psnr = false;
  bool best_scc = false;
  bool best_ssim = false;
  bool scc_warning = false;
};

struct MetricsReport {
  int band_id = 0;
  std::vector<MethodRow> rows;

  std::string to_csv() const;
  std::string to_json() const;
  const MethodRow* find(const std::string& method) const;
};

using LabeledCube = std::pair<std::string, Cube>;

/// Scores each labeled reconstruction against `ref` and marks the best per metric.
MetricsReport evaluate(const Cube& ref, const std::vector<LabeledCube>& tests, int band_id = 0);

/// Aggregate over several reference cubes: tests[m][i] pairs with refs[i].
/// PSNR is averaged over non-identical images; if all are identical the
/// sentinel is kept.
MetricsReport evaluate_set(const std::vector<Cube>& refs,
                           const std::vector<std::pair<std::string, std::vector<Cube>>>& tests, int band_id = 0);

struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // interleaved RGB, row-major
};

/// Principal axes of the channel covariance (pixels as samples).
struct PcaBasis {
  std::vector<double> mean;                    // per channel
  std::vector<std::vector<double>> components; // top-3, unit length, largest variance first
  std::vector<double> variances;
  std::vector<std::pair<double, double>> ranges;  // min/max of the reference projection
};

PcaBasis fit_pca(const Cube& ref);

/// Projects `display` onto the reference's top three principal components
/// and stretches each to [0, 255] using the reference projection's range.
RgbImage pca_rgb(const Cube& ref, const Cube& display);
RgbImage pca_rgb(const PcaBasis& basis, const Cube& display);

void write_png(const RgbImage& image, const std::filesystem::path& path);

}  // namespace s5dscr::metrics
