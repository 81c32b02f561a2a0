#pragma once

// Manifest-driven band datasets: crop -> outlier filter -> split ->
// normalize (train statistics) -> degrade. Splits are fixed in the
// manifest so training never re-derives them.

#include <array>
#include <filesystem>
#include <optional>
#include <vector>

#include "s5dscr/hsdata.hpp"
#include "s5dscr/resample.hpp"
#include "s5dscr/train.hpp"

namespace s5dscr::dataset {

struct PrepareOptions {
  int band_id = 3;
  std::size_t scale = 4;
  std::size_t tile_h = 512;
  std::size_t tile_w = 256;
  std::uint64_t seed = 0;
  double iqr_k = 1.5;
  double clip_pct = 0.01;
  std::array<double, 3> fractions{0.65, 0.20, 0.15};
  hsdata::PatchOptions patch{};
  /// Defaults to the band's spectrometer table entry with `scale`.
  std::optional<resample::DegradationSpec> degradation;
};

struct PreparedDataset {
  int band_id = 3;
  std::size_t scale = 4;
  std::uint64_t seed = 0;
  resample::DegradationSpec degradation;
  hsdata::NormStats norm;
  hsdata::PatchOptions patch;
  hsdata::TileSet hr;         // normalized HR tiles, after filtering
  std::vector<Cube> lr;       // degrade(hr[i])
  hsdata::SplitAssignment split;
  bool outlier_filter_applied = true;
  double iqr_k = 1.5;
  double clip_pct = 0.01;
};

PreparedDataset prepare(const std::vector<HsCube>& cubes, const PrepareOptions& options);

/// Writes manifest.json plus tiles/hr_NNNN.hsc and tiles/lr_NNNN.hsc.
void write_dataset(const PreparedDataset& ds, const std::filesystem::path& dir);
PreparedDataset read_dataset(const std::filesystem::path& dir);

/// Patch pairs per split.
train::BandDataset make_band_dataset(const PreparedDataset& ds);

}  // namespace s5dscr::dataset
