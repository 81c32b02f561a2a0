#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s5dscr/cube.hpp"

namespace s5dscr::hsdata {

/// Affine normalization range, taken from the training split.
struct NormStats {
  double lo = 0.0;
  double hi = 1.0;
};

// ---------------------------------------------------------------------------
// HSC cube files
//
// Layout (little-endian):
//   "HSC1" | version u16 | band_id u16 | C, H, W u32 | wl_lo, wl_hi f64 |
//   16 reserved zero bytes | C*H*W f32, channel-major, row-major per channel
//
// A JSON sidecar with the same basename and ".json" extension carries the
// provenance string and, when present, the NormStats.

inline constexpr std::uint16_t kCubeFormatVersion = 1;
inline constexpr std::size_t kCubeHeaderBytes = 52;

struct Sidecar {
  std::string provenance;
  std::optional<NormStats> norm;
};

std::filesystem::path sidecar_path(const std::filesystem::path& cube_path);

void write_cube(const HsCube& cube, const std::filesystem::path& path,
                const std::optional<NormStats>& norm = std::nullopt);
HsCube read_cube(const std::filesystem::path& path);
std::optional<Sidecar> read_sidecar(const std::filesystem::path& cube_path);

// ---------------------------------------------------------------------------
// Synthetic data

struct SynthParams {
  std::size_t n_channels = 8;
  std::size_t height = 128;
  std::size_t width = 128;
  std::uint64_t seed = 0;
  double spatial_sigma = 2.0;
  double channel_mix = 0.9;
  int band_id = 3;
};

/// Smooth correlated random cube with values spanning [0.1, 0.9] per channel.
HsCube synth_cube(const SynthParams& params);

// ---------------------------------------------------------------------------
// Tiling and outlier rejection

struct TileOrigin {
  std::size_t cube_id = 0;
  std::size_t row = 0;
  std::size_t col = 0;
};

struct Rejection {
  std::size_t tile_index = 0;  // index into the TileSet that was filtered
  std::string reason;
};

struct TileSet {
  std::vector<HsCube> tiles;
  std::vector<TileOrigin> origins;
  std::vector<Rejection> rejected;

  std::size_t size() const { return tiles.size(); }
  void append(TileSet&& other);
};

/// Non-overlapping row-major grid; tile dims are first trimmed to multiples of `scale`.
TileSet crop_tiles(const HsCube& cube, std::size_t tile_h, std::size_t tile_w, std::size_t scale = 4,
                   std::size_t cube_id = 0);

/// Linear-interpolated quantile (q in [0, 1]) of unsorted values.
double quantile(std::span<const float> values, double q);

TileSet outlier_filter(const TileSet& tiles, double iqr_k = 1.5, double clip_pct = 0.01);

// ---------------------------------------------------------------------------
// Normalization

NormStats compute_norm_stats(const TileSet& tiles, double pct = 0.01);

/// Maps x to clamp((x - lo) / (hi - lo), 0, 1). Stats are computed from
/// `tiles` when not supplied.
std::pair<TileSet, NormStats> normalize(const TileSet& tiles, const std::optional<NormStats>& stats = std::nullopt);

void normalize_in_place(Cube& cube, const NormStats& stats);
void denormalize_in_place(Cube& cube, const NormStats& stats);

// ---------------------------------------------------------------------------
// Splitting

struct SplitAssignment {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
  std::uint64_t seed = 0;
  std::array<double, 3> fractions{0.65, 0.20, 0.15};
};

/// Seeded shuffle, then floor(n * fraction) per split with the remainder going to train.
SplitAssignment split(std::size_t n_tiles, std::array<double, 3> fractions = {0.65, 0.20, 0.15},
                      std::uint64_t seed = 0);
inline SplitAssignment split(const TileSet& tiles, std::array<double, 3> fractions = {0.65, 0.20, 0.15},
                             std::uint64_t seed = 0) {
  return split(tiles.size(), fractions, seed);
}

// ---------------------------------------------------------------------------
// Patches

struct PatchOptions {
  std::size_t hr_size = 256;
  std::size_t lr_size = 64;
  std::size_t lr_stride = 32;
};

struct PatchPair {
  Cube lr;
  Cube hr;
  std::size_t tile_id = 0;
  std::size_t lr_row = 0;
  std::size_t lr_col = 0;
};

/// Window start offsets covering [0, extent) with the last window flush to the far edge.
std::vector<std::size_t> window_offsets(std::size_t extent, std::size_t size, std::size_t stride);

/// Overlapping LR windows and their scaled HR counterparts. The window is
/// clamped per axis when the LR tile is smaller than `lr_size`.
std::vector<PatchPair> patchify(const Cube& hr_tile, const Cube& lr_tile, const PatchOptions& options = {},
                                std::size_t tile_id = 0);

}  // namespace s5dscr::hsdata
