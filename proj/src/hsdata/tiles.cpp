#include <algorithm>
#include <cmath>

#include "s5dscr/hsdata.hpp"

namespace s5dscr::hsdata {

void TileSet::append(TileSet&& other) {
  const std::size_t shift = tiles.size();
  for (auto& r : other.rejected) rejected.push_back({r.tile_index + shift, std::move(r.reason)});
  std::move(other.tiles.begin(), other.tiles.end(), std::back_inserter(tiles));
  origins.insert(origins.end(), other.origins.begin(), other.origins.end());
}

TileSet crop_tiles(const HsCube& hs, std::size_t tile_h, std::size_t tile_w, std::size_t scale,
                   std::size_t cube_id) {
  S5DSCR_CHECK(scale >= 1, ErrorCode::InvalidArgument, "scale must be >= 1");
  const std::size_t th = tile_h - tile_h % scale;
  const std::size_t tw = tile_w - tile_w % scale;
  S5DSCR_CHECK(th > 0 && tw > 0, ErrorCode::InvalidArgument, "tile dims vanish after trimming to the scale");
  const Cube& cube = hs.cube;
  S5DSCR_CHECK(th <= cube.height && tw <= cube.width, ErrorCode::TooSmall,
               "cube " + std::to_string(cube.height) + "x" + std::to_string(cube.width) + " smaller than tile " +
                   std::to_string(th) + "x" + std::to_string(tw));

  TileSet set;
  for (std::size_t row = 0; row + th <= cube.height; row += th)
    for (std::size_t col = 0; col + tw <= cube.width; col += tw) {
      HsCube tile;
      tile.band = hs.band;
      tile.cube = cube.crop(row, col, th, tw);
      tile.provenance = hs.provenance + " tile@" + std::to_string(row) + "," + std::to_string(col);
      set.tiles.push_back(std::move(tile));
      set.origins.push_back({cube_id, row, col});
    }
  return set;
}

double quantile(std::span<const float> values, double q) {
  S5DSCR_CHECK(!values.empty(), ErrorCode::InvalidArgument, "quantile of empty set");
  S5DSCR_CHECK(q >= 0.0 && q <= 1.0, ErrorCode::InvalidArgument, "quantile must be in [0, 1]");
  std::vector<float> v(values.begin(), values.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(lo), v.end());
  const double a = v[lo];
  if (hi == lo) return a;
  // The next order statistic is the minimum of the upper partition.
  const double b = *std::min_element(v.begin() + static_cast<std::ptrdiff_t>(lo) + 1, v.end());
  return a + (pos - static_cast<double>(lo)) * (b - a);
}

TileSet outlier_filter(const TileSet& in, double iqr_k, double clip_pct) {
  S5DSCR_CHECK(in.tiles.size() >= 4, ErrorCode::TooFewTiles,
               "outlier filter needs at least 4 tiles, got " + std::to_string(in.tiles.size()));
  S5DSCR_CHECK(clip_pct >= 0.0 && clip_pct < 0.5, ErrorCode::InvalidArgument, "clip_pct must be in [0, 0.5)");
  S5DSCR_CHECK(iqr_k >= 0.0, ErrorCode::InvalidArgument, "iqr_k must be non-negative");

  std::vector<HsCube> clipped = in.tiles;
  std::vector<float> medians(clipped.size());
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    auto& data = clipped[i].cube.data;
    S5DSCR_CHECK(!data.empty(), ErrorCode::InvalidArgument, "empty tile");
    const auto lo = static_cast<float>(quantile(data, clip_pct));
    const auto hi = static_cast<float>(quantile(data, 1.0 - clip_pct));
    for (auto& v : data) v = std::clamp(v, lo, hi);
    medians[i] = static_cast<float>(quantile(data, 0.5));
  }

  const double q1 = quantile(medians, 0.25);
  const double q3 = quantile(medians, 0.75);
  const double iqr = q3 - q1;
  const double fence_lo = q1 - iqr_k * iqr;
  const double fence_hi = q3 + iqr_k * iqr;

  TileSet out;
  out.rejected = in.rejected;
  for (std::size_t i = 0; i < clipped.size(); ++i) {
    if (medians[i] < fence_lo || medians[i] > fence_hi) {
      out.rejected.push_back({i, "iqr_outlier"});
      continue;
    }
    out.tiles.push_back(std::move(clipped[i]));
    out.origins.push_back(i < in.origins.size() ? in.origins[i] : TileOrigin{0, 0, 0});
  }
  return out;
}

NormStats compute_norm_stats(const TileSet& tiles, double pct) {
  S5DSCR_CHECK(!tiles.tiles.empty(), ErrorCode::InvalidArgument, "no tiles to compute normalization from");
  std::vector<float> all;
  for (const auto& t : tiles.tiles) all.insert(all.end(), t.cube.data.begin(), t.cube.data.end());
  NormStats s{quantile(all, pct), quantile(all, 1.0 - pct)};
  S5DSCR_CHECK(s.hi > s.lo, ErrorCode::DegenerateRange, "normalization range is empty (constant data)");
  return s;
}

void normalize_in_place(Cube& cube, const NormStats& s) {
  S5DSCR_CHECK(s.hi > s.lo, ErrorCode::DegenerateRange, "normalization range is empty");
  const double scale = 1.0 / (s.hi - s.lo);
  for (auto& v : cube.data) v = static_cast<float>(std::clamp((v - s.lo) * scale, 0.0, 1.0));
}

void denormalize_in_place(Cube& cube, const NormStats& s) {
  for (auto& v : cube.data) v = static_cast<float>(s.lo + static_cast<double>(v) * (s.hi - s.lo));
}

std::pair<TileSet, NormStats> normalize(const TileSet& tiles, const std::optional<NormStats>& stats) {
  const NormStats s = stats ? *stats : compute_norm_stats(tiles);
  S5DSCR_CHECK(s.hi > s.lo, ErrorCode::DegenerateRange, "normalization range is empty");
  TileSet out = tiles;
  for (auto& t : out.tiles) normalize_in_place(t.cube, s);
  return {std::move(out), s};
}

}  // namespace s5dscr::hsdata
