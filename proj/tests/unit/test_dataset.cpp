#include <algorithm>

#include "doctest.h"
#include "oracles.hpp"
#include "tmpdir.hpp"

#include "s5dscr/dataset.hpp"

using namespace s5dscr;
using namespace s5dscr::dataset;

namespace {

std::vector<HsCube> synth_set(std::size_t n, std::size_t side) {
  std::vector<HsCube> cubes;
  for (std::size_t i = 0; i < n; ++i) {
    hsdata::SynthParams p;
    p.n_channels = 4;
    p.height = side;
    p.width = side;
    p.seed = 40 + i;
    p.spatial_sigma = 4.0;
    cubes.push_back(hsdata::synth_cube(p));
  }
  return cubes;
}

PrepareOptions small_options() {
  PrepareOptions o;
  o.band_id = 3;
  o.tile_h = 64;
  o.tile_w = 64;
  o.seed = 5;
  o.patch = {32, 8, 4};
  return o;
}

}  // namespace

TEST_CASE("prepare") {
  const auto ds = prepare(synth_set(3, 128), small_options());
  CHECK(ds.hr.size() + ds.hr.rejected.size() == 12);
  CHECK(ds.lr.size() == ds.hr.size());
  CHECK(ds.outlier_filter_applied);
  CHECK(ds.degradation.sigma_along == 0.74);
  CHECK(ds.lr[0].height == 16);
  CHECK(ds.split.train.size() + ds.split.val.size() + ds.split.test.size() == ds.hr.size());

  SUBCASE("norm stats come from the training split only") {
    // Oracle: percentiles of the training tiles before normalization.
    const auto cubes = synth_set(3, 128);
    hsdata::TileSet all;
    for (std::size_t i = 0; i < cubes.size(); ++i) all.append(hsdata::crop_tiles(cubes[i], 64, 64, 4, i));
    const auto kept = hsdata::outlier_filter(all);
    std::vector<double> vals;
    for (std::size_t i : ds.split.train) vals.insert(vals.end(), kept.tiles[i].cube.data.begin(), kept.tiles[i].cube.data.end());
    CHECK(ds.norm.lo == doctest::Approx(oracle::sorted_quantile(vals, 0.01)).epsilon(1e-6));
    CHECK(ds.norm.hi == doctest::Approx(oracle::sorted_quantile(vals, 0.99)).epsilon(1e-6));
  }
  SUBCASE("lr tiles are the degraded hr tiles") {
    for (std::size_t i = 0; i < ds.hr.size(); ++i) REQUIRE(bit_equal(ds.lr[i], resample::degrade(ds.hr.tiles[i].cube, ds.degradation)));
  }
  SUBCASE("hr values are normalized") {
    for (const auto& t : ds.hr.tiles)
      for (float v : t.cube.data) {
        REQUIRE(v >= 0.0f);
        REQUIRE(v <= 1.0f);
      }
  }
  SUBCASE("band mismatch") {
    auto o = small_options();
    o.band_id = 4;
    CHECK_THROWS_AS(prepare(synth_set(1, 128), o), Error);
  }
  SUBCASE("four tiles from one cube split by the floor rule") {
    auto o = small_options();
    const auto four = prepare(synth_set(1, 128), o);
    CHECK(four.hr.size() == 4);
    CHECK(four.split.train.size() == 4);
    CHECK(four.split.val.empty());
    CHECK(four.split.test.empty());
  }
  SUBCASE("too few tiles skip the filter") {
    auto o = small_options();
    o.tile_h = 128;
    o.tile_w = 128;
    const auto three = prepare(synth_set(3, 128), o);
    CHECK_FALSE(three.outlier_filter_applied);
    CHECK(three.hr.size() == 3);
  }
}

TEST_CASE("dataset directory round trip") {
  TempDir dir("dataset");
  const auto ds = prepare(synth_set(2, 128), small_options());
  write_dataset(ds, dir.path);
  const auto back = read_dataset(dir.path);
  CHECK(back.band_id == ds.band_id);
  CHECK(back.scale == ds.scale);
  CHECK(back.norm.lo == ds.norm.lo);
  CHECK(back.norm.hi == ds.norm.hi);
  CHECK(back.split.train == ds.split.train);
  CHECK(back.split.val == ds.split.val);
  CHECK(back.split.test == ds.split.test);
  CHECK(back.patch.lr_stride == 4);
  REQUIRE(back.hr.size() == ds.hr.size());
  for (std::size_t i = 0; i < ds.hr.size(); ++i) {
    CHECK(bit_equal(back.hr.tiles[i].cube, ds.hr.tiles[i].cube));
    CHECK(bit_equal(back.lr[i], ds.lr[i]));
    CHECK(back.hr.origins[i].row == ds.hr.origins[i].row);
  }
  const auto side = hsdata::read_sidecar(dir / "tiles/hr_0000.hsc");
  REQUIRE(side);
  REQUIRE(side->norm);
  CHECK(side->norm->lo == ds.norm.lo);

  const auto bd = make_band_dataset(back);
  CHECK(bd.band_id == 3);
  // 16x16 LR tiles, window 8, stride 4: three offsets per axis.
  CHECK(bd.train.size() == 9 * ds.split.train.size());
  CHECK(bd.val.size() == 9 * ds.split.val.size());
  CHECK(bd.train.front().hr.height == 32);

  SUBCASE("missing manifest") { CHECK_THROWS_AS(read_dataset(dir / "nothing"), Error); }
}
