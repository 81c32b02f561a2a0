#include "s5dscr/dataset.hpp"

#include <cstdio>
#include <fstream>

#include "json.hpp"

namespace s5dscr::dataset {
namespace {

std::string tile_name(const char* kind, std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "tiles/%s_%04zu.hsc", kind, i);
  return buf;
}

Spectrometer spectrometer_from_string(const std::string& s) {
  for (auto sp : {Spectrometer::UV, Spectrometer::UVIS, Spectrometer::NIR, Spectrometer::SWIR})
    if (to_string(sp) == s) return sp;
  throw Error(ErrorCode::Corrupt, "unknown spectrometer '" + s + "'");
}

}  // namespace

PreparedDataset prepare(const std::vector<HsCube>& cubes, const PrepareOptions& opt) {
  S5DSCR_CHECK(!cubes.empty(), ErrorCode::InvalidArgument, "no input cubes");
  const BandInfo band = BandInfo::for_band(opt.band_id);

  PreparedDataset ds;
  ds.band_id = opt.band_id;
  ds.scale = opt.scale;
  ds.seed = opt.seed;
  ds.patch = opt.patch;
  ds.iqr_k = opt.iqr_k;
  ds.clip_pct = opt.clip_pct;
  if (opt.degradation) {
    ds.degradation = *opt.degradation;
  } else {
    ds.degradation = resample::DegradationSpec::for_spectrometer(band.spectrometer);
    ds.degradation.scale = opt.scale;
  }
  S5DSCR_CHECK(ds.degradation.scale == opt.scale, ErrorCode::InvalidArgument,
               "degradation scale differs from the dataset scale");

  hsdata::TileSet tiles;
  for (std::size_t i = 0; i < cubes.size(); ++i) {
    S5DSCR_CHECK(cubes[i].band.band_id == opt.band_id, ErrorCode::InvalidArgument,
                 "cube " + std::to_string(i) + " belongs to band " + std::to_string(cubes[i].band.band_id));
    tiles.append(hsdata::crop_tiles(cubes[i], opt.tile_h, opt.tile_w, opt.scale, i));
  }
  if (tiles.size() >= 4) {
    tiles = hsdata::outlier_filter(tiles, opt.iqr_k, opt.clip_pct);
  } else {
    ds.outlier_filter_applied = false;
  }

  ds.split = hsdata::split(tiles, opt.fractions, opt.seed);
  hsdata::TileSet train_tiles;
  for (std::size_t i : ds.split.train) train_tiles.tiles.push_back(tiles.tiles[i]);
  ds.norm = hsdata::compute_norm_stats(train_tiles);

  ds.hr = hsdata::normalize(tiles, ds.norm).first;
  for (const auto& t : ds.hr.tiles) ds.lr.push_back(resample::degrade(t.cube, ds.degradation));
  return ds;
}

void write_dataset(const PreparedDataset& ds, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "tiles", ec);
  S5DSCR_CHECK(!ec, ErrorCode::Io, "cannot create " + dir.string() + ": " + ec.message());

  nlohmann::json tiles = nlohmann::json::array();
  for (std::size_t i = 0; i < ds.hr.size(); ++i) {
    const auto& hr = ds.hr.tiles[i];
    HsCube lr{hr.band, ds.lr[i], hr.provenance + " degraded"};
    hsdata::write_cube(hr, dir / tile_name("hr", i), ds.norm);
    hsdata::write_cube(lr, dir / tile_name("lr", i), ds.norm);
    const auto& o = ds.hr.origins[i];
    tiles.push_back({{"id", i},
                     {"hr", tile_name("hr", i)},
                     {"lr", tile_name("lr", i)},
                     {"cube", o.cube_id},
                     {"row", o.row},
                     {"col", o.col}});
  }
  nlohmann::json rejected = nlohmann::json::array();
  for (const auto& r : ds.hr.rejected) rejected.push_back({{"tile_index", r.tile_index}, {"reason", r.reason}});

  const auto& d = ds.degradation;
  nlohmann::json m{
      {"format", "s5dscr-dataset"},
      {"version", 1},
      {"band", ds.band_id},
      {"scale", ds.scale},
      {"seed", ds.seed},
      {"degradation",
       {{"spectrometer", std::string(to_string(d.spectrometer))},
        {"sigma_across", d.sigma_across},
        {"sigma_along", d.sigma_along},
        {"scale", d.scale},
        {"truncation", d.truncation},
        {"sigma_in_lr_pixels", d.sigma_in_lr_pixels}}},
      {"norm_stats", {{"lo", ds.norm.lo}, {"hi", ds.norm.hi}}},
      {"patch", {{"hr_size", ds.patch.hr_size}, {"lr_size", ds.patch.lr_size}, {"lr_stride", ds.patch.lr_stride}}},
      {"outlier_filter", {{"applied", ds.outlier_filter_applied}, {"iqr_k", ds.iqr_k}, {"clip_pct", ds.clip_pct}}},
      {"fractions", ds.split.fractions},
      {"tiles", tiles},
      {"rejected", rejected},
      {"splits", {{"train", ds.split.train}, {"val", ds.split.val}, {"test", ds.split.test}}}};
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  S5DSCR_CHECK(out.good(), ErrorCode::Io, "cannot write manifest in " + dir.string());
  out << m.dump(2) << '\n';
}

PreparedDataset read_dataset(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  S5DSCR_CHECK(in.good(), ErrorCode::Io, "no manifest.json in " + dir.string());
  PreparedDataset ds;
  try {
    nlohmann::json m;
    in >> m;
    S5DSCR_CHECK(m.at("format") == "s5dscr-dataset", ErrorCode::Corrupt, "not a dataset manifest");
    ds.band_id = m.at("band").get<int>();
    ds.scale = m.at("scale").get<std::size_t>();
    ds.seed = m.at("seed").get<std::uint64_t>();
    const auto& d = m.at("degradation");
    ds.degradation.spectrometer = spectrometer_from_string(d.at("spectrometer").get<std::string>());
    ds.degradation.sigma_across = d.at("sigma_across").get<double>();
    ds.degradation.sigma_along = d.at("sigma_along").get<double>();
    ds.degradation.scale = d.at("scale").get<std::size_t>();
    ds.degradation.truncation = d.at("truncation").get<double>();
    ds.degradation.sigma_in_lr_pixels = d.at("sigma_in_lr_pixels").get<bool>();
    ds.norm = {m.at("norm_stats").at("lo").get<double>(), m.at("norm_stats").at("hi").get<double>()};
    ds.patch = {m.at("patch").at("hr_size").get<std::size_t>(), m.at("patch").at("lr_size").get<std::size_t>(),
                m.at("patch").at("lr_stride").get<std::size_t>()};
    ds.outlier_filter_applied = m.at("outlier_filter").at("applied").get<bool>();
    ds.iqr_k = m.at("outlier_filter").at("iqr_k").get<double>();
    ds.clip_pct = m.at("outlier_filter").at("clip_pct").get<double>();
    ds.split.seed = ds.seed;
    ds.split.fractions = m.at("fractions").get<std::array<double, 3>>();
    ds.split.train = m.at("splits").at("train").get<std::vector<std::size_t>>();
    ds.split.val = m.at("splits").at("val").get<std::vector<std::size_t>>();
    ds.split.test = m.at("splits").at("test").get<std::vector<std::size_t>>();
    for (const auto& t : m.at("tiles")) {
      ds.hr.tiles.push_back(hsdata::read_cube(dir / t.at("hr").get<std::string>()));
      ds.lr.push_back(hsdata::read_cube(dir / t.at("lr").get<std::string>()).cube);
      ds.hr.origins.push_back(
          {t.at("cube").get<std::size_t>(), t.at("row").get<std::size_t>(), t.at("col").get<std::size_t>()});
    }
    for (const auto& r : m.at("rejected"))
      ds.hr.rejected.push_back({r.at("tile_index").get<std::size_t>(), r.at("reason").get<std::string>()});
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Corrupt, "bad manifest in " + dir.string() + ": " + e.what());
  }
  const std::size_t n = ds.hr.size();
  for (const auto* list : {&ds.split.train, &ds.split.val, &ds.split.test})
    for (std::size_t i : *list) S5DSCR_CHECK(i < n, ErrorCode::Corrupt, "split index out of range");
  return ds;
}

train::BandDataset make_band_dataset(const PreparedDataset& ds) {
  train::BandDataset out;
  out.band_id = ds.band_id;
  auto collect = [&ds](const std::vector<std::size_t>& ids, std::vector<hsdata::PatchPair>& dst) {
    for (std::size_t i : ids) {
      auto p = hsdata::patchify(ds.hr.tiles[i].cube, ds.lr[i], ds.patch, i);
      std::move(p.begin(), p.end(), std::back_inserter(dst));
    }
  };
  collect(ds.split.train, out.train);
  collect(ds.split.val, out.val);
  collect(ds.split.test, out.test);
  return out;
}

}  // namespace s5dscr::dataset
