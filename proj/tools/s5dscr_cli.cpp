// s5dscr: synthetic data, dataset preparation, training, inference and
// evaluation for hyperspectral super-resolution.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"

#include "s5dscr/autograd.hpp"
#include "s5dscr/dataset.hpp"
#include "s5dscr/hsdata.hpp"
#include "s5dscr/metrics.hpp"
#include "s5dscr/model.hpp"
#include "s5dscr/parallel.hpp"
#include "s5dscr/resample.hpp"
#include "s5dscr/rng.hpp"
#include "s5dscr/train.hpp"

namespace fs = std::filesystem;
using namespace s5dscr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return kExitUsage;
    case ErrorCode::NumericFailure:
      return kExitNumeric;
    default:
      return kExitData;
  }
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p);
  S5DSCR_CHECK(in.good(), ErrorCode::Io, "cannot read " + p.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::trunc);
  S5DSCR_CHECK(out.good(), ErrorCode::Io, "cannot write " + p.string());
  out << text;
}

void ensure_dir(const fs::path& p) {
  std::error_code ec;
  fs::create_directories(p, ec);
  S5DSCR_CHECK(!ec, ErrorCode::Io, "cannot create " + p.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  hsdata::SynthParams params;
  std::size_t count = 1;
  fs::path out_dir = "synth";
};

int cmd_synth(const SynthArgs& a) {
  ensure_dir(a.out_dir);
  for (std::size_t i = 0; i < a.count; ++i) {
    auto p = a.params;
    p.seed = a.params.seed + i;
    char name[32];
    std::snprintf(name, sizeof name, "synth_%03zu.hsc", i);
    hsdata::write_cube(hsdata::synth_cube(p), a.out_dir / name);
    std::cout << (a.out_dir / name).string() << '\n';
  }
  return kExitOk;
}

struct PrepareArgs {
  dataset::PrepareOptions opt;
  std::vector<std::string> inputs;
  fs::path out = "dataset";
  bool lr_pixel_sigma = false;
};

int cmd_prepare(PrepareArgs a) {
  a.opt.patch.hr_size = a.opt.scale * a.opt.patch.lr_size;
  if (a.lr_pixel_sigma) {
    auto spec = resample::DegradationSpec::for_spectrometer(BandInfo::for_band(a.opt.band_id).spectrometer);
    spec.scale = a.opt.scale;
    spec.sigma_in_lr_pixels = true;
    a.opt.degradation = spec;
  }
  std::vector<HsCube> cubes;
  for (const auto& path : a.inputs) cubes.push_back(hsdata::read_cube(path));
  const auto ds = dataset::prepare(cubes, a.opt);
  dataset::write_dataset(ds, a.out);
  std::cout << "tiles " << ds.hr.size() << "  rejected " << ds.hr.rejected.size() << "  split "
            << ds.split.train.size() << '/' << ds.split.val.size() << '/' << ds.split.test.size() << "  norm ["
            << ds.norm.lo << ", " << ds.norm.hi << "]\n";
  return kExitOk;
}

struct TrainArgs {
  int band = 3;
  std::string config;
  fs::path dataset;
  fs::path out = "run";
  std::string variant = "s";
  std::string resume;
  bool verbose = false;
};

int cmd_train(const TrainArgs& a) {
  train::TrainConfig tc;
  if (!a.config.empty()) tc = train::train_config_from_json(read_text(a.config));
  tc.out_dir = a.out;
  tc.verbose = tc.verbose || a.verbose;

  const auto ds = dataset::read_dataset(a.dataset);
  S5DSCR_CHECK(ds.band_id == a.band, ErrorCode::InvalidArgument,
               "dataset holds band " + std::to_string(ds.band_id) + ", not band " + std::to_string(a.band));
  const auto bd = dataset::make_band_dataset(ds);
  S5DSCR_CHECK(!bd.train.empty(), ErrorCode::InvalidArgument, "dataset has no training patches");
  const std::size_t channels = bd.train.front().lr.channels;
  auto mc = a.variant == "full" ? model::ModelConfig::s5dscr(channels) : model::ModelConfig::s5dscr_s(channels);
  mc.scale = ds.scale;

  ensure_dir(tc.out_dir);
  write_text(tc.out_dir / "train_config.json", train::to_json(tc) + "\n");
  const auto run = train::fit(bd, mc, tc, a.resume.empty() ? std::nullopt : std::optional<fs::path>(a.resume));
  std::cout << "epochs " << run.history.size() << "  best_val_loss " << run.best_val_loss << "  weights "
            << run.best_checkpoint.string() << '\n';
  return kExitOk;
}

struct SrArgs {
  std::string weights;
  fs::path input;
  fs::path output;
  bool bicubic_only = false;
  std::size_t scale = 4;
};

int cmd_sr(const SrArgs& a) {
  const auto lr = hsdata::read_cube(a.input);
  HsCube out;
  out.band = lr.band;
  if (a.bicubic_only) {
    out.cube = resample::bicubic_upsample(lr.cube, a.scale);
    out.provenance = lr.provenance + " | bicubic x" + std::to_string(a.scale);
  } else {
    S5DSCR_CHECK(!a.weights.empty(), ErrorCode::InvalidArgument, "--weights is required unless --bicubic-only");
    const auto w = model::load_weights(a.weights, lr.cube.channels);
    out.cube = model::super_resolve(w, lr.cube);
    out.provenance = lr.provenance + " | s5dscr " + fs::path(a.weights).filename().string();
  }
  S5DSCR_CHECK(out.cube.all_finite(), ErrorCode::NumericFailure, "super-resolved cube contains NaN or Inf");
  const auto side = hsdata::read_sidecar(a.input);
  hsdata::write_cube(out, a.output, side ? side->norm : std::nullopt);
  return kExitOk;
}

struct EvalArgs {
  fs::path ref;
  std::vector<std::string> tests;
  fs::path out = "eval";
  int band = 0;
  bool no_png = false;
};

int cmd_eval(const EvalArgs& a) {
  const auto ref = hsdata::read_cube(a.ref);
  std::vector<metrics::LabeledCube> tests;
  for (const auto& spec : a.tests) {
    const auto eq = spec.find('=');
    S5DSCR_CHECK(eq != std::string::npos && eq > 0 && eq + 1 < spec.size(), ErrorCode::InvalidArgument,
                 "--test expects label=path, got '" + spec + "'");
    const std::string label = spec.substr(0, eq);
    auto cube = hsdata::read_cube(spec.substr(eq + 1)).cube;
    S5DSCR_CHECK(cube.same_shape(ref.cube), ErrorCode::ShapeMismatch, "'" + label + "' differs in shape from --ref");
    tests.emplace_back(label, std::move(cube));
  }
  const int band = a.band ? a.band : ref.band.band_id;
  const auto report = metrics::evaluate(ref.cube, tests, band);

  ensure_dir(a.out);
  write_text(a.out / "report.csv", report.to_csv());
  write_text(a.out / "report.json", report.to_json() + "\n");
  if (!a.no_png && ref.cube.channels >= 3) {
    const auto basis = metrics::fit_pca(ref.cube);
    metrics::write_png(metrics::pca_rgb(basis, ref.cube), a.out / "pca_ref.png");
    for (const auto& [label, cube] : tests) metrics::write_png(metrics::pca_rgb(basis, cube), a.out / ("pca_" + label + ".png"));
  }
  std::cout << report.to_csv();
  return kExitOk;
}

struct GradcheckArgs {
  std::size_t channels = 3;
  std::size_t size = 8;
  std::size_t modules = 1;
  std::size_t pointwise = 1;
  std::uint64_t seed = 0;
  double tolerance = 1e-4;
};

int cmd_gradcheck(const GradcheckArgs& a) {
  model::ModelConfig cfg = model::ModelConfig::s5dscr_s(a.channels);
  cfg.n_modules = a.modules;
  cfg.pointwise_per_module = a.pointwise;
  cfg.validate();
  const auto w = model::init_weights(cfg, a.seed).cast<double>();
  std::vector<ag::NamedTensor> params;
  const auto names = w.parameter_names();
  const auto ptrs = w.parameters();
  Rng rng(a.seed + 1);
  for (std::size_t i = 0; i < ptrs.size(); ++i) {
    auto t = *ptrs[i];
    // Non-zero biases so every bias path is exercised.
    if (names[i].find("bias") != std::string::npos)
      for (auto& v : t.span()) v = uniform(rng, -0.1, 0.1);
    params.emplace_back(names[i], std::move(t));
  }
  Tensor4<double> lr(1, a.channels, a.size, a.size), hr(1, a.channels, a.size * cfg.scale, a.size * cfg.scale);
  for (auto& v : lr.span()) v = uniform01(rng);
  for (auto& v : hr.span()) v = uniform01(rng);
  const auto base = model::bicubic_base(lr, cfg.scale);
  ag::GradCheckOptions opt;
  opt.tolerance = a.tolerance;
  opt.seed = a.seed;
  const auto rep = ag::grad_check(params, [&](ag::Tape<double>& t, std::span<const ag::Var<double>> p) {
    return ag::mse_loss(model::forward_graph<double>(cfg, p, t.leaf(base)), t.leaf(hr));
  }, opt);
  std::cout << rep.summary();
  return rep.pass ? kExitOk : kExitNumeric;
}

struct ParamsArgs {
  model::ModelConfig cfg;
};

int cmd_params(ParamsArgs a) {
  a.cfg.validate();
  std::cout << model::param_count(a.cfg) << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hyperspectral super-resolution with depthwise separable convolutions"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write synthetic correlated cubes");
  s->add_option("--channels", synth.params.n_channels)->check(CLI::PositiveNumber);
  s->add_option("--height", synth.params.height);
  s->add_option("--width", synth.params.width);
  s->add_option("--count", synth.count)->check(CLI::PositiveNumber);
  s->add_option("--seed", synth.params.seed);
  s->add_option("--band", synth.params.band_id)->check(CLI::Range(2, 8));
  s->add_option("--spatial-sigma", synth.params.spatial_sigma);
  s->add_option("--channel-mix", synth.params.channel_mix);
  s->add_option("--out-dir", synth.out_dir);

  PrepareArgs prep;
  auto* p = app.add_subcommand("prepare", "Tile, filter, split, normalize and degrade cubes into a dataset");
  p->add_option("--band", prep.opt.band_id)->check(CLI::Range(2, 8));
  p->add_option("--scale", prep.opt.scale)->check(CLI::Range(2, 16));
  p->add_option("--tile-h", prep.opt.tile_h);
  p->add_option("--tile-w", prep.opt.tile_w);
  p->add_option("--seed", prep.opt.seed);
  p->add_option("--lr-patch", prep.opt.patch.lr_size, "LR patch size");
  p->add_option("--lr-stride", prep.opt.patch.lr_stride, "LR patch stride");
  p->add_option("--iqr-k", prep.opt.iqr_k);
  p->add_option("--clip-pct", prep.opt.clip_pct);
  p->add_flag("--sigma-in-lr-pixels", prep.lr_pixel_sigma, "Scale the sensor sigmas by the scale factor");
  p->add_option("--out", prep.out)->required();
  p->add_option("inputs", prep.inputs, "HSC cubes")->required()->check(CLI::ExistingFile);

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a prepared dataset");
  t->add_option("--band", tr.band)->required()->check(CLI::Range(2, 8));
  t->add_option("--config", tr.config, "Training config JSON")->check(CLI::ExistingFile);
  t->add_option("--dataset", tr.dataset)->required()->check(CLI::ExistingDirectory);
  t->add_option("--out", tr.out);
  t->add_option("--model", tr.variant, "s (single module) or full")->check(CLI::IsMember({"s", "full"}));
  t->add_option("--resume", tr.resume, "Checkpoint to continue from")->check(CLI::ExistingFile);
  t->add_flag("--verbose", tr.verbose);

  SrArgs sr;
  auto* r = app.add_subcommand("sr", "Super-resolve an LR cube");
  r->add_option("--weights", sr.weights)->check(CLI::ExistingFile);
  r->add_option("--input", sr.input)->required()->check(CLI::ExistingFile);
  r->add_option("--output", sr.output)->required();
  r->add_flag("--bicubic-only", sr.bicubic_only, "Skip the network, bicubic upsampling only");
  r->add_option("--scale", sr.scale, "Scale for --bicubic-only")->check(CLI::Range(2, 16));

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score reconstructions against a reference cube");
  e->add_option("--ref", ev.ref)->required()->check(CLI::ExistingFile);
  e->add_option("--test", ev.tests, "label=path, repeatable")->required();
  e->add_option("--out", ev.out);
  e->add_option("--band", ev.band)->check(CLI::Range(2, 8));
  e->add_flag("--no-png", ev.no_png);

  GradcheckArgs gc;
  auto* g = app.add_subcommand("gradcheck", "Finite-difference check of the network gradients");
  g->add_option("--channels", gc.channels)->check(CLI::PositiveNumber);
  g->add_option("--size", gc.size)->check(CLI::PositiveNumber);
  g->add_option("--modules", gc.modules)->check(CLI::PositiveNumber);
  g->add_option("--pointwise-per-module", gc.pointwise)->check(CLI::PositiveNumber);
  g->add_option("--seed", gc.seed);
  g->add_option("--tolerance", gc.tolerance);

  ParamsArgs pa;
  auto* q = app.add_subcommand("params", "Print the parameter count of a configuration");
  q->add_option("--channels", pa.cfg.channels)->required();
  q->add_option("--modules", pa.cfg.n_modules);
  q->add_option("--pointwise-per-module", pa.cfg.pointwise_per_module);
  q->add_option("--kernel", pa.cfg.dw_kernel);
  q->add_flag("--share-weights", pa.cfg.share_module_weights);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int rc = app.exit(err);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_threads(0);
    if (*s) return cmd_synth(synth);
    if (*p) return cmd_prepare(prep);
    if (*t) return cmd_train(tr);
    if (*r) return cmd_sr(sr);
    if (*e) return cmd_eval(ev);
    if (*g) return cmd_gradcheck(gc);
    if (*q) return cmd_params(pa);
  } catch (const Error& err) {
    std::cerr << "error: " << err.what() << '\n';
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kExitData;
  }
  return kExitUsage;
}
