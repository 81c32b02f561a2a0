#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <numeric>
#include <sstream>

#include "s5dscr/train.hpp"

namespace s5dscr::train {

std::pair<Tensor4<float>, Tensor4<float>> make_batch(const std::vector<hsdata::PatchPair>& patches,
                                                     const std::vector<std::size_t>& order, std::size_t first,
                                                     std::size_t last) {
  S5DSCR_CHECK(first < last && last <= order.size(), ErrorCode::InvalidArgument, "empty batch range");
  const auto& p0 = patches.at(order[first]);
  Tensor4<float> lr(last - first, p0.lr.channels, p0.lr.height, p0.lr.width);
  Tensor4<float> hr(last - first, p0.hr.channels, p0.hr.height, p0.hr.width);
  for (std::size_t i = first; i < last; ++i) {
    const auto& p = patches.at(order[i]);
    S5DSCR_CHECK(p.lr.same_shape(p0.lr) && p.hr.same_shape(p0.hr), ErrorCode::ShapeMismatch,
                 "patches in one batch must share dimensions");
    std::copy(p.lr.data.begin(), p.lr.data.end(), lr.plane(i - first, 0).data());
    std::copy(p.hr.data.begin(), p.hr.data.end(), hr.plane(i - first, 0).data());
  }
  return {std::move(lr), std::move(hr)};
}

EpochResult train_epoch(model::ModelWeights& weights, AdamState& adam, const std::vector<hsdata::PatchPair>& patches,
                        std::size_t batch_size, Rng& rng) {
  S5DSCR_CHECK(!patches.empty(), ErrorCode::InvalidArgument, "no training patches");
  S5DSCR_CHECK(batch_size >= 1, ErrorCode::InvalidArgument, "batch_size must be >= 1");

  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), 0);
  shuffle<std::size_t>(order, rng);

  EpochResult result;
  double total = 0.0;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t last = std::min(first + batch_size, order.size());
    auto [lr, hr] = make_batch(patches, order, first, last);

    ag::Tape<float> tape;
    std::vector<ag::Var<float>> params;
    for (const auto* p : weights.parameters()) params.push_back(tape.leaf(*p, true));
    const auto base = tape.leaf(model::bicubic_base(lr, weights.config.scale), false);
    const auto target = tape.leaf(std::move(hr), false);
    const auto pred = model::forward_graph<float>(weights.config, params, base);
    const auto loss = ag::mse_loss(pred, target);
    const double value = loss.value()[0];
    S5DSCR_CHECK(std::isfinite(value), ErrorCode::NumericFailure,
                 "non-finite loss at batch " + std::to_string(result.steps));
    tape.backward(loss);

    std::vector<Tensor4<float>> grads;
    grads.reserve(params.size());
    for (const auto& p : params) {
      const auto* g = tape.grad(p);
      grads.push_back(g ? *g : Tensor4<float>(p.dims()));
    }
    adam_step(weights, grads, adam);
    total += value;
    ++result.steps;
  }
  result.mean_loss = total / static_cast<double>(result.steps);
  return result;
}

double evaluate_loss(const model::ModelWeights& weights, const std::vector<hsdata::PatchPair>& patches,
                     std::size_t batch_size) {
  S5DSCR_CHECK(!patches.empty(), ErrorCode::InvalidArgument, "no patches to evaluate");
  std::vector<std::size_t> order(patches.size());
  std::iota(order.begin(), order.end(), 0);
  double total = 0.0;
  for (std::size_t first = 0; first < order.size(); first += batch_size) {
    const std::size_t last = std::min(first + batch_size, order.size());
    auto [lr, hr] = make_batch(patches, order, first, last);
    const auto pred = model::forward(weights, lr);
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.numel(); ++i) {
      const double d = static_cast<double>(pred[i]) - hr[i];
      acc += d * d;
    }
    total += acc / static_cast<double>(pred.numel()) * static_cast<double>(last - first);
  }
  const double mean = total / static_cast<double>(patches.size());
  S5DSCR_CHECK(std::isfinite(mean), ErrorCode::NumericFailure, "non-finite validation loss");
  return mean;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  S5DSCR_CHECK(out.good(), ErrorCode::Io, "cannot write " + path.string());
  out << "epoch,train_loss,val_loss,lr\n" << std::setprecision(9);
  for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_loss << ',' << r.lr << '\n';
}

TrainRun fit(const BandDataset& data, const model::ModelConfig& model_config, const TrainConfig& cfg,
             const std::optional<std::filesystem::path>& resume) {
  S5DSCR_CHECK(!data.train.empty(), ErrorCode::InvalidArgument, "training split is empty");
  S5DSCR_CHECK(!data.val.empty(), ErrorCode::InvalidArgument, "validation split is empty");
  model_config.validate();
  S5DSCR_CHECK(data.train.front().lr.channels == model_config.channels, ErrorCode::ShapeMismatch,
               "dataset channels differ from the model config");

  const auto t0 = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  S5DSCR_CHECK(!ec, ErrorCode::Io, "cannot create " + cfg.out_dir.string() + ": " + ec.message());

  TrainRun run;
  run.band_id = data.band_id;
  run.config = model_config;
  run.best_checkpoint = cfg.out_dir / "best.dscw";
  run.last_checkpoint = cfg.out_dir / "last.ckpt";

  Checkpoint state;
  Rng rng(cfg.shuffle_seed);
  if (resume) {
    state = load_checkpoint(*resume);
    S5DSCR_CHECK(state.weights.config == model_config, ErrorCode::ShapeMismatch,
                 "checkpoint config differs from the requested model config");
    std::istringstream(state.rng_state) >> rng;
  } else {
    state.weights = model::init_weights(model_config, cfg.init_seed);
    state.adam = AdamState::for_weights(state.weights, cfg.lr);
    state.plateau = PlateauState{std::numeric_limits<double>::infinity(), 0, cfg.factor, cfg.patience,
                                 cfg.rel_threshold, cfg.min_lr, cfg.lr};
    model::save_weights(state.weights, run.best_checkpoint);
    std::ostringstream rs;
    rs << rng;
    state.rng_state = rs.str();
    save_checkpoint(state, run.last_checkpoint);
  }

  for (std::size_t epoch = state.epoch + 1; epoch <= cfg.max_epochs; ++epoch) {
    if (state.plateau.current_lr < cfg.stop_lr) break;
    state.adam.lr = state.plateau.current_lr;
    const auto tr = train_epoch(state.weights, state.adam, data.train, cfg.batch_size, rng);
    const double val = evaluate_loss(state.weights, data.val, cfg.batch_size);
    state.history.push_back({epoch, tr.mean_loss, val, state.adam.lr});
    plateau_step(state.plateau, val);
    if (val < state.best_val_loss) {
      state.best_val_loss = val;
      model::save_weights(state.weights, run.best_checkpoint);
    }
    state.epoch = epoch;
    std::ostringstream rs;
    rs << rng;
    state.rng_state = rs.str();
    save_checkpoint(state, run.last_checkpoint);
    write_history_csv(state.history, cfg.out_dir / "history.csv");
    if (cfg.verbose)
      std::cerr << "epoch " << epoch << "  train " << tr.mean_loss << "  val " << val << "  lr " << state.adam.lr
                << '\n';
  }
  if (state.history.empty()) write_history_csv(state.history, cfg.out_dir / "history.csv");

  run.history = state.history;
  run.best_val_loss = state.best_val_loss;
  run.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return run;
}

}  // namespace s5dscr::train
