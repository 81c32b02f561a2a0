#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "s5dscr/hsdata.hpp"
#include "s5dscr/model.hpp"
#include "s5dscr/rng.hpp"

namespace s5dscr::train {

struct AdamState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<std::vector<float>> m;  // one per parameter tensor
  std::vector<std::vector<float>> v;

  static AdamState for_weights(const model::ModelWeights& weights, double lr = 1e-3);
};

/// theta <- theta - lr * m_hat / (sqrt(v_hat) + eps). Throws NumericFailure on a
/// non-finite gradient, leaving weights and state untouched.
void adam_step(model::ModelWeights& weights, const std::vector<Tensor4<float>>& grads, AdamState& state);

/// Reduce-on-plateau on the validation loss.
struct PlateauState {
  double best_val = std::numeric_limits<double>::infinity();
  int epochs_since_improve = 0;
  double factor = 0.1;
  int patience = 3;
  double rel_threshold = 1e-4;
  double min_lr = 1e-7;
  double current_lr = 1e-3;
};

/// Returns true when the learning rate was reduced on this call.
bool plateau_step(PlateauState& state, double val_loss);

struct EpochResult {
  double mean_loss = 0.0;
  std::size_t steps = 0;
};

/// Stacks patches [first, last) of `order` into LR and HR batches.
std::pair<Tensor4<float>, Tensor4<float>> make_batch(const std::vector<hsdata::PatchPair>& patches,
                                                     const std::vector<std::size_t>& order, std::size_t first,
                                                     std::size_t last);

/// One pass over `patches` in an rng-shuffled order; forward, MSE, backward
/// and an Adam step per batch. Returns the mean batch loss.
EpochResult train_epoch(model::ModelWeights& weights, AdamState& adam, const std::vector<hsdata::PatchPair>& patches,
                        std::size_t batch_size, Rng& rng);

/// Mean per-patch MSE of the model on `patches`, without gradients.
double evaluate_loss(const model::ModelWeights& weights, const std::vector<hsdata::PatchPair>& patches,
                     std::size_t batch_size = 16);

struct TrainConfig {
  double lr = 1e-3;
  std::size_t batch_size = 16;
  std::size_t max_epochs = 50;
  int patience = 3;
  double factor = 0.1;
  double rel_threshold = 1e-4;
  double min_lr = 1e-7;
  double stop_lr = 1e-6;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 1;
  std::filesystem::path out_dir = "run";
  bool verbose = false;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double lr = 0.0;
};

struct BandDataset {
  int band_id = 3;
  std::vector<hsdata::PatchPair> train;
  std::vector<hsdata::PatchPair> val;
  std::vector<hsdata::PatchPair> test;
};

struct TrainRun {
  int band_id = 0;
  model::ModelConfig config;
  std::uint64_t split_seed = 0;
  std::vector<EpochRecord> history;
  std::filesystem::path best_checkpoint;
  std::filesystem::path last_checkpoint;
  double best_val_loss = std::numeric_limits<double>::infinity();
  double wall_seconds = 0.0;
};

/// Full optimizer state between epochs.
struct Checkpoint {
  model::ModelWeights weights;
  AdamState adam;
  PlateauState plateau;
  std::string rng_state;
  std::size_t epoch = 0;
  double best_val_loss = std::numeric_limits<double>::infinity();
  std::vector<EpochRecord> history;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Writes `best.dscw` (weights with the lowest validation loss),
/// `last.ckpt` (resumable state) and `history.csv` into train_config.out_dir.
/// With `resume`, continues from that checkpoint.
TrainRun fit(const BandDataset& dataset, const model::ModelConfig& model_config, const TrainConfig& train_config,
             const std::optional<std::filesystem::path>& resume = std::nullopt);

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

TrainConfig train_config_from_json(const std::string& json_text);
std::string to_json(const TrainConfig& config);

}  // namespace s5dscr::train
