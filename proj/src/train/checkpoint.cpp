#include <array>
#include <set>

#include "../model/weights_codec.hpp"
#include "json.hpp"
#include "s5dscr/train.hpp"

namespace s5dscr::train {
namespace {

constexpr std::array<char, 4> kMagic{'D', 'S', 'C', 'T'};
constexpr std::uint16_t kVersion = 1;

void put_floats(s5dscr::detail::ByteWriter& out, const std::vector<std::vector<float>>& arrays) {
  for (const auto& a : arrays)
    for (float v : a) out.put<float>(v);
}

void get_floats(s5dscr::detail::ByteReader& in, std::vector<std::vector<float>>& arrays) {
  for (auto& a : arrays)
    for (auto& v : a) v = in.get<float>();
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  s5dscr::detail::ByteWriter out;
  out.put_bytes(kMagic.data(), kMagic.size());
  out.put<std::uint16_t>(kVersion);
  out.put<std::uint64_t>(c.epoch);
  out.put<double>(c.best_val_loss);
  out.put<double>(c.plateau.best_val);
  out.put<std::int32_t>(c.plateau.epochs_since_improve);
  out.put<double>(c.plateau.factor);
  out.put<std::int32_t>(c.plateau.patience);
  out.put<double>(c.plateau.rel_threshold);
  out.put<double>(c.plateau.min_lr);
  out.put<double>(c.plateau.current_lr);
  out.put<double>(c.adam.lr);
  out.put<double>(c.adam.beta1);
  out.put<double>(c.adam.beta2);
  out.put<double>(c.adam.eps);
  out.put<std::uint64_t>(c.adam.t);
  out.put_string(c.rng_state);
  out.put<std::uint64_t>(c.history.size());
  for (const auto& r : c.history) {
    out.put<std::uint64_t>(r.epoch);
    out.put<double>(r.train_loss);
    out.put<double>(r.val_loss);
    out.put<double>(r.lr);
  }
  model::detail::encode_weights(c.weights, out);
  put_floats(out, c.adam.m);
  put_floats(out, c.adam.v);
  out.write_file(path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  s5dscr::detail::ByteReader in(s5dscr::detail::ByteReader::slurp(path), ErrorCode::Corrupt);
  S5DSCR_CHECK(in.starts_with(kMagic.data(), kMagic.size()), ErrorCode::Corrupt, path.string() + " is not a checkpoint");
  in.skip(4);
  const auto version = in.get<std::uint16_t>();
  S5DSCR_CHECK(version == kVersion, ErrorCode::VersionMismatch, "unsupported checkpoint version");
  Checkpoint c;
  c.epoch = in.get<std::uint64_t>();
  c.best_val_loss = in.get<double>();
  c.plateau.best_val = in.get<double>();
  c.plateau.epochs_since_improve = in.get<std::int32_t>();
  c.plateau.factor = in.get<double>();
  c.plateau.patience = in.get<std::int32_t>();
  c.plateau.rel_threshold = in.get<double>();
  c.plateau.min_lr = in.get<double>();
  c.plateau.current_lr = in.get<double>();
  c.adam.lr = in.get<double>();
  c.adam.beta1 = in.get<double>();
  c.adam.beta2 = in.get<double>();
  c.adam.eps = in.get<double>();
  c.adam.t = in.get<std::uint64_t>();
  c.rng_state = in.get_string();
  const auto n_hist = in.get<std::uint64_t>();
  S5DSCR_CHECK(n_hist <= in.remaining() / 32, ErrorCode::Corrupt, "history length exceeds file size");
  for (std::uint64_t i = 0; i < n_hist; ++i) {
    EpochRecord r;
    r.epoch = in.get<std::uint64_t>();
    r.train_loss = in.get<double>();
    r.val_loss = in.get<double>();
    r.lr = in.get<double>();
    c.history.push_back(r);
  }
  c.weights = model::detail::decode_weights(in, std::nullopt);
  const auto fresh = AdamState::for_weights(c.weights);
  c.adam.m = fresh.m;
  c.adam.v = fresh.v;
  get_floats(in, c.adam.m);
  get_floats(in, c.adam.v);
  S5DSCR_CHECK(in.remaining() == 0, ErrorCode::Corrupt, "trailing bytes in checkpoint");
  return c;
}

TrainConfig train_config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("training config is not valid JSON: ") + e.what());
  }
  S5DSCR_CHECK(j.is_object(), ErrorCode::InvalidArgument, "training config must be a JSON object");
  static const std::set<std::string> known{"lr",      "batch_size", "max_epochs", "patience", "factor",
                                           "rel_threshold", "min_lr", "stop_lr",  "seeds",    "paths", "verbose"};
  for (const auto& [key, value] : j.items())
    S5DSCR_CHECK(known.count(key) == 1, ErrorCode::InvalidArgument, "unknown training config key '" + key + "'");

  TrainConfig c;
  try {
    c.lr = j.value("lr", c.lr);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.factor = j.value("factor", c.factor);
    c.rel_threshold = j.value("rel_threshold", c.rel_threshold);
    c.min_lr = j.value("min_lr", c.min_lr);
    c.stop_lr = j.value("stop_lr", c.stop_lr);
    c.verbose = j.value("verbose", c.verbose);
    if (j.contains("seeds")) {
      c.init_seed = j["seeds"].value("init", c.init_seed);
      c.shuffle_seed = j["seeds"].value("shuffle", c.shuffle_seed);
    }
    if (j.contains("paths")) c.out_dir = j["paths"].value("out_dir", c.out_dir.string());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidArgument, std::string("training config: ") + e.what());
  }
  S5DSCR_CHECK(c.lr > 0 && c.batch_size >= 1 && c.patience >= 1 && c.factor > 0 && c.factor < 1,
               ErrorCode::InvalidArgument, "training config values out of range");
  return c;
}

std::string to_json(const TrainConfig& c) {
  nlohmann::json j{{"lr", c.lr},
                   {"batch_size", c.batch_size},
                   {"max_epochs", c.max_epochs},
                   {"patience", c.patience},
                   {"factor", c.factor},
                   {"rel_threshold", c.rel_threshold},
                   {"min_lr", c.min_lr},
                   {"stop_lr", c.stop_lr},
                   {"verbose", c.verbose},
                   {"seeds", {{"init", c.init_seed}, {"shuffle", c.shuffle_seed}}},
                   {"paths", {{"out_dir", c.out_dir.string()}}}};
  return j.dump(2);
}

}  // namespace s5dscr::train
