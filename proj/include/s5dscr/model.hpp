#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "s5dscr/autograd.hpp"
#include "s5dscr/cube.hpp"
#include "s5dscr/tensor.hpp"

namespace s5dscr::model {

/// Architecture hyperparameters. S5-DSCR is L=5 with three pointwise layers
/// per module; S5-DSCR-S is a single module with one pointwise layer.
struct ModelConfig {
  std::size_t channels = 8;
  std::size_t n_modules = 1;
  std::size_t dw_kernel = 5;
  std::size_t pointwise_per_module = 1;
  std::size_t scale = 4;
  bool share_module_weights = false;
  bool final_linear = true;

  static ModelConfig s5dscr(std::size_t channels);
  static ModelConfig s5dscr_s(std::size_t channels);

  void validate() const;
  std::size_t stored_modules() const { return share_module_weights ? 1 : n_modules; }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

template <typename T>
struct DscModuleWeights {
  Tensor4<T> dw_weight;  // (C, 1, k, k)
  Tensor4<T> dw_bias;    // (1, C, 1, 1)
  std::vector<Tensor4<T>> pw_weight;  // m_p x (C, C, 1, 1)
  std::vector<Tensor4<T>> pw_bias;    // m_p x (1, C, 1, 1)
};

template <typename T>
struct ModelWeightsT {
  ModelConfig config;
  std::vector<DscModuleWeights<T>> modules;

  /// All trainable tensors in declaration order: per stored module the
  /// depthwise weight and bias, then each pointwise weight and bias.
  std::vector<Tensor4<T>*> parameters();
  std::vector<const Tensor4<T>*> parameters() const;
  std::vector<std::string> parameter_names() const;
  std::size_t numel() const;

  template <typename U>
  ModelWeightsT<U> cast() const {
    ModelWeightsT<U> out;
    out.config = config;
    for (const auto& m : modules) {
      DscModuleWeights<U> mu{m.dw_weight.template cast<U>(), m.dw_bias.template cast<U>(), {}, {}};
      for (const auto& t : m.pw_weight) mu.pw_weight.push_back(t.template cast<U>());
      for (const auto& t : m.pw_bias) mu.pw_bias.push_back(t.template cast<U>());
      out.modules.push_back(std::move(mu));
    }
    return out;
  }
};

using ModelWeights = ModelWeightsT<float>;

/// Allocates zero-filled weights with the shapes implied by `config`.
template <typename T>
ModelWeightsT<T> zero_weights(const ModelConfig& config);

/// Uniform in +-sqrt(6 / fan_in); fan_in is k*k for depthwise, C for pointwise. Biases zero.
ModelWeights init_weights(const ModelConfig& config, std::uint64_t seed);

/// L * [(k^2 C + C) + m_p (C^2 + C)], counted once when modules share weights.
std::size_t param_count(const ModelConfig& config);

/// Bicubic pre-upsampling of every (sample, channel) plane.
template <typename T>
Tensor4<T> bicubic_base(const Tensor4<T>& lr, std::size_t scale);

/// Residual DSC stack on a recorded base. `params` follow parameters() order.
/// Returns base + r.
template <typename T>
ag::Var<T> forward_graph(const ModelConfig& config, std::span<const ag::Var<T>> params, ag::Var<T> base);

/// Inference: bicubic base plus the DSC residual.
template <typename T>
Tensor4<T> forward(const ModelWeightsT<T>& weights, const Tensor4<T>& lr);

/// Convenience wrapper for a single [C, h, w] cube.
Cube super_resolve(const ModelWeights& weights, const Cube& lr);

Tensor4<float> to_tensor(const Cube& cube);
Cube to_cube(const Tensor4<float>& t, std::size_t sample = 0);

// Weight files: "DSCW" | version u16 | C, L, k, m_p, s, flags u32 | tensors f32,
// all little-endian. flags bit 0 = share_module_weights, bit 1 = final_linear.
inline constexpr std::uint16_t kWeightFormatVersion = 1;

void save_weights(const ModelWeights& weights, const std::filesystem::path& path);

/// Throws ShapeMismatch when `expected_channels` is given and differs.
ModelWeights load_weights(const std::filesystem::path& path,
                          std::optional<std::size_t> expected_channels = std::nullopt);

}  // namespace s5dscr::model
