#pragma once

// Tape-based reverse-mode differentiation over Tensor4, restricted to the
// operators the super-resolution network uses. Instantiated for float
// (training) and double (gradient checking).

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "s5dscr/tensor.hpp"

namespace s5dscr::ag {

template <typename T>
class Tape;

/// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor4<T>& value() const;
  const Dims4& dims() const { return value().dims(); }
};

template <typename T>
class Tape {
 public:
  /// Receives the gradient of the node's output; accumulates into inputs.
  using BackwardFn = std::function<void(Tape&, const Tensor4<T>& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor4<T> value, bool requires_grad = false);

  /// Appends an op result. It requires grad iff any input does.
  Var<T> record(Tensor4<T> value, std::vector<std::size_t> inputs, BackwardFn backward);

  const Tensor4<T>& value(std::size_t id) const { return nodes_.at(id).value; }
  bool requires_grad(std::size_t id) const { return nodes_.at(id).requires_grad; }

  /// Gradient of a node after backward(); nullptr if none was produced.
  const Tensor4<T>* grad(Var<T> v) const;

  /// Zero-initialized on first access; used by backward rules to accumulate.
  Tensor4<T>& grad_buffer(std::size_t id);

  /// Reverse sweep from a scalar (1x1x1x1) node. A tape can be swept once.
  void backward(Var<T> loss);

  bool consumed() const { return consumed_; }
  std::size_t size() const { return nodes_.size(); }

  /// ReLU ops append the sign pattern of their input; finite-difference
  /// checks compare it to detect kinks crossed by a perturbation.
  void note_activation_pattern(std::span<const T> pre_activation);
  const std::vector<bool>& activation_pattern() const { return pattern_; }

 private:
  struct Node {
    Tensor4<T> value;
    std::optional<Tensor4<T>> grad;
    bool requires_grad = false;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
  };

  std::vector<Node> nodes_;
  std::vector<bool> pattern_;
  bool consumed_ = false;
};

template <typename T>
const Tensor4<T>& Var<T>::value() const {
  return tape->value(id);
}

// ---------------------------------------------------------------------------
// Operators

/// Per-channel k x k correlation with zero padding k/2 (same-size output).
/// x: (B, C, H, W), weight: (C, 1, k, k), bias: (1, C, 1, 1).
template <typename T>
Var<T> depthwise_conv(Var<T> x, Var<T> weight, Var<T> bias);

/// 1x1 convolution. x: (B, Cin, H, W), weight: (Cout, Cin, 1, 1), bias: (1, Cout, 1, 1).
template <typename T>
Var<T> pointwise_conv(Var<T> x, Var<T> weight, Var<T> bias);

template <typename T>
Var<T> relu(Var<T> x);

template <typename T>
Var<T> add(Var<T> x, Var<T> y);

/// Sum of all elements, as a (1, 1, 1, 1) scalar.
template <typename T>
Var<T> sum(Var<T> x);

/// Mean of squared differences over every element, as a scalar.
template <typename T>
Var<T> mse_loss(Var<T> pred, Var<T> target);

// ---------------------------------------------------------------------------
// Finite-difference verification (float64)

struct GradCheckOptions {
  double tolerance = 1e-4;
  double h = 1e-3;
  /// Tensors with more coordinates are sampled down to this many.
  std::size_t coords_per_tensor = 64;
  std::uint64_t seed = 0;
  /// Denominator floor of the relative error.
  double abs_floor = 1e-8;
};

struct TensorCheck {
  std::string name;
  std::size_t checked = 0;
  std::size_t skipped_kinks = 0;
  double max_rel_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<TensorCheck> tensors;
  double max_rel_error = 0.0;
  bool pass = true;

  std::string summary() const;
};

using NamedTensor = std::pair<std::string, Tensor4<double>>;
using GraphBuilder = std::function<Var<double>(Tape<double>&, std::span<const Var<double>> params)>;

/// Compares backward() against central differences for every tensor in
/// `params`. The builder must be deterministic and return a scalar loss.
/// The step shrinks (down to h/1000) while a perturbation flips a ReLU;
/// coordinates that still cross a kink are skipped and counted.
GradCheckReport grad_check(const std::vector<NamedTensor>& params, const GraphBuilder& build,
                           const GradCheckOptions& options = {});

}  // namespace s5dscr::ag
