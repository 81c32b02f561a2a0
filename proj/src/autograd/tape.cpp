#include <algorithm>

#include "s5dscr/autograd.hpp"

namespace s5dscr::ag {

template <typename T>
Var<T> Tape<T>::leaf(Tensor4<T> value, bool requires_grad) {
  S5DSCR_CHECK(!consumed_, ErrorCode::TapeConsumed, "cannot record on a consumed tape");
  S5DSCR_CHECK(value.all_finite(), ErrorCode::NonFinite, "leaf contains non-finite values");
  nodes_.push_back(Node{std::move(value), std::nullopt, requires_grad, {}, nullptr});
  return {this, nodes_.size() - 1};
}

template <typename T>
Var<T> Tape<T>::record(Tensor4<T> value, std::vector<std::size_t> inputs, BackwardFn backward) {
  S5DSCR_CHECK(!consumed_, ErrorCode::TapeConsumed, "cannot record on a consumed tape");
  const bool rg = std::any_of(inputs.begin(), inputs.end(), [this](std::size_t i) { return nodes_[i].requires_grad; });
  nodes_.push_back(Node{std::move(value), std::nullopt, rg, std::move(inputs), rg ? std::move(backward) : nullptr});
  return {this, nodes_.size() - 1};
}

template <typename T>
const Tensor4<T>* Tape<T>::grad(Var<T> v) const {
  const auto& n = nodes_.at(v.id);
  return n.grad ? &*n.grad : nullptr;
}

template <typename T>
Tensor4<T>& Tape<T>::grad_buffer(std::size_t id) {
  auto& n = nodes_.at(id);
  if (!n.grad) n.grad.emplace(n.value.dims());
  return *n.grad;
}

template <typename T>
void Tape<T>::backward(Var<T> loss) {
  S5DSCR_CHECK(loss.tape == this, ErrorCode::InvalidArgument, "loss belongs to a different tape");
  S5DSCR_CHECK(!consumed_, ErrorCode::TapeConsumed, "backward already ran on this tape");
  S5DSCR_CHECK(value(loss.id).numel() == 1, ErrorCode::NotScalar,
               "backward needs a scalar, got " + to_string(value(loss.id).dims()));
  consumed_ = true;
  if (!nodes_[loss.id].requires_grad) return;
  grad_buffer(loss.id)[0] = T{1};
  for (std::size_t i = loss.id + 1; i-- > 0;) {
    auto& n = nodes_[i];
    if (!n.backward || !n.grad) continue;
    n.backward(*this, *n.grad);
  }
  // Intermediate grads are kept; saved closures are released.
  for (auto& n : nodes_) n.backward = nullptr;
}

template <typename T>
void Tape<T>::note_activation_pattern(std::span<const T> pre) {
  pattern_.reserve(pattern_.size() + pre.size());
  for (T v : pre) pattern_.push_back(v > T{0});
}

template class Tape<float>;
template class Tape<double>;

}  // namespace s5dscr::ag
