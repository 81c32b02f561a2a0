#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "s5dscr/error.hpp"

namespace s5dscr {

struct Dims4 {
  std::size_t b = 0, c = 0, h = 0, w = 0;

  std::size_t numel() const { return b * c * h * w; }
  friend bool operator==(const Dims4&, const Dims4&) = default;
};

std::string to_string(const Dims4& d);

/// Dense (batch, channel, height, width) array, row-major.
template <typename T>
class Tensor4 {
 public:
  Tensor4() = default;
  explicit Tensor4(Dims4 dims, T fill = T{0}) : dims_(dims), data_(dims.numel(), fill) {}
  Tensor4(std::size_t b, std::size_t c, std::size_t h, std::size_t w, T fill = T{0})
      : Tensor4(Dims4{b, c, h, w}, fill) {}

  const Dims4& dims() const { return dims_; }
  std::size_t numel() const { return data_.size(); }
  std::size_t plane() const { return dims_.h * dims_.w; }

  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }
  std::span<T> span() { return data_; }
  std::span<const T> span() const { return data_; }
  std::vector<T>& values() { return data_; }
  const std::vector<T>& values() const { return data_; }

  T& operator[](std::size_t i) { return data_[i]; }
  const T& operator[](std::size_t i) const { return data_[i]; }

  std::size_t offset(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return ((b * dims_.c + c) * dims_.h + y) * dims_.w + x;
  }
  T& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) { return data_[offset(b, c, y, x)]; }
  const T& at(std::size_t b, std::size_t c, std::size_t y, std::size_t x) const {
    return data_[offset(b, c, y, x)];
  }

  /// Contiguous (h, w) plane of sample b, channel c.
  std::span<T> plane(std::size_t b, std::size_t c) { return {data_.data() + offset(b, c, 0, 0), plane()}; }
  std::span<const T> plane(std::size_t b, std::size_t c) const {
    return {data_.data() + offset(b, c, 0, 0), plane()};
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](T v) { return std::isfinite(v); });
  }

  template <typename U>
  Tensor4<U> cast() const {
    Tensor4<U> out(dims_);
    std::transform(data_.begin(), data_.end(), out.data(), [](T v) { return static_cast<U>(v); });
    return out;
  }

  friend bool operator==(const Tensor4& a, const Tensor4& b) { return a.dims_ == b.dims_ && a.data_ == b.data_; }

 private:
  Dims4 dims_{};
  std::vector<T> data_;
};

}  // namespace s5dscr
