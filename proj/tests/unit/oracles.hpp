#pragma once

// Brute-force reference implementations used only by tests. They share no
// code with the library paths they check.

#include <algorithm>
#include <cmath>
#include <vector>

#include "s5dscr/cube.hpp"
#include "s5dscr/rng.hpp"
#include "s5dscr/tensor.hpp"

namespace oracle {

inline s5dscr::Cube random_cube(std::size_t c, std::size_t h, std::size_t w, std::uint64_t seed, double lo = 0.0,
                                double hi = 1.0) {
  s5dscr::Cube cube(c, h, w);
  s5dscr::Rng rng(seed);
  for (auto& v : cube.data) v = static_cast<float>(s5dscr::uniform(rng, lo, hi));
  return cube;
}

template <typename T>
s5dscr::Tensor4<T> random_tensor(s5dscr::Dims4 d, std::uint64_t seed, double lo = -1.0, double hi = 1.0) {
  s5dscr::Tensor4<T> t(d);
  s5dscr::Rng rng(seed);
  for (auto& v : t.span()) v = static_cast<T>(s5dscr::uniform(rng, lo, hi));
  return t;
}

/// Full 2-D sampled Gaussian, rows = along-track.
inline std::vector<std::vector<double>> gaussian2d(double sigma_across, double sigma_along, double trunc) {
  const int ry = std::max(1, static_cast<int>(std::ceil(trunc * sigma_along)));
  const int rx = std::max(1, static_cast<int>(std::ceil(trunc * sigma_across)));
  std::vector<std::vector<double>> k(2 * ry + 1, std::vector<double>(2 * rx + 1));
  double sum = 0.0;
  for (int y = -ry; y <= ry; ++y)
    for (int x = -rx; x <= rx; ++x) {
      const double v = std::exp(-(y * y) / (2 * sigma_along * sigma_along) - (x * x) / (2 * sigma_across * sigma_across));
      k[y + ry][x + rx] = v;
      sum += v;
    }
  for (auto& row : k)
    for (auto& v : row) v /= sum;
  return k;
}

/// Nested-loop correlation with replicate padding.
inline s5dscr::Cube naive_blur(const s5dscr::Cube& in, const std::vector<std::vector<double>>& k) {
  const int kh = static_cast<int>(k.size()), kw = static_cast<int>(k[0].size());
  const int H = static_cast<int>(in.height), W = static_cast<int>(in.width);
  s5dscr::Cube out(in.channels, in.height, in.width);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (int y = 0; y < H; ++y)
      for (int x = 0; x < W; ++x) {
        double acc = 0.0;
        for (int i = 0; i < kh; ++i)
          for (int j = 0; j < kw; ++j) {
            const int yy = std::clamp(y + i - kh / 2, 0, H - 1);
            const int xx = std::clamp(x + j - kw / 2, 0, W - 1);
            acc += k[i][j] * in.at(c, yy, xx);
          }
        out.at(c, y, x) = static_cast<float>(acc);
      }
  return out;
}

inline s5dscr::Cube naive_decimate(const s5dscr::Cube& in, std::size_t s) {
  s5dscr::Cube out(in.channels, in.height / s, in.width / s);
  for (std::size_t c = 0; c < in.channels; ++c)
    for (std::size_t y = 0; y < out.height; ++y)
      for (std::size_t x = 0; x < out.width; ++x) out.at(c, y, x) = in.at(c, y * s, x * s);
  return out;
}

/// Sort-based linear-interpolation quantile.
inline double sorted_quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Zero-padded depthwise correlation, one nested loop per output.
template <typename T>
s5dscr::Tensor4<T> naive_depthwise(const s5dscr::Tensor4<T>& x, const s5dscr::Tensor4<T>& w,
                                   const s5dscr::Tensor4<T>& b) {
  const auto d = x.dims();
  const int k = static_cast<int>(w.dims().h), p = k / 2;
  s5dscr::Tensor4<T> out(d);
  for (std::size_t n = 0; n < d.b; ++n)
    for (std::size_t c = 0; c < d.c; ++c)
      for (int y = 0; y < static_cast<int>(d.h); ++y)
        for (int xx = 0; xx < static_cast<int>(d.w); ++xx) {
          double acc = b[c];
          for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j) {
              const int sy = y + i - p, sx = xx + j - p;
              if (sy < 0 || sx < 0 || sy >= static_cast<int>(d.h) || sx >= static_cast<int>(d.w)) continue;
              acc += w.at(c, 0, i, j) * x.at(n, c, sy, sx);
            }
          out.at(n, c, y, xx) = static_cast<T>(acc);
        }
  return out;
}

template <typename T>
s5dscr::Tensor4<T> naive_pointwise(const s5dscr::Tensor4<T>& x, const s5dscr::Tensor4<T>& w,
                                   const s5dscr::Tensor4<T>& b) {
  const auto d = x.dims();
  const std::size_t cout = w.dims().b;
  s5dscr::Tensor4<T> out(d.b, cout, d.h, d.w);
  for (std::size_t n = 0; n < d.b; ++n)
    for (std::size_t y = 0; y < d.h; ++y)
      for (std::size_t xx = 0; xx < d.w; ++xx)
        for (std::size_t o = 0; o < cout; ++o) {
          double acc = b[o];
          for (std::size_t i = 0; i < d.c; ++i) acc += w.at(o, i, 0, 0) * x.at(n, i, y, xx);
          out.at(n, o, y, xx) = static_cast<T>(acc);
        }
  return out;
}

/// SSIM evaluated window by window straight from the definition.
inline double ssim_direct(const s5dscr::Cube& a, const s5dscr::Cube& b, std::size_t win = 11, double sigma = 1.5,
                          double k1 = 0.01, double k2 = 0.03, double range = 1.0) {
  std::vector<std::vector<double>> g(win, std::vector<double>(win));
  double gs = 0.0;
  const double c0 = (static_cast<double>(win) - 1) / 2;
  for (std::size_t i = 0; i < win; ++i)
    for (std::size_t j = 0; j < win; ++j) {
      g[i][j] = std::exp(-((i - c0) * (i - c0) + (j - c0) * (j - c0)) / (2 * sigma * sigma));
      gs += g[i][j];
    }
  const double C1 = (k1 * range) * (k1 * range), C2 = (k2 * range) * (k2 * range);
  double total = 0.0;
  for (std::size_t c = 0; c < a.channels; ++c) {
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t y = 0; y + win <= a.height; ++y)
      for (std::size_t x = 0; x + win <= a.width; ++x) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < win; ++i)
          for (std::size_t j = 0; j < win; ++j) {
            const double wgt = g[i][j] / gs;
            mx += wgt * a.at(c, y + i, x + j);
            my += wgt * b.at(c, y + i, x + j);
          }
        double vx = 0, vy = 0, cov = 0;
        for (std::size_t i = 0; i < win; ++i)
          for (std::size_t j = 0; j < win; ++j) {
            const double wgt = g[i][j] / gs;
            const double dx = a.at(c, y + i, x + j) - mx, dy = b.at(c, y + i, x + j) - my;
            vx += wgt * dx * dx;
            vy += wgt * dy * dy;
            cov += wgt * dx * dy;
          }
        acc += ((2 * mx * my + C1) * (2 * cov + C2)) / ((mx * mx + my * my + C1) * (vx + vy + C2));
        ++count;
      }
    total += acc / static_cast<double>(count);
  }
  return total / static_cast<double>(a.channels);
}

}  // namespace oracle
