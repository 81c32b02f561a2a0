#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "s5dscr/metrics.hpp"

namespace s5dscr::metrics {
namespace {

void check_same_shape(const Cube& a, const Cube& b, const char* what) {
  S5DSCR_CHECK(a.same_shape(b), ErrorCode::ShapeMismatch, std::string(what) + ": cube dimensions differ");
  S5DSCR_CHECK(!a.data.empty(), ErrorCode::InvalidArgument, std::string(what) + ": empty cube");
}

std::vector<double> gaussian_window(std::size_t n, double sigma) {
  std::vector<double> g(n);
  const double c = (static_cast<double>(n) - 1.0) / 2.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) - c;
    g[i] = std::exp(-x * x / (2.0 * sigma * sigma));
    sum += g[i];
  }
  for (auto& v : g) v /= sum;
  return g;
}

// Valid-mode separable filtering of an h x w plane.
std::vector<double> filter_valid(const std::vector<double>& in, std::size_t h, std::size_t w,
                                 const std::vector<double>& g) {
  const std::size_t n = g.size(), oh = h - n + 1, ow = w - n + 1;
  std::vector<double> tmp(h * ow, 0.0), out(oh * ow, 0.0);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < ow; ++x) {
      double acc = 0.0;
      for (std::size_t k = 0; k < n; ++k) acc += g[k] * in[y * w + x + k];
      tmp[y * ow + x] = acc;
    }
  for (std::size_t y = 0; y < oh; ++y)
    for (std::size_t k = 0; k < n; ++k) {
      const double gk = g[k];
      const double* src = &tmp[(y + k) * ow];
      double* dst = &out[y * ow];
      for (std::size_t x = 0; x < ow; ++x) dst[x] += gk * src[x];
    }
  return out;
}

}  // namespace

std::string Psnr::to_string() const {
  if (identical) return "identical";
  std::ostringstream os;
  os << std::setprecision(10) << db;
  return os.str();
}

double mse(const Cube& ref, const Cube& test) {
  check_same_shape(ref, test, "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < ref.data.size(); ++i) {
    const double d = static_cast<double>(ref.data[i]) - test.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(ref.data.size());
}

Psnr psnr(const Cube& ref, const Cube& test, double max_val) {
  S5DSCR_CHECK(max_val > 0.0, ErrorCode::InvalidArgument, "psnr max_val must be positive");
  const double e = mse(ref, test);
  if (e == 0.0) return {0.0, true};
  return {10.0 * std::log10(max_val * max_val / e), false};
}

double ssim(const Cube& ref, const Cube& test, const SsimOptions& opt) {
  check_same_shape(ref, test, "ssim");
  S5DSCR_CHECK(opt.window >= 1 && ref.height >= opt.window && ref.width >= opt.window, ErrorCode::TooSmall,
               "image smaller than the SSIM window");
  const auto g = gaussian_window(opt.window, opt.sigma);
  const double c1 = (opt.k1 * opt.range) * (opt.k1 * opt.range);
  const double c2 = (opt.k2 * opt.range) * (opt.k2 * opt.range);
  const std::size_t h = ref.height, w = ref.width, n = h * w;

  double total = 0.0;
  for (std::size_t c = 0; c < ref.channels; ++c) {
    const auto a = ref.plane(c);
    const auto b = test.plane(c);
    std::vector<double> x(n), y(n), xx(n), yy(n), xy(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = a[i];
      y[i] = b[i];
      xx[i] = x[i] * x[i];
      yy[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mx = filter_valid(x, h, w, g), my = filter_valid(y, h, w, g);
    const auto sxx = filter_valid(xx, h, w, g), syy = filter_valid(yy, h, w, g), sxy = filter_valid(xy, h, w, g);
    double acc = 0.0;
    for (std::size_t i = 0; i < mx.size(); ++i) {
      const double vx = sxx[i] - mx[i] * mx[i];
      const double vy = syy[i] - my[i] * my[i];
      const double cov = sxy[i] - mx[i] * my[i];
      acc += ((2.0 * mx[i] * my[i] + c1) * (2.0 * cov + c2)) /
             ((mx[i] * mx[i] + my[i] * my[i] + c1) * (vx + vy + c2));
    }
    total += acc / static_cast<double>(mx.size());
  }
  return total / static_cast<double>(ref.channels);
}

Scc scc(const Cube& ref, const Cube& test) {
  check_same_shape(ref, test, "scc");
  S5DSCR_CHECK(ref.height >= 3 && ref.width >= 3, ErrorCode::TooSmall, "scc needs spatial dims >= 3");
  const std::size_t h = ref.height, w = ref.width;
  auto laplacian = [h, w](std::span<const float> p, std::size_t y, std::size_t x) {
    return 4.0 * p[y * w + x] - static_cast<double>(p[(y - 1) * w + x]) - p[(y + 1) * w + x] - p[y * w + x - 1] -
           p[y * w + x + 1];
  };

  Scc out;
  double total = 0.0;
  for (std::size_t c = 0; c < ref.channels; ++c) {
    const auto a = ref.plane(c), b = test.plane(c);
    std::vector<double> fa, fb;
    fa.reserve((h - 2) * (w - 2));
    fb.reserve((h - 2) * (w - 2));
    for (std::size_t y = 1; y + 1 < h; ++y)
      for (std::size_t x = 1; x + 1 < w; ++x) {
        fa.push_back(laplacian(a, y, x));
        fb.push_back(laplacian(b, y, x));
      }
    const double n = static_cast<double>(fa.size());
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
      ma += fa[i];
      mb += fb[i];
    }
    ma /= n;
    mb /= n;
    double saa = 0.0, sbb = 0.0, sab = 0.0;
    for (std::size_t i = 0; i < fa.size(); ++i) {
      const double da = fa[i] - ma, db = fb[i] - mb;
      saa += da * da;
      sbb += db * db;
      sab += da * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) {
      out.degenerate_channel = true;
      continue;
    }
    total += std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
  }
  out.value = total / static_cast<double>(ref.channels);
  return out;
}

}  // namespace s5dscr::metrics
