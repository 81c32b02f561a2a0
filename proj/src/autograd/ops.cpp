#include <algorithm>
#include <cmath>

#include <Eigen/Core>

#include "s5dscr/autograd.hpp"

namespace s5dscr::ag {
namespace {

template <typename T>
using MatMap = Eigen::Map<Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
template <typename T>
using ConstMatMap = Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

template <typename T>
void check_same_tape(const Var<T>& a, const Var<T>& b) {
  S5DSCR_CHECK(a.tape && a.tape == b.tape, ErrorCode::InvalidArgument, "operands live on different tapes");
}

struct Span1D {
  std::size_t lo, hi;  // output range such that out + d stays inside [0, n)
};

inline Span1D valid_range(std::ptrdiff_t d, std::size_t n) {
  const auto sn = static_cast<std::ptrdiff_t>(n);
  const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -d);
  const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(sn, sn - d);
  if (hi <= lo) return {0, 0};
  return {static_cast<std::size_t>(lo), static_cast<std::size_t>(hi)};
}

}  // namespace

template <typename T>
Var<T> depthwise_conv(Var<T> x, Var<T> weight, Var<T> bias) {
  check_same_tape(x, weight);
  check_same_tape(x, bias);
  const Dims4 xd = x.dims(), wd = weight.dims(), bd = bias.dims();
  S5DSCR_CHECK(wd.c == 1 && wd.h == wd.w, ErrorCode::ShapeMismatch, "depthwise weight must be (C, 1, k, k)");
  S5DSCR_CHECK(wd.h % 2 == 1, ErrorCode::InvalidArgument, "depthwise kernel size must be odd");
  S5DSCR_CHECK(wd.b == xd.c, ErrorCode::ShapeMismatch,
               "depthwise weight has " + std::to_string(wd.b) + " channels, input has " + std::to_string(xd.c));
  S5DSCR_CHECK(bd == (Dims4{1, xd.c, 1, 1}), ErrorCode::ShapeMismatch, "depthwise bias must be (1, C, 1, 1)");

  const std::size_t B = xd.b, C = xd.c, H = xd.h, W = xd.w, k = wd.h;
  const auto pad = static_cast<std::ptrdiff_t>(k / 2);
  const Tensor4<T>& xv = x.value();
  const Tensor4<T>& wv = weight.value();
  const Tensor4<T>& bv = bias.value();

  Tensor4<T> out(xd);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(B * C); ++job) {
    const std::size_t b = static_cast<std::size_t>(job) / C, c = static_cast<std::size_t>(job) % C;
    const T* in = xv.plane(b, c).data();
    T* o = out.plane(b, c).data();
    std::fill(o, o + H * W, bv[c]);
    for (std::size_t ky = 0; ky < k; ++ky) {
      const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
      const auto ry = valid_range(dy, H);
      for (std::size_t kx = 0; kx < k; ++kx) {
        const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
        const auto rx = valid_range(dx, W);
        const T wk = wv[(c * k + ky) * k + kx];
        for (std::size_t y = ry.lo; y < ry.hi; ++y) {
          const T* src = in + (static_cast<std::ptrdiff_t>(y) + dy) * static_cast<std::ptrdiff_t>(W);
          T* dst = o + y * W;
          for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) dst[xx] += wk * src[static_cast<std::ptrdiff_t>(xx) + dx];
        }
      }
    }
  }

  const std::size_t xi = x.id, wi = weight.id, bi = bias.id;
  return x.tape->record(std::move(out), {xi, wi, bi}, [=](Tape<T>& tape, const Tensor4<T>& g) {
    const Tensor4<T>& xv = tape.value(xi);
    const Tensor4<T>& wv = tape.value(wi);
    if (tape.requires_grad(xi)) {
      Tensor4<T>& gx = tape.grad_buffer(xi);
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t job = 0; job < static_cast<std::ptrdiff_t>(B * C); ++job) {
        const std::size_t b = static_cast<std::size_t>(job) / C, c = static_cast<std::size_t>(job) % C;
        const T* go = g.plane(b, c).data();
        T* gi = gx.plane(b, c).data();
        for (std::size_t ky = 0; ky < k; ++ky) {
          const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
          const auto ry = valid_range(dy, H);
          for (std::size_t kx = 0; kx < k; ++kx) {
            const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
            const auto rx = valid_range(dx, W);
            const T wk = wv[(c * k + ky) * k + kx];
            for (std::size_t y = ry.lo; y < ry.hi; ++y) {
              T* dst = gi + (static_cast<std::ptrdiff_t>(y) + dy) * static_cast<std::ptrdiff_t>(W);
              const T* src = go + y * W;
              for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) dst[static_cast<std::ptrdiff_t>(xx) + dx] += wk * src[xx];
            }
          }
        }
      }
    }
    const bool need_w = tape.requires_grad(wi), need_b = tape.requires_grad(bi);
    if (need_w || need_b) {
      Tensor4<T>* gw = need_w ? &tape.grad_buffer(wi) : nullptr;
      Tensor4<T>* gb = need_b ? &tape.grad_buffer(bi) : nullptr;
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t ci = 0; ci < static_cast<std::ptrdiff_t>(C); ++ci) {
        const auto c = static_cast<std::size_t>(ci);
        if (gw) {
          for (std::size_t ky = 0; ky < k; ++ky) {
            const std::ptrdiff_t dy = static_cast<std::ptrdiff_t>(ky) - pad;
            const auto ry = valid_range(dy, H);
            for (std::size_t kx = 0; kx < k; ++kx) {
              const std::ptrdiff_t dx = static_cast<std::ptrdiff_t>(kx) - pad;
              const auto rx = valid_range(dx, W);
              double acc = 0.0;
              for (std::size_t b = 0; b < B; ++b) {
                const T* in = xv.plane(b, c).data();
                const T* go = g.plane(b, c).data();
                for (std::size_t y = ry.lo; y < ry.hi; ++y) {
                  const T* src = in + (static_cast<std::ptrdiff_t>(y) + dy) * static_cast<std::ptrdiff_t>(W);
                  const T* gr = go + y * W;
                  T row = 0;
                  for (std::size_t xx = rx.lo; xx < rx.hi; ++xx) row += gr[xx] * src[static_cast<std::ptrdiff_t>(xx) + dx];
                  acc += row;
                }
              }
              (*gw)[(c * k + ky) * k + kx] += static_cast<T>(acc);
            }
          }
        }
        if (gb) {
          double acc = 0.0;
          for (std::size_t b = 0; b < B; ++b)
            for (T v : g.plane(b, c)) acc += v;
          (*gb)[c] += static_cast<T>(acc);
        }
      }
    }
  });
}

template <typename T>
Var<T> pointwise_conv(Var<T> x, Var<T> weight, Var<T> bias) {
  check_same_tape(x, weight);
  check_same_tape(x, bias);
  const Dims4 xd = x.dims(), wd = weight.dims(), bd = bias.dims();
  S5DSCR_CHECK(wd.h == 1 && wd.w == 1, ErrorCode::ShapeMismatch, "pointwise weight must be (Cout, Cin, 1, 1)");
  S5DSCR_CHECK(wd.c == xd.c, ErrorCode::ShapeMismatch,
               "pointwise weight expects " + std::to_string(wd.c) + " input channels, got " + std::to_string(xd.c));
  S5DSCR_CHECK(bd == (Dims4{1, wd.b, 1, 1}), ErrorCode::ShapeMismatch, "pointwise bias must be (1, Cout, 1, 1)");

  const std::size_t B = xd.b, Cin = xd.c, Cout = wd.b, P = xd.h * xd.w;
  Tensor4<T> out(B, Cout, xd.h, xd.w);
  const ConstMatMap<T> w(weight.value().data(), Cout, Cin);
  const Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> bvec(bias.value().data(), Cout);
  for (std::size_t b = 0; b < B; ++b) {
    const ConstMatMap<T> in(x.value().plane(b, 0).data(), Cin, P);
    MatMap<T> o(out.plane(b, 0).data(), Cout, P);
    o.noalias() = w * in;
    o.colwise() += bvec;
  }

  const std::size_t xi = x.id, wi = weight.id, bi = bias.id;
  return x.tape->record(std::move(out), {xi, wi, bi}, [=](Tape<T>& tape, const Tensor4<T>& g) {
    const ConstMatMap<T> w(tape.value(wi).data(), Cout, Cin);
    if (tape.requires_grad(xi)) {
      Tensor4<T>& gx = tape.grad_buffer(xi);
      for (std::size_t b = 0; b < B; ++b) {
        const ConstMatMap<T> go(g.plane(b, 0).data(), Cout, P);
        MatMap<T> gi(gx.plane(b, 0).data(), Cin, P);
        gi.noalias() += w.transpose() * go;
      }
    }
    if (tape.requires_grad(wi)) {
      MatMap<T> gw(tape.grad_buffer(wi).data(), Cout, Cin);
      const Tensor4<T>& xv = tape.value(xi);
      for (std::size_t b = 0; b < B; ++b) {
        const ConstMatMap<T> go(g.plane(b, 0).data(), Cout, P);
        const ConstMatMap<T> in(xv.plane(b, 0).data(), Cin, P);
        gw.noalias() += go * in.transpose();
      }
    }
    if (tape.requires_grad(bi)) {
      Tensor4<T>& gb = tape.grad_buffer(bi);
      for (std::size_t co = 0; co < Cout; ++co) {
        double acc = 0.0;
        for (std::size_t b = 0; b < B; ++b)
          for (T v : g.plane(b, co)) acc += v;
        gb[co] += static_cast<T>(acc);
      }
    }
  });
}

template <typename T>
Var<T> relu(Var<T> x) {
  const Tensor4<T>& xv = x.value();
  Tensor4<T> out(xv.dims());
  for (std::size_t i = 0; i < xv.numel(); ++i) out[i] = xv[i] > T{0} ? xv[i] : T{0};
  x.tape->note_activation_pattern(xv.span());
  const std::size_t xi = x.id;
  return x.tape->record(std::move(out), {xi}, [=](Tape<T>& tape, const Tensor4<T>& g) {
    const Tensor4<T>& xv = tape.value(xi);
    Tensor4<T>& gx = tape.grad_buffer(xi);
    for (std::size_t i = 0; i < g.numel(); ++i)
      if (xv[i] > T{0}) gx[i] += g[i];
  });
}

template <typename T>
Var<T> add(Var<T> x, Var<T> y) {
  check_same_tape(x, y);
  S5DSCR_CHECK(x.dims() == y.dims(), ErrorCode::ShapeMismatch,
               "add: " + to_string(x.dims()) + " vs " + to_string(y.dims()));
  Tensor4<T> out = x.value();
  const Tensor4<T>& yv = y.value();
  for (std::size_t i = 0; i < out.numel(); ++i) out[i] += yv[i];
  const std::size_t xi = x.id, yi = y.id;
  return x.tape->record(std::move(out), {xi, yi}, [=](Tape<T>& tape, const Tensor4<T>& g) {
    for (std::size_t id : {xi, yi}) {
      if (!tape.requires_grad(id)) continue;
      Tensor4<T>& gi = tape.grad_buffer(id);
      for (std::size_t i = 0; i < g.numel(); ++i) gi[i] += g[i];
    }
  });
}

template <typename T>
Var<T> sum(Var<T> x) {
  double acc = 0.0;
  for (T v : x.value().span()) acc += v;
  const std::size_t xi = x.id;
  return x.tape->record(Tensor4<T>(1, 1, 1, 1, static_cast<T>(acc)), {xi}, [=](Tape<T>& tape, const Tensor4<T>& g) {
    Tensor4<T>& gx = tape.grad_buffer(xi);
    for (auto& v : gx.span()) v += g[0];
  });
}

template <typename T>
Var<T> mse_loss(Var<T> pred, Var<T> target) {
  check_same_tape(pred, target);
  S5DSCR_CHECK(pred.dims() == target.dims(), ErrorCode::ShapeMismatch,
               "mse: " + to_string(pred.dims()) + " vs " + to_string(target.dims()));
  const Tensor4<T>& p = pred.value();
  const Tensor4<T>& t = target.value();
  const std::size_t n = p.numel();
  S5DSCR_CHECK(n > 0, ErrorCode::InvalidArgument, "mse of empty tensors");
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = static_cast<double>(p[i]) - static_cast<double>(t[i]);
    acc += d * d;
  }
  const std::size_t pi = pred.id, ti = target.id;
  return pred.tape->record(Tensor4<T>(1, 1, 1, 1, static_cast<T>(acc / static_cast<double>(n))), {pi, ti},
                           [=](Tape<T>& tape, const Tensor4<T>& g) {
                             const Tensor4<T>& p = tape.value(pi);
                             const Tensor4<T>& t = tape.value(ti);
                             const T scale = static_cast<T>(2.0 / static_cast<double>(n)) * g[0];
                             if (tape.requires_grad(pi)) {
                               Tensor4<T>& gp = tape.grad_buffer(pi);
                               for (std::size_t i = 0; i < n; ++i) gp[i] += scale * (p[i] - t[i]);
                             }
                             if (tape.requires_grad(ti)) {
                               Tensor4<T>& gt = tape.grad_buffer(ti);
                               for (std::size_t i = 0; i < n; ++i) gt[i] -= scale * (p[i] - t[i]);
                             }
                           });
}

#define S5DSCR_INSTANTIATE_OPS(T)                          \
  template Var<T> depthwise_conv<T>(Var<T>, Var<T>, Var<T>); \
  template Var<T> pointwise_conv<T>(Var<T>, Var<T>, Var<T>); \
  template Var<T> relu<T>(Var<T>);                         \
  template Var<T> add<T>(Var<T>, Var<T>);                  \
  template Var<T> sum<T>(Var<T>);                          \
  template Var<T> mse_loss<T>(Var<T>, Var<T>);

S5DSCR_INSTANTIATE_OPS(float)
S5DSCR_INSTANTIATE_OPS(double)

}  // namespace s5dscr::ag
