#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

#include "s5dscr/autograd.hpp"
#include "s5dscr/rng.hpp"

namespace s5dscr::ag {
namespace {

struct Evaluation {
  double loss = 0.0;
  std::vector<bool> pattern;
};

Evaluation evaluate(const std::vector<NamedTensor>& params, const GraphBuilder& build) {
  Tape<double> tape;
  std::vector<Var<double>> vars;
  vars.reserve(params.size());
  for (const auto& [name, t] : params) vars.push_back(tape.leaf(t, false));
  const Var<double> loss = build(tape, vars);
  S5DSCR_CHECK(loss.value().numel() == 1, ErrorCode::NotScalar, "grad_check builder must return a scalar");
  return {loss.value()[0], tape.activation_pattern()};
}

std::vector<std::size_t> sample_coords(std::size_t n, std::size_t want, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  if (n <= want) return idx;
  shuffle<std::size_t>(idx, rng);
  idx.resize(want);
  std::sort(idx.begin(), idx.end());
  return idx;
}

}  // namespace

GradCheckReport grad_check(const std::vector<NamedTensor>& params, const GraphBuilder& build,
                           const GradCheckOptions& opt) {
  // Analytic pass.
  std::vector<Tensor4<double>> analytic;
  std::vector<bool> base_pattern;
  {
    Tape<double> tape;
    std::vector<Var<double>> vars;
    for (const auto& [name, t] : params) vars.push_back(tape.leaf(t, true));
    const Var<double> loss = build(tape, vars);
    base_pattern = tape.activation_pattern();
    tape.backward(loss);
    for (const auto& v : vars) {
      const auto* g = tape.grad(v);
      analytic.push_back(g ? *g : Tensor4<double>(v.dims()));
    }
  }

  GradCheckReport report;
  Rng rng(opt.seed);
  auto perturbed = params;
  for (std::size_t p = 0; p < params.size(); ++p) {
    TensorCheck tc;
    tc.name = params[p].first;
    auto& target = perturbed[p].second;
    for (std::size_t i : sample_coords(target.numel(), opt.coords_per_tensor, rng)) {
      const double orig = target[i];
      // Shrink the step until no ReLU changes state across the stencil.
      std::optional<double> numeric;
      for (double h = opt.h; h >= opt.h * 1e-3 && !numeric; h *= 0.1) {
        target[i] = orig + h;
        const auto plus = evaluate(perturbed, build);
        target[i] = orig - h;
        const auto minus = evaluate(perturbed, build);
        target[i] = orig;
        if (plus.pattern == base_pattern && minus.pattern == base_pattern)
          numeric = (plus.loss - minus.loss) / (2.0 * h);
      }
      if (!numeric) {
        ++tc.skipped_kinks;
        continue;
      }
      const double a = analytic[p][i];
      const double denom = std::max({std::abs(a), std::abs(*numeric), opt.abs_floor});
      const double rel = std::abs(a - *numeric) / denom;
      tc.max_rel_error = std::max(tc.max_rel_error, std::isfinite(rel) ? rel : INFINITY);
      ++tc.checked;
    }
    tc.pass = tc.checked > 0 && tc.max_rel_error < opt.tolerance;
    report.max_rel_error = std::max(report.max_rel_error, tc.max_rel_error);
    report.pass = report.pass && tc.pass;
    report.tensors.push_back(std::move(tc));
  }
  return report;
}

std::string GradCheckReport::summary() const {
  std::ostringstream os;
  os.precision(3);
  for (const auto& t : tensors)
    os << (t.pass ? "ok   " : "FAIL ") << t.name << "  max_rel_err=" << std::scientific << t.max_rel_error
       << "  checked=" << t.checked << "  skipped_kinks=" << t.skipped_kinks << '\n';
  os << (pass ? "PASS" : "FAIL") << "  overall max_rel_err=" << std::scientific << max_rel_error << '\n';
  return os.str();
}

}  // namespace s5dscr::ag
