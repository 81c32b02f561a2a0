#include <cmath>

#include "s5dscr/train.hpp"

namespace s5dscr::train {

AdamState AdamState::for_weights(const model::ModelWeights& weights, double lr) {
  AdamState s;
  s.lr = lr;
  for (const auto* p : weights.parameters()) {
    s.m.emplace_back(p->numel(), 0.0f);
    s.v.emplace_back(p->numel(), 0.0f);
  }
  return s;
}

void adam_step(model::ModelWeights& weights, const std::vector<Tensor4<float>>& grads, AdamState& s) {
  auto params = weights.parameters();
  S5DSCR_CHECK(grads.size() == params.size() && s.m.size() == params.size() && s.v.size() == params.size(),
               ErrorCode::ShapeMismatch, "gradient/state count does not match the parameters");
  for (std::size_t p = 0; p < params.size(); ++p) {
    S5DSCR_CHECK(grads[p].numel() == params[p]->numel() && s.m[p].size() == params[p]->numel(),
                 ErrorCode::ShapeMismatch, "gradient shape mismatch for parameter " + std::to_string(p));
    S5DSCR_CHECK(grads[p].all_finite(), ErrorCode::NumericFailure,
                 "non-finite gradient in parameter tensor " + std::to_string(p) + "; step skipped");
  }

  s.t += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(s.t));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(s.t));
  for (std::size_t p = 0; p < params.size(); ++p) {
    float* theta = params[p]->data();
    const float* g = grads[p].data();
    auto& m = s.m[p];
    auto& v = s.v[p];
    for (std::size_t i = 0; i < m.size(); ++i) {
      const double gi = g[i];
      const double mi = s.beta1 * m[i] + (1.0 - s.beta1) * gi;
      const double vi = s.beta2 * v[i] + (1.0 - s.beta2) * gi * gi;
      m[i] = static_cast<float>(mi);
      v[i] = static_cast<float>(vi);
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      theta[i] = static_cast<float>(theta[i] - s.lr * m_hat / (std::sqrt(v_hat) + s.eps));
    }
  }
}

bool plateau_step(PlateauState& s, double val_loss) {
  S5DSCR_CHECK(!std::isnan(val_loss), ErrorCode::NumericFailure, "validation loss is NaN");
  if (val_loss < s.best_val * (1.0 - s.rel_threshold)) {
    s.best_val = val_loss;
    s.epochs_since_improve = 0;
    return false;
  }
  if (++s.epochs_since_improve < s.patience) return false;
  s.current_lr = std::max(s.current_lr * s.factor, s.min_lr);
  s.epochs_since_improve = 0;
  return true;
}

}  // namespace s5dscr::train
