#include "s5dscr/model.hpp"

#include <cmath>

#include "s5dscr/resample.hpp"
#include "s5dscr/rng.hpp"

namespace s5dscr::model {

ModelConfig ModelConfig::s5dscr(std::size_t channels) {
  ModelConfig c;
  c.channels = channels;
  c.n_modules = 5;
  c.pointwise_per_module = 3;
  return c;
}

ModelConfig ModelConfig::s5dscr_s(std::size_t channels) {
  ModelConfig c;
  c.channels = channels;
  c.n_modules = 1;
  c.pointwise_per_module = 1;
  return c;
}

void ModelConfig::validate() const {
  S5DSCR_CHECK(channels >= 1, ErrorCode::InvalidArgument, "channels must be >= 1");
  S5DSCR_CHECK(n_modules >= 1, ErrorCode::InvalidArgument, "n_modules must be >= 1");
  S5DSCR_CHECK(dw_kernel >= 1 && dw_kernel % 2 == 1, ErrorCode::InvalidArgument, "dw_kernel must be odd");
  S5DSCR_CHECK(pointwise_per_module >= 1, ErrorCode::InvalidArgument, "pointwise_per_module must be >= 1");
  S5DSCR_CHECK(scale >= 2, ErrorCode::InvalidArgument, "scale must be >= 2");
}

template <typename T>
std::vector<Tensor4<T>*> ModelWeightsT<T>::parameters() {
  std::vector<Tensor4<T>*> out;
  for (auto& m : modules) {
    out.push_back(&m.dw_weight);
    out.push_back(&m.dw_bias);
    for (std::size_t j = 0; j < m.pw_weight.size(); ++j) {
      out.push_back(&m.pw_weight[j]);
      out.push_back(&m.pw_bias[j]);
    }
  }
  return out;
}

template <typename T>
std::vector<const Tensor4<T>*> ModelWeightsT<T>::parameters() const {
  std::vector<const Tensor4<T>*> out;
  for (auto* p : const_cast<ModelWeightsT*>(this)->parameters()) out.push_back(p);
  return out;
}

template <typename T>
std::vector<std::string> ModelWeightsT<T>::parameter_names() const {
  std::vector<std::string> out;
  for (std::size_t l = 0; l < modules.size(); ++l) {
    const std::string prefix = "dsc" + std::to_string(l) + ".";
    out.push_back(prefix + "dw.weight");
    out.push_back(prefix + "dw.bias");
    for (std::size_t j = 0; j < modules[l].pw_weight.size(); ++j) {
      out.push_back(prefix + "pw" + std::to_string(j) + ".weight");
      out.push_back(prefix + "pw" + std::to_string(j) + ".bias");
    }
  }
  return out;
}

template <typename T>
std::size_t ModelWeightsT<T>::numel() const {
  std::size_t n = 0;
  for (const auto* p : parameters()) n += p->numel();
  return n;
}

template struct ModelWeightsT<float>;
template struct ModelWeightsT<double>;

template <typename T>
ModelWeightsT<T> zero_weights(const ModelConfig& config) {
  config.validate();
  const std::size_t C = config.channels, k = config.dw_kernel;
  ModelWeightsT<T> w;
  w.config = config;
  for (std::size_t l = 0; l < config.stored_modules(); ++l) {
    DscModuleWeights<T> m{Tensor4<T>(C, 1, k, k), Tensor4<T>(1, C, 1, 1), {}, {}};
    for (std::size_t j = 0; j < config.pointwise_per_module; ++j) {
      m.pw_weight.emplace_back(C, C, 1, 1);
      m.pw_bias.emplace_back(1, C, 1, 1);
    }
    w.modules.push_back(std::move(m));
  }
  return w;
}

template ModelWeightsT<float> zero_weights<float>(const ModelConfig&);
template ModelWeightsT<double> zero_weights<double>(const ModelConfig&);

ModelWeights init_weights(const ModelConfig& config, std::uint64_t seed) {
  auto w = zero_weights<float>(config);
  Rng rng(seed);
  auto fill = [&rng](Tensor4<float>& t, double fan_in) {
    const double bound = std::sqrt(6.0 / fan_in);
    for (auto& v : t.span()) v = static_cast<float>(uniform(rng, -bound, bound));
  };
  const auto k2 = static_cast<double>(config.dw_kernel * config.dw_kernel);
  for (auto& m : w.modules) {
    fill(m.dw_weight, k2);
    for (auto& pw : m.pw_weight) fill(pw, static_cast<double>(config.channels));
  }
  return w;
}

std::size_t param_count(const ModelConfig& config) {
  config.validate();
  const std::size_t C = config.channels, k = config.dw_kernel;
  const std::size_t per_module = (k * k * C + C) + config.pointwise_per_module * (C * C + C);
  return config.stored_modules() * per_module;
}

template <typename T>
Tensor4<T> bicubic_base(const Tensor4<T>& lr, std::size_t scale) {
  const Dims4 d = lr.dims();
  Tensor4<T> out(d.b, d.c, d.h * scale, d.w * scale);
  const std::size_t planes = d.b * d.c;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t p = 0; p < static_cast<std::ptrdiff_t>(planes); ++p) {
    const std::size_t b = static_cast<std::size_t>(p) / d.c, c = static_cast<std::size_t>(p) % d.c;
    resample::bicubic_upsample_plane<T>(lr.plane(b, c), d.h, d.w, scale, out.plane(b, c));
  }
  return out;
}

template Tensor4<float> bicubic_base<float>(const Tensor4<float>&, std::size_t);
template Tensor4<double> bicubic_base<double>(const Tensor4<double>&, std::size_t);

template <typename T>
ag::Var<T> forward_graph(const ModelConfig& config, std::span<const ag::Var<T>> params, ag::Var<T> base) {
  const std::size_t per_module = 2 + 2 * config.pointwise_per_module;
  S5DSCR_CHECK(params.size() == config.stored_modules() * per_module, ErrorCode::ShapeMismatch,
               "parameter list does not match the model config");
  S5DSCR_CHECK(base.dims().c == config.channels, ErrorCode::ShapeMismatch,
               "input has " + std::to_string(base.dims().c) + " channels, model expects " +
                   std::to_string(config.channels));

  ag::Var<T> h = base;
  for (std::size_t l = 0; l < config.n_modules; ++l) {
    const auto* p = params.data() + (config.share_module_weights ? 0 : l) * per_module;
    const bool last_module = l + 1 == config.n_modules;
    h = ag::relu(ag::depthwise_conv(h, p[0], p[1]));
    for (std::size_t j = 0; j < config.pointwise_per_module; ++j) {
      h = ag::pointwise_conv(h, p[2 + 2 * j], p[3 + 2 * j]);
      const bool last_layer = j + 1 == config.pointwise_per_module;
      if (!(last_layer && last_module && config.final_linear)) h = ag::relu(h);
    }
  }
  return ag::add(base, h);
}

template ag::Var<float> forward_graph<float>(const ModelConfig&, std::span<const ag::Var<float>>, ag::Var<float>);
template ag::Var<double> forward_graph<double>(const ModelConfig&, std::span<const ag::Var<double>>, ag::Var<double>);

template <typename T>
Tensor4<T> forward(const ModelWeightsT<T>& weights, const Tensor4<T>& lr) {
  S5DSCR_CHECK(lr.dims().c == weights.config.channels, ErrorCode::ShapeMismatch,
               "input has " + std::to_string(lr.dims().c) + " channels, model expects " +
                   std::to_string(weights.config.channels));
  ag::Tape<T> tape;
  std::vector<ag::Var<T>> params;
  for (const auto* p : weights.parameters()) params.push_back(tape.leaf(*p, false));
  const auto base = tape.leaf(bicubic_base(lr, weights.config.scale), false);
  return forward_graph<T>(weights.config, params, base).value();
}

template Tensor4<float> forward<float>(const ModelWeightsT<float>&, const Tensor4<float>&);
template Tensor4<double> forward<double>(const ModelWeightsT<double>&, const Tensor4<double>&);

Tensor4<float> to_tensor(const Cube& cube) {
  Tensor4<float> t(1, cube.channels, cube.height, cube.width);
  std::copy(cube.data.begin(), cube.data.end(), t.data());
  return t;
}

Cube to_cube(const Tensor4<float>& t, std::size_t sample) {
  const Dims4 d = t.dims();
  S5DSCR_CHECK(sample < d.b, ErrorCode::InvalidArgument, "sample index out of range");
  Cube c(d.c, d.h, d.w);
  const float* src = t.plane(sample, 0).data();
  std::copy(src, src + c.size(), c.data.begin());
  return c;
}

Cube super_resolve(const ModelWeights& weights, const Cube& lr) {
  return to_cube(forward(weights, to_tensor(lr)));
}

}  // namespace s5dscr::model
