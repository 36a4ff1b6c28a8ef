#include "rdict/optim.hpp"

#include <cmath>
#include <string>

#include "rdict/error.hpp"

namespace rdict {
namespace {

bool congruent(const SemiEncoder& model, const GradientSet& g) {
  const auto layers = model.layers();
  if (g.layers.size() != layers.size()) return false;
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (g.layers[l].weight.rows() != layers[l].weight.rows() ||
        g.layers[l].weight.cols() != layers[l].weight.cols() ||
        g.layers[l].bias.size() != layers[l].bias.size()) {
      return false;
    }
  }
  return true;
}

struct MomentUpdate {
  double beta1, beta2, bias1, bias2, lr, eps;

  // Updates the moments in place and returns the adaptive step for one entry.
  double operator()(double g, double& m, double& v) const {
    m = beta1 * m + (1.0 - beta1) * g;
    v = beta2 * v + (1.0 - beta2) * g * g;
    const double m_hat = m / bias1;
    const double v_hat = v / bias2;
    return lr * m_hat / (std::sqrt(v_hat) + eps);
  }
};

}  // namespace

void OptimConfig::validate() const {
  if (!(learning_rate > 0.0)) fail(ErrorCode::kConfig, "optim.learning_rate must be > 0");
  if (!(beta1 > 0.0 && beta1 < 1.0)) fail(ErrorCode::kConfig, "optim.beta1 must lie in (0,1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) fail(ErrorCode::kConfig, "optim.beta2 must lie in (0,1)");
  if (!(epsilon > 0.0)) fail(ErrorCode::kConfig, "optim.epsilon must be > 0");
  if (!(weight_decay >= 0.0)) fail(ErrorCode::kConfig, "optim.weight_decay must be >= 0");
}

AdamWState AdamWState::for_model(const SemiEncoder& model) {
  return {0, zero_gradients(model), zero_gradients(model)};
}

void adamw_step(SemiEncoder& model, const GradientSet& grads, AdamWState& state,
                const OptimConfig& cfg) {
  if (!congruent(model, grads) || !congruent(model, state.first_moment) ||
      !congruent(model, state.second_moment)) {
    fail(ErrorCode::kInvalidState, "gradient or optimizer state shape does not match the model");
  }
  for (std::size_t l = 0; l < grads.layers.size(); ++l) {
    const auto& g = grads.layers[l];
    for (double x : g.weight.values()) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::kNumeric, "non-finite weight gradient in layer " + std::to_string(l));
      }
    }
    for (double x : g.bias) {
      if (!std::isfinite(x)) {
        fail(ErrorCode::kNumeric, "non-finite bias gradient in layer " + std::to_string(l));
      }
    }
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const MomentUpdate update{cfg.beta1,
                            cfg.beta2,
                            1.0 - std::pow(cfg.beta1, t),
                            1.0 - std::pow(cfg.beta2, t),
                            cfg.learning_rate,
                            cfg.epsilon};
  const double decay = cfg.learning_rate * cfg.weight_decay;

  auto layers = model.layers();
  for (std::size_t l = 0; l < layers.size(); ++l) {
    auto w = layers[l].weight.values();
    const auto gw = grads.layers[l].weight.values();
    auto mw = state.first_moment.layers[l].weight.values();
    auto vw = state.second_moment.layers[l].weight.values();
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double theta = w[k];
      w[k] = theta - update(gw[k], mw[k], vw[k]) - decay * theta;
    }
    auto& bias = layers[l].bias;
    const auto& gb = grads.layers[l].bias;
    auto& mb = state.first_moment.layers[l].bias;
    auto& vb = state.second_moment.layers[l].bias;
    for (std::size_t k = 0; k < bias.size(); ++k) bias[k] -= update(gb[k], mb[k], vb[k]);
  }
}

}  // namespace rdict
