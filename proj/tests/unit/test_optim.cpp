#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rdict/error.hpp"
#include "rdict/optim.hpp"
#include "test_support.hpp"

using namespace rdict;

namespace {

GradientSet random_grads(const SemiEncoder& m, std::mt19937_64& rng) {
  GradientSet g = zero_gradients(m);
  std::normal_distribution<double> dist(0.0, 0.5);
  for (auto& l : g.layers) {
    for (auto& v : l.weight.values()) v = dist(rng);
    for (auto& v : l.bias) v = dist(rng);
  }
  return g;
}

// Scalar AdamW with decoupled decay, written out term by term.
struct ScalarAdamW {
  double m = 0.0, v = 0.0;
  double step(double theta, double g, int t, const OptimConfig& c, bool decay) {
    m = c.beta1 * m + (1 - c.beta1) * g;
    v = c.beta2 * v + (1 - c.beta2) * g * g;
    const double mhat = m / (1 - std::pow(c.beta1, t));
    const double vhat = v / (1 - std::pow(c.beta2, t));
    double next = theta - c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
    if (decay) next -= c.learning_rate * c.weight_decay * theta;
    return next;
  }
};

}  // namespace

TEST(AdamW, MatchesScalarOracleOverSeveralSteps) {
  std::mt19937_64 rng(5);
  SemiEncoder m = build_model(3, 2, 1, 0.0, 4);
  for (auto& l : m.layers())
    for (auto& bv : l.bias) bv = 0.25;
  OptimConfig cfg;
  cfg.learning_rate = 1e-2;
  cfg.weight_decay = 0.1;

  // Track one weight and one bias of every layer.
  std::vector<ScalarAdamW> w_oracle(kNumLayers), b_oracle(kNumLayers);
  std::vector<double> w_expect(kNumLayers), b_expect(kNumLayers);
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    w_expect[l] = m.layers()[l].weight(0, 0);
    b_expect[l] = m.layers()[l].bias[0];
  }
  AdamWState state = AdamWState::for_model(m);
  for (int t = 1; t <= 5; ++t) {
    const GradientSet g = random_grads(m, rng);
    for (std::size_t l = 0; l < kNumLayers; ++l) {
      w_expect[l] = w_oracle[l].step(w_expect[l], g.layers[l].weight(0, 0), t, cfg, true);
      b_expect[l] = b_oracle[l].step(b_expect[l], g.layers[l].bias[0], t, cfg, false);
    }
    adamw_step(m, g, state, cfg);
    EXPECT_EQ(state.step, static_cast<std::uint64_t>(t));
    for (std::size_t l = 0; l < kNumLayers; ++l) {
      EXPECT_NEAR(m.layers()[l].weight(0, 0), w_expect[l], 1e-14);
      EXPECT_NEAR(m.layers()[l].bias[0], b_expect[l], 1e-14);
    }
  }
}

TEST(AdamW, ZeroGradientOnlyDecaysWeights) {
  SemiEncoder m = build_model(3, 2, 1, 0.0, 4);
  for (auto& l : m.layers())
    for (auto& bv : l.bias) bv = 1.0;
  const SemiEncoder before = m;
  OptimConfig cfg;
  cfg.learning_rate = 0.1;
  cfg.weight_decay = 0.5;
  AdamWState state = AdamWState::for_model(m);
  adamw_step(m, zero_gradients(m), state, cfg);
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    const auto& a = before.layers()[l];
    const auto& b = m.layers()[l];
    for (std::size_t i = 0; i < a.weight.size(); ++i) {
      EXPECT_NEAR(b.weight.values()[i], a.weight.values()[i] * (1 - 0.05), 1e-15);
    }
    EXPECT_EQ(a.bias, b.bias);
  }
}

TEST(AdamW, NonFiniteGradientNamesLayerAndLeavesModelUntouched) {
  std::mt19937_64 rng(1);
  SemiEncoder m = build_model(3, 2, 1, 0.0, 4);
  const SemiEncoder before = m;
  GradientSet g = random_grads(m, rng);
  g.layers[3].bias[0] = std::numeric_limits<double>::quiet_NaN();
  AdamWState state = AdamWState::for_model(m);
  try {
    adamw_step(m, g, state, OptimConfig{});
    FAIL() << "expected numeric error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kNumeric);
    EXPECT_NE(std::string(e.what()).find("layer 3"), std::string::npos) << e.what();
  }
  EXPECT_EQ(state.step, 0u);
  for (std::size_t l = 0; l < kNumLayers; ++l) {
    EXPECT_EQ(before.layers()[l].weight, m.layers()[l].weight);
  }
}

TEST(AdamW, ShapeMismatchIsInvalidState) {
  SemiEncoder m = build_model(3, 2, 1, 0.0, 4);
  const SemiEncoder other = build_model(3, 2, 2, 0.0, 4);
  AdamWState state = AdamWState::for_model(m);
  try {
    adamw_step(m, zero_gradients(other), state, OptimConfig{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidState);
  }
}

TEST(OptimConfig, ValidatesBounds) {
  auto code = [](OptimConfig c) {
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::kInternal;
  };
  OptimConfig c;
  EXPECT_NO_THROW(c.validate());
  c.learning_rate = 0.0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = {};
  c.beta1 = 1.0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = {};
  c.beta2 = -0.1;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = {};
  c.epsilon = 0.0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
  c = {};
  c.weight_decay = -1.0;
  EXPECT_EQ(code(c), ErrorCode::kConfig);
}

TEST(AdamW, ReducesLossOnAFixedBatch) {
  std::mt19937_64 rng(9);
  SemiEncoder m = build_model(6, 3, 4, 0.0, 2);
  const Matrix x = rdict::testing::normal_matrix(rng, 16, 6);
  const Matrix y = rdict::testing::normal_matrix(rng, 16, 3);
  OptimConfig cfg;
  cfg.learning_rate = 1e-3;
  AdamWState state = AdamWState::for_model(m);
  const double start = mse_loss(forward(m, x, false).output, y).value;
  for (int i = 0; i < 200; ++i) {
    const auto f = forward(m, x, false);
    adamw_step(m, backward(m, f.cache, f.output, y), state, cfg);
  }
  EXPECT_LT(mse_loss(forward(m, x, false).output, y).value, 0.5 * start);
}
