#pragma once

#include <cstdint>

#include "rdict/model.hpp"

namespace rdict {

struct OptimConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.01;

  /// Throws kConfig when a bound is violated.
  void validate() const;
};

/// First/second moment accumulators, shaped like the model parameters.
struct AdamWState {
  std::uint64_t step = 0;
  GradientSet first_moment;
  GradientSet second_moment;

  static AdamWState for_model(const SemiEncoder& model);
};

/// One AdamW update in place. Weight decay is decoupled and applied to weights
/// only. Throws kNumeric naming the layer if a gradient entry is not finite,
/// before any parameter is touched.
void adamw_step(SemiEncoder& model, const GradientSet& grads, AdamWState& state,
                const OptimConfig& cfg);

}  // namespace rdict
