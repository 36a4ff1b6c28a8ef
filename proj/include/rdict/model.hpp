#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rdict/matrix.hpp"

namespace rdict {

struct LayerSpec {
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  bool has_activation = false;

  friend bool operator==(const LayerSpec&, const LayerSpec&) = default;
};

/// One affine layer. `weight` is out_dim x in_dim, row-major.
struct DenseLayer {
  LayerSpec spec;
  Matrix weight;
  std::vector<double> bias;
};

inline constexpr std::size_t kNumLayers = 5;

/// Feed-forward network mapping definition vectors (length d) to word vectors
/// (length b) through hidden widths 8s, 4s, 2s, s and an affine output layer.
///
/// Instances are immutable during forward/backward; the optimizer mutates the
/// layers through `layers()` under a single-writer contract.
class SemiEncoder {
 public:
  SemiEncoder(std::size_t d, std::size_t b, std::size_t s, double dropout_rate,
              std::uint64_t init_seed, std::vector<DenseLayer> layers);

  std::size_t input_dim() const noexcept { return d_; }
  std::size_t output_dim() const noexcept { return b_; }
  std::size_t base_width() const noexcept { return s_; }
  double dropout_rate() const noexcept { return dropout_rate_; }
  std::uint64_t init_seed() const noexcept { return init_seed_; }

  std::span<const DenseLayer> layers() const noexcept { return layers_; }
  std::span<DenseLayer> layers() noexcept { return layers_; }

  /// Widths of the four hidden layers.
  std::vector<std::size_t> hidden_widths() const;

 private:
  std::size_t d_;
  std::size_t b_;
  std::size_t s_;
  double dropout_rate_;
  std::uint64_t init_seed_;
  std::vector<DenseLayer> layers_;
};

/// The five layer shapes d -> 8s -> 4s -> 2s -> s -> b.
std::vector<LayerSpec> layer_specs(std::size_t d, std::size_t b, std::size_t s);

/// He-normal weights (std sqrt(2/in_dim)) and zero biases. Throws
/// kInvalidArgument for zero dimensions or dropout_rate outside [0,1).
SemiEncoder build_model(std::size_t d, std::size_t b, std::size_t s,
                        double dropout_rate, std::uint64_t init_seed);

std::size_t param_count(const SemiEncoder& model) noexcept;

/// Tanh approximation of GELU.
double gelu(double x) noexcept;
double gelu_derivative(double x) noexcept;

/// Everything backward() needs from one forward pass.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre_activations;   // per layer, N x out_dim
  std::vector<Matrix> activations;       // per hidden layer, after dropout
  std::vector<Matrix> dropout_masks;     // per hidden layer; empty in eval mode
  bool train_mode = false;

  std::size_t batch_size() const noexcept { return input.rows(); }
};

struct LayerGradient {
  Matrix weight;
  std::vector<double> bias;
};

struct GradientSet {
  std::vector<LayerGradient> layers;
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

/// Runs the network over a batch (one input per row). In train mode every
/// hidden activation goes through inverted dropout driven by `dropout_seed`.
ForwardResult forward(const SemiEncoder& model, const Matrix& input,
                      bool train_mode, std::uint64_t dropout_seed = 0);

/// Eval-mode forward of a single vector.
std::vector<double> predict(const SemiEncoder& model, std::span<const double> input);

struct MseResult {
  double value = 0.0;                  // (1/N) sum_i ||pred_i - target_i||^2
  double per_dim = 0.0;                // value / b
  std::vector<double> sample_sq_norms;  // ||pred_i - target_i||^2
};

MseResult mse_loss(const Matrix& pred, const Matrix& target);

/// Analytic gradient of mse_loss(pred, target).value with respect to every
/// parameter, replaying the dropout masks stored in `cache`.
GradientSet backward(const SemiEncoder& model, const ForwardCache& cache,
                     const Matrix& pred, const Matrix& target);

GradientSet zero_gradients(const SemiEncoder& model);

/// Binary checkpoint, float32 parameters (see README for the layout).
void save_checkpoint(const SemiEncoder& model, const std::filesystem::path& path);
SemiEncoder load_checkpoint(const std::filesystem::path& path);

std::size_t checkpoint_size_bytes(const SemiEncoder& model) noexcept;

}  // namespace rdict
