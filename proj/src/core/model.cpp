#include "rdict/model.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "rdict/error.hpp"
#include "rdict/rng.hpp"

namespace rdict {
namespace {

constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;

void check_dims(std::size_t d, std::size_t b, std::size_t s) {
  if (d == 0 || b == 0 || s == 0) {
    fail(ErrorCode::kInvalidArgument, "model dimensions must be positive (d=" +
                                          std::to_string(d) + ", b=" + std::to_string(b) +
                                          ", s=" + std::to_string(s) + ")");
  }
}

void check_dropout(double rate) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    fail(ErrorCode::kInvalidArgument,
         "dropout_rate must lie in [0,1), got " + std::to_string(rate));
  }
}

// out = in * W^T + bias, one row per sample.
void affine(const Matrix& in, const DenseLayer& layer, Matrix& out) {
  const std::size_t n = in.rows();
  const std::size_t out_dim = layer.spec.out_dim;
  const std::size_t in_dim = layer.spec.in_dim;
  out = Matrix(n, out_dim);
  for (std::size_t r = 0; r < n; ++r) {
    const double* x = in.row(r).data();
    double* y = out.row(r).data();
    for (std::size_t o = 0; o < out_dim; ++o) {
      const double* w = layer.weight.row(o).data();
      double acc = 0.0;
      for (std::size_t i = 0; i < in_dim; ++i) acc += w[i] * x[i];
      y[o] = acc + layer.bias[o];
    }
  }
}

}  // namespace

SemiEncoder::SemiEncoder(std::size_t d, std::size_t b, std::size_t s, double dropout_rate,
                         std::uint64_t init_seed, std::vector<DenseLayer> layers)
    : d_(d), b_(b), s_(s), dropout_rate_(dropout_rate), init_seed_(init_seed),
      layers_(std::move(layers)) {
  check_dims(d, b, s);
  check_dropout(dropout_rate);
  const auto specs = layer_specs(d, b, s);
  if (layers_.size() != specs.size()) {
    fail(ErrorCode::kInvalidArgument, "expected " + std::to_string(specs.size()) +
                                          " layers, got " + std::to_string(layers_.size()));
  }
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const DenseLayer& l = layers_[i];
    if (!(l.spec == specs[i]) || l.weight.rows() != specs[i].out_dim ||
        l.weight.cols() != specs[i].in_dim || l.bias.size() != specs[i].out_dim) {
      fail(ErrorCode::kInvalidArgument,
           "layer " + std::to_string(i) + " does not match the 8s/4s/2s/s geometry");
    }
  }
}

std::vector<std::size_t> SemiEncoder::hidden_widths() const {
  std::vector<std::size_t> widths;
  for (const auto& l : layers_) {
    if (l.spec.has_activation) widths.push_back(l.spec.out_dim);
  }
  return widths;
}

std::vector<LayerSpec> layer_specs(std::size_t d, std::size_t b, std::size_t s) {
  check_dims(d, b, s);
  const std::array<std::size_t, 6> widths{d, 8 * s, 4 * s, 2 * s, s, b};
  std::vector<LayerSpec> specs;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    specs.push_back({widths[i], widths[i + 1], i + 2 < widths.size()});
  }
  return specs;
}

SemiEncoder build_model(std::size_t d, std::size_t b, std::size_t s, double dropout_rate,
                        std::uint64_t init_seed) {
  check_dims(d, b, s);
  check_dropout(dropout_rate);
  std::mt19937_64 rng(init_seed);
  std::vector<DenseLayer> layers;
  for (const LayerSpec& spec : layer_specs(d, b, s)) {
    DenseLayer layer{spec, Matrix(spec.out_dim, spec.in_dim),
                     std::vector<double>(spec.out_dim, 0.0)};
    std::normal_distribution<double> normal(0.0,
                                            std::sqrt(2.0 / static_cast<double>(spec.in_dim)));
    for (double& w : layer.weight.values()) w = normal(rng);
    layers.push_back(std::move(layer));
  }
  return SemiEncoder(d, b, s, dropout_rate, init_seed, std::move(layers));
}

std::size_t param_count(const SemiEncoder& model) noexcept {
  std::size_t total = 0;
  for (const auto& l : model.layers()) total += l.spec.in_dim * l.spec.out_dim + l.spec.out_dim;
  return total;
}

double gelu(double x) noexcept {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_derivative(double x) noexcept {
  const double u = kGeluScale * (x + kGeluCubic * x * x * x);
  const double t = std::tanh(u);
  const double du = kGeluScale * (1.0 + 3.0 * kGeluCubic * x * x);
  return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

ForwardResult forward(const SemiEncoder& model, const Matrix& input, bool train_mode,
                      std::uint64_t dropout_seed) {
  if (input.cols() != model.input_dim()) {
    fail(ErrorCode::kDimensionMismatch, "input vectors have length " +
                                            std::to_string(input.cols()) + ", model expects " +
                                            std::to_string(model.input_dim()));
  }
  const double rate = model.dropout_rate();
  const bool use_dropout = train_mode && rate > 0.0;
  const double keep_scale = 1.0 / (1.0 - rate);

  ForwardResult result;
  ForwardCache& cache = result.cache;
  cache.input = input;
  cache.train_mode = train_mode;

  std::mt19937_64 rng(dropout_seed);
  const Matrix* current = &cache.input;
  for (const DenseLayer& layer : model.layers()) {
    Matrix z;
    affine(*current, layer, z);
    if (!layer.spec.has_activation) {
      result.output = z;
      cache.pre_activations.push_back(std::move(z));
      break;
    }
    Matrix a(z.rows(), z.cols());
    for (std::size_t k = 0; k < z.size(); ++k) a.values()[k] = gelu(z.values()[k]);
    if (use_dropout) {
      Matrix mask(z.rows(), z.cols());
      for (std::size_t k = 0; k < mask.size(); ++k) {
        const double m = unit_interval(rng()) < rate ? 0.0 : keep_scale;
        mask.values()[k] = m;
        a.values()[k] *= m;
      }
      cache.dropout_masks.push_back(std::move(mask));
    }
    cache.pre_activations.push_back(std::move(z));
    cache.activations.push_back(std::move(a));
    current = &cache.activations.back();
  }
  return result;
}

std::vector<double> predict(const SemiEncoder& model, std::span<const double> input) {
  Matrix x(1, input.size());
  std::copy(input.begin(), input.end(), x.row(0).begin());
  auto result = forward(model, x, false);
  return {result.output.row(0).begin(), result.output.row(0).end()};
}

MseResult mse_loss(const Matrix& pred, const Matrix& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    fail(ErrorCode::kDimensionMismatch,
         "prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) +
             " but target is " + std::to_string(target.rows()) + "x" +
             std::to_string(target.cols()));
  }
  MseResult r;
  r.sample_sq_norms.resize(pred.rows());
  double total = 0.0;
  for (std::size_t i = 0; i < pred.rows(); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < pred.cols(); ++j) {
      const double diff = pred(i, j) - target(i, j);
      sq += diff * diff;
    }
    r.sample_sq_norms[i] = sq;
    total += sq;
  }
  if (pred.rows() > 0) r.value = total / static_cast<double>(pred.rows());
  if (pred.cols() > 0) r.per_dim = r.value / static_cast<double>(pred.cols());
  return r;
}

GradientSet zero_gradients(const SemiEncoder& model) {
  GradientSet g;
  for (const auto& l : model.layers()) {
    g.layers.push_back({Matrix(l.spec.out_dim, l.spec.in_dim),
                        std::vector<double>(l.spec.out_dim, 0.0)});
  }
  return g;
}

GradientSet backward(const SemiEncoder& model, const ForwardCache& cache, const Matrix& pred,
                     const Matrix& target) {
  const auto layers = model.layers();
  const std::size_t n = cache.batch_size();
  const std::size_t hidden = layers.size() - 1;
  const bool masked = !cache.dropout_masks.empty();
  if (cache.pre_activations.size() != layers.size() || cache.activations.size() != hidden ||
      (masked && cache.dropout_masks.size() != hidden)) {
    fail(ErrorCode::kInvalidState, "forward cache does not match the model's layers");
  }
  if (pred.rows() != n || target.rows() != n || pred.cols() != model.output_dim() ||
      target.cols() != model.output_dim()) {
    fail(ErrorCode::kInvalidState, "prediction/target batch does not match the forward cache");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    if (cache.pre_activations[l].rows() != n ||
        cache.pre_activations[l].cols() != layers[l].spec.out_dim) {
      fail(ErrorCode::kInvalidState, "forward cache layer " + std::to_string(l) +
                                         " has the wrong shape");
    }
  }

  GradientSet grads = zero_gradients(model);
  if (n == 0) return grads;

  // dL/dpred for L = (1/N) sum ||pred - target||^2
  Matrix delta(n, pred.cols());
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t k = 0; k < delta.size(); ++k) {
    delta.values()[k] = scale * (pred.values()[k] - target.values()[k]);
  }

  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const Matrix& layer_in = l == 0 ? cache.input : cache.activations[l - 1];
    LayerGradient& g = grads.layers[l];
    const std::size_t in_dim = layer.spec.in_dim;
    const std::size_t out_dim = layer.spec.out_dim;

    for (std::size_t r = 0; r < n; ++r) {
      const double* dz = delta.row(r).data();
      const double* x = layer_in.row(r).data();
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dzo = dz[o];
        g.bias[o] += dzo;
        if (dzo == 0.0) continue;
        double* gw = g.weight.row(o).data();
        for (std::size_t i = 0; i < in_dim; ++i) gw[i] += dzo * x[i];
      }
    }
    if (l == 0) break;

    // Propagate to the previous layer's pre-activation.
    Matrix prev(n, in_dim);
    for (std::size_t r = 0; r < n; ++r) {
      const double* dz = delta.row(r).data();
      double* dx = prev.row(r).data();
      for (std::size_t o = 0; o < out_dim; ++o) {
        const double dzo = dz[o];
        if (dzo == 0.0) continue;
        const double* w = layer.weight.row(o).data();
        for (std::size_t i = 0; i < in_dim; ++i) dx[i] += dzo * w[i];
      }
    }
    const Matrix& z_prev = cache.pre_activations[l - 1];
    for (std::size_t k = 0; k < prev.size(); ++k) {
      double v = prev.values()[k];
      if (masked) v *= cache.dropout_masks[l - 1].values()[k];
      prev.values()[k] = v * gelu_derivative(z_prev.values()[k]);
    }
    delta = std::move(prev);
  }
  return grads;
}

// ---------------------------------------------------------------------------
// Checkpoint I/O. All integers little-endian, parameters float32.

namespace {

constexpr std::array<char, 4> kMagic{'R', 'D', 'C', 'K'};
constexpr std::uint32_t kFormatVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, double v) {
  put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

class Reader {
 public:
  explicit Reader(std::string bytes) : bytes_(std::move(bytes)) {}

  std::size_t offset() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

  void need(std::size_t n, const char* what) const {
    if (remaining() < n) {
      fail(ErrorCode::kCorruptCheckpoint, std::string("truncated checkpoint at byte offset ") +
                                              std::to_string(pos_) + " while reading " + what);
    }
  }

  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += 4;
    return v;
  }

  double f32(const char* what) { return std::bit_cast<float>(u32(what)); }

  std::string_view raw(std::size_t n, const char* what) {
    need(n, what);
    std::string_view v(bytes_.data() + pos_, n);
    pos_ += n;
    return v;
  }

 private:
  std::string bytes_;
  std::size_t pos_ = 0;
};

[[noreturn]] void corrupt(std::size_t offset, const std::string& why) {
  fail(ErrorCode::kCorruptCheckpoint, why + " at byte offset " + std::to_string(offset));
}

}  // namespace

std::size_t checkpoint_size_bytes(const SemiEncoder& model) noexcept {
  return 4 + 4 + 4 * 4 + 4 + kNumLayers * 8 + 4 * param_count(model);
}

void save_checkpoint(const SemiEncoder& model, const std::filesystem::path& path) {
  std::string out;
  out.reserve(checkpoint_size_bytes(model));
  out.append(kMagic.data(), kMagic.size());
  put_u32(out, kFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(model.input_dim()));
  put_u32(out, static_cast<std::uint32_t>(model.output_dim()));
  put_u32(out, static_cast<std::uint32_t>(model.base_width()));
  put_u32(out, static_cast<std::uint32_t>(model.layers().size()));
  put_f32(out, model.dropout_rate());
  for (const auto& l : model.layers()) {
    put_u32(out, static_cast<std::uint32_t>(l.spec.out_dim));
    put_u32(out, static_cast<std::uint32_t>(l.spec.in_dim));
    for (double w : l.weight.values()) put_f32(out, w);
    for (double b : l.bias) put_f32(out, b);
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) fail(ErrorCode::kIo, "cannot open checkpoint for writing: " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) fail(ErrorCode::kIo, "failed writing checkpoint: " + path.string());
}

SemiEncoder load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::kIo, "cannot open checkpoint: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  Reader r(std::move(bytes));

  if (r.raw(4, "magic") != std::string_view(kMagic.data(), kMagic.size())) {
    corrupt(0, "bad magic bytes (expected \"RDCK\")");
  }
  const std::size_t version_at = r.offset();
  if (const auto v = r.u32("version"); v != kFormatVersion) {
    corrupt(version_at, "unsupported format version " + std::to_string(v));
  }
  const std::size_t dims_at = r.offset();
  const std::size_t d = r.u32("d");
  const std::size_t b = r.u32("b");
  const std::size_t s = r.u32("s");
  const std::size_t n_layers = r.u32("n_layers");
  if (d == 0 || b == 0 || s == 0) corrupt(dims_at, "zero model dimension");
  if (n_layers != kNumLayers) {
    corrupt(dims_at + 12, "expected 5 layers, header says " + std::to_string(n_layers));
  }
  const std::size_t rate_at = r.offset();
  const double rate = r.f32("dropout_rate");
  if (!(rate >= 0.0 && rate < 1.0)) corrupt(rate_at, "dropout_rate outside [0,1)");

  std::vector<DenseLayer> layers;
  for (const LayerSpec& spec : layer_specs(d, b, s)) {
    const std::size_t header_at = r.offset();
    const std::size_t out_dim = r.u32("layer out_dim");
    const std::size_t in_dim = r.u32("layer in_dim");
    if (out_dim != spec.out_dim || in_dim != spec.in_dim) {
      corrupt(header_at, "layer shape " + std::to_string(out_dim) + "x" +
                             std::to_string(in_dim) + " does not match header dimensions");
    }
    r.need(4 * (out_dim * in_dim + out_dim), "layer parameters");
    DenseLayer layer{spec, Matrix(out_dim, in_dim), std::vector<double>(out_dim)};
    for (double& w : layer.weight.values()) w = r.f32("weight");
    for (double& v : layer.bias) v = r.f32("bias");
    layers.push_back(std::move(layer));
  }
  if (r.remaining() != 0) corrupt(r.offset(), "trailing bytes after last layer");
  return SemiEncoder(d, b, s, rate, 0, std::move(layers));
}

}  // namespace rdict
