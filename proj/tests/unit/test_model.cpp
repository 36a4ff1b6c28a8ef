#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <random>

#include "gradcheck.hpp"
#include "rdict/error.hpp"
#include "rdict/model.hpp"
#include "test_support.hpp"

using namespace rdict;
using rdict::testing::TempDir;

namespace {

// Closed-form parameter count for d -> 8s -> 4s -> 2s -> s -> b.
std::size_t expected_params(std::size_t d, std::size_t b, std::size_t s) {
  const std::size_t w[] = {d, 8 * s, 4 * s, 2 * s, s, b};
  std::size_t total = 0;
  for (int i = 0; i < 5; ++i) total += w[i] * w[i + 1] + w[i + 1];
  return total;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInternal;
}

std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream f(p, std::ios::binary | std::ios::trunc);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST(Architecture, DefaultWidthsAndParamCount) {
  const auto m = build_model(256, 256, 256, 0.3, 1);
  EXPECT_EQ(m.hidden_widths(), (std::vector<std::size_t>{2048, 1024, 512, 256}));
  EXPECT_EQ(param_count(m), 3346432u);
  EXPECT_EQ(param_count(m), expected_params(256, 256, 256));
}

TEST(Architecture, SmallestModel) {
  const auto m = build_model(1, 1, 1, 0.0, 0);
  EXPECT_EQ(m.hidden_widths(), (std::vector<std::size_t>{8, 4, 2, 1}));
  EXPECT_EQ(param_count(m), 67u);
}

TEST(Architecture, ParamCountMatchesClosedFormAcrossShapes) {
  for (std::size_t d : {3u, 17u, 64u})
    for (std::size_t b : {1u, 9u, 32u})
      for (std::size_t s : {1u, 5u, 16u}) {
        EXPECT_EQ(param_count(build_model(d, b, s, 0.1, 9)), expected_params(d, b, s));
      }
}

TEST(Architecture, OnlyHiddenLayersActivate) {
  const auto specs = layer_specs(10, 6, 2);
  ASSERT_EQ(specs.size(), kNumLayers);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_TRUE(specs[i].has_activation);
  EXPECT_FALSE(specs[4].has_activation);
  EXPECT_EQ(specs[4].in_dim, 2u);
  EXPECT_EQ(specs[4].out_dim, 6u);
}

TEST(Architecture, RejectsBadHyperparameters) {
  EXPECT_EQ(code_of([] { build_model(0, 4, 4, 0.0, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { build_model(4, 4, 0, 0.0, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { build_model(4, 4, 4, 1.0, 0); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { build_model(4, 4, 4, -0.1, 0); }), ErrorCode::kInvalidArgument);
}

TEST(Init, HeNormalStatisticsAndZeroBias) {
  const auto m = build_model(256, 64, 64, 0.0, 42);
  const auto& first = m.layers()[0];
  double sum = 0.0, sq = 0.0;
  for (double w : first.weight.values()) {
    sum += w;
    sq += w * w;
  }
  const double n = static_cast<double>(first.weight.size());
  const double mean = sum / n;
  const double sd = std::sqrt(sq / n - mean * mean);
  EXPECT_NEAR(mean, 0.0, 0.005);
  EXPECT_NEAR(sd, std::sqrt(2.0 / 256.0), 0.003);
  for (const auto& layer : m.layers()) {
    for (double bval : layer.bias) EXPECT_EQ(bval, 0.0);
  }
}

TEST(Init, SameSeedSameWeights) {
  const auto a = build_model(8, 8, 4, 0.2, 5);
  const auto b = build_model(8, 8, 4, 0.2, 5);
  const auto c = build_model(8, 8, 4, 0.2, 6);
  EXPECT_EQ(a.layers()[2].weight, b.layers()[2].weight);
  EXPECT_NE(a.layers()[2].weight, c.layers()[2].weight);
}

TEST(Gelu, ReferenceValues) {
  // 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))) evaluated independently.
  const double c = std::sqrt(2.0 / M_PI);
  for (double x : {-3.0, -1.0, -0.1, 0.0, 0.5, 2.0}) {
    EXPECT_NEAR(gelu(x), 0.5 * x * (1.0 + std::tanh(c * (x + 0.044715 * x * x * x))), 1e-15);
    const double h = 1e-6;
    EXPECT_NEAR(gelu_derivative(x), (gelu(x + h) - gelu(x - h)) / (2 * h), 1e-8);
  }
  EXPECT_EQ(gelu(0.0), 0.0);
}

TEST(Forward, MatchesScalarLoopOracle) {
  std::mt19937_64 rng(3);
  const auto m = build_model(5, 3, 2, 0.0, 11);
  auto layers = const_cast<SemiEncoder&>(m).layers();
  for (auto& l : layers)
    for (auto& bv : l.bias) bv = std::normal_distribution<double>(0, 0.1)(rng);
  const Matrix x = rdict::testing::normal_matrix(rng, 4, 5);
  const Matrix y = forward(m, x, false).output;
  for (std::size_t n = 0; n < 4; ++n) {
    std::vector<double> a(x.row(n).begin(), x.row(n).end());
    for (const auto& l : m.layers()) {
      std::vector<double> z(l.spec.out_dim);
      for (std::size_t o = 0; o < l.spec.out_dim; ++o) {
        z[o] = l.bias[o];
        for (std::size_t i = 0; i < l.spec.in_dim; ++i) z[o] += l.weight(o, i) * a[i];
        if (l.spec.has_activation) z[o] = gelu(z[o]);
      }
      a = z;
    }
    for (std::size_t j = 0; j < 3; ++j) EXPECT_NEAR(y(n, j), a[j], 1e-12);
  }
}

TEST(Forward, EvalModeIgnoresDropoutAndSeed) {
  std::mt19937_64 rng(1);
  const auto m = build_model(6, 4, 3, 0.5, 2);
  const Matrix x = rdict::testing::normal_matrix(rng, 3, 6);
  EXPECT_EQ(forward(m, x, false, 1).output, forward(m, x, false, 999).output);
  EXPECT_TRUE(forward(m, x, false).cache.dropout_masks.empty());
}

TEST(Forward, TrainModeDropoutIsSeededAndInverted) {
  std::mt19937_64 rng(1);
  const auto m = build_model(32, 8, 32, 0.25, 2);
  const Matrix x = rdict::testing::normal_matrix(rng, 64, 32);
  const auto a = forward(m, x, true, 10);
  const auto b = forward(m, x, true, 10);
  const auto c = forward(m, x, true, 11);
  EXPECT_EQ(a.output, b.output);
  EXPECT_NE(a.output, c.output);
  ASSERT_EQ(a.cache.dropout_masks.size(), 4u);
  // Mask entries are 0 or 1/(1-p), with about p of them zero.
  std::size_t zeros = 0, total = 0;
  for (const auto& mask : a.cache.dropout_masks) {
    for (double v : mask.values()) {
      EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-15);
      zeros += v == 0.0;
      ++total;
    }
  }
  EXPECT_NEAR(static_cast<double>(zeros) / static_cast<double>(total), 0.25, 0.02);
}

TEST(Forward, RejectsWrongInputWidth) {
  const auto m = build_model(4, 2, 1, 0.0, 0);
  EXPECT_EQ(code_of([&] { forward(m, Matrix(2, 5), false); }), ErrorCode::kDimensionMismatch);
  const std::vector<double> v(3, 1.0);
  EXPECT_EQ(code_of([&] { predict(m, v); }), ErrorCode::kDimensionMismatch);
}

TEST(Mse, MatchesScalarLoopOracle) {
  std::mt19937_64 rng(8);
  const Matrix p = rdict::testing::normal_matrix(rng, 7, 5);
  const Matrix t = rdict::testing::normal_matrix(rng, 7, 5);
  double total = 0.0;
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 5; ++j) total += (p(i, j) - t(i, j)) * (p(i, j) - t(i, j));
  const auto r = mse_loss(p, t);
  EXPECT_NEAR(r.value, total / 7.0, 1e-12);
  EXPECT_NEAR(r.per_dim, total / 35.0, 1e-12);
  ASSERT_EQ(r.sample_sq_norms.size(), 7u);
  EXPECT_EQ(mse_loss(p, p).value, 0.0);
}

TEST(Mse, ShapeMismatchIsDimensionError) {
  EXPECT_EQ(code_of([] { mse_loss(Matrix(2, 3), Matrix(2, 4)); }), ErrorCode::kDimensionMismatch);
}

TEST(Backward, MatchesFiniteDifferencesWithoutDropout) {
  std::mt19937_64 rng(21);
  const auto m = build_model(4, 3, 2, 0.0, 7);
  const Matrix x = rdict::testing::normal_matrix(rng, 5, 4);
  const Matrix y = rdict::testing::normal_matrix(rng, 5, 3);
  const auto r = rdict::testing::check_gradients(m, x, y, false, 0);
  EXPECT_EQ(r.n_checked, param_count(m));
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst;
}

TEST(Backward, ReplaysDropoutMasks) {
  std::mt19937_64 rng(22);
  const auto m = build_model(5, 4, 3, 0.4, 9);
  const Matrix x = rdict::testing::normal_matrix(rng, 6, 5);
  const Matrix y = rdict::testing::normal_matrix(rng, 6, 4);
  const auto r = rdict::testing::check_gradients(m, x, y, true, 1234);
  EXPECT_LT(r.max_rel_error, 1e-5) << r.worst;
}

TEST(Backward, RejectsMismatchedCache) {
  std::mt19937_64 rng(2);
  const auto m = build_model(4, 3, 2, 0.0, 7);
  const auto other = build_model(4, 3, 3, 0.0, 7);
  const Matrix x = rdict::testing::normal_matrix(rng, 2, 4);
  const Matrix y = rdict::testing::normal_matrix(rng, 2, 3);
  const auto fwd = forward(other, x, false);
  EXPECT_EQ(code_of([&] { backward(m, fwd.cache, fwd.output, y); }), ErrorCode::kInvalidState);
}

TEST(Checkpoint, RoundTripWithinFloat32) {
  TempDir dir("model");
  std::mt19937_64 rng(4);
  const auto m = build_model(16, 12, 4, 0.3, 77);
  save_checkpoint(m, dir / "m.bin");
  EXPECT_EQ(std::filesystem::file_size(dir / "m.bin"), checkpoint_size_bytes(m));
  EXPECT_EQ(checkpoint_size_bytes(m), 28 + 40 + 4 * param_count(m));
  const auto back = load_checkpoint(dir / "m.bin");
  EXPECT_EQ(back.input_dim(), 16u);
  EXPECT_EQ(back.output_dim(), 12u);
  EXPECT_EQ(back.base_width(), 4u);
  EXPECT_FLOAT_EQ(static_cast<float>(back.dropout_rate()), 0.3f);
  for (int i = 0; i < 20; ++i) {
    const auto x = rdict::testing::normal_vector(rng, 16);
    const auto a = predict(m, x);
    const auto b = predict(back, x);
    for (std::size_t j = 0; j < a.size(); ++j) EXPECT_NEAR(a[j], b[j], 1e-4);
  }
  // Saving the reloaded model reproduces the file byte for byte.
  save_checkpoint(back, dir / "again.bin");
  EXPECT_EQ(read_bytes(dir / "m.bin"), read_bytes(dir / "again.bin"));
}

TEST(Checkpoint, DefaultModelFileSize) {
  EXPECT_EQ(checkpoint_size_bytes(build_model(256, 256, 256, 0.3, 0)), 13385796u);
}

TEST(Checkpoint, HeaderLayout) {
  TempDir dir("model");
  save_checkpoint(build_model(3, 2, 1, 0.0, 1), dir / "m.bin");
  const auto bytes = read_bytes(dir / "m.bin");
  ASSERT_GE(bytes.size(), 28u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "RDCK");
  auto u32 = [&](std::size_t off) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(bytes[off + i]);
    return v;
  };
  EXPECT_EQ(u32(4), 1u);
  EXPECT_EQ(u32(8), 3u);
  EXPECT_EQ(u32(12), 2u);
  EXPECT_EQ(u32(16), 1u);
  EXPECT_EQ(u32(20), 5u);
  EXPECT_EQ(u32(28), 8u);  // first layer out_dim
  EXPECT_EQ(u32(32), 3u);  // first layer in_dim
}

TEST(Checkpoint, CorruptionIsDetected) {
  TempDir dir("model");
  save_checkpoint(build_model(3, 2, 1, 0.0, 1), dir / "m.bin");
  const auto good = read_bytes(dir / "m.bin");

  auto bad = good;
  bad[0] = 'X';
  write_bytes(dir / "magic.bin", bad);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "magic.bin"); }), ErrorCode::kCorruptCheckpoint);

  bad = good;
  bad[4] = 2;
  write_bytes(dir / "version.bin", bad);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "version.bin"); }), ErrorCode::kCorruptCheckpoint);

  bad.assign(good.begin(), good.end() - 3);
  write_bytes(dir / "short.bin", bad);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "short.bin"); }), ErrorCode::kCorruptCheckpoint);

  bad = good;
  bad.push_back(0);
  write_bytes(dir / "long.bin", bad);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "long.bin"); }), ErrorCode::kCorruptCheckpoint);

  bad = good;
  bad[28] = 9;  // first layer out_dim no longer 8s
  write_bytes(dir / "shape.bin", bad);
  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "shape.bin"); }), ErrorCode::kCorruptCheckpoint);

  EXPECT_EQ(code_of([&] { load_checkpoint(dir / "missing.bin"); }), ErrorCode::kIo);
}

TEST(Checkpoint, ErrorNamesByteOffset) {
  TempDir dir("model");
  write_bytes(dir / "tiny.bin", {'R', 'D', 'C', 'K', 1});
  try {
    load_checkpoint(dir / "tiny.bin");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
  }
}
