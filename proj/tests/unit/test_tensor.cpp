#include <gtest/gtest.h>

#include <random>

#include "gitsr/nn/layers.hpp"

using namespace gitsr;
using namespace gitsr::nn;

namespace {

Tensor<double> random_tensor(std::size_t r, std::size_t c, std::mt19937_64& rng) {
  Tensor<double> t(r, c);
  for (auto& v : t.values()) v = 2.0 * uniform01(rng) - 1.0;
  return t;
}

Tensor<double> naive_matmul(const Tensor<double>& a, const Tensor<double>& b) {
  Tensor<double> c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

}  // namespace

TEST(Matmul, MatchesNaiveOracleOnOddShapes) {
  std::mt19937_64 rng(1);
  for (auto [m, k, n] : std::vector<std::array<std::size_t, 3>>{{3, 5, 4}, {1, 1, 1}, {9, 7, 13}, {4, 16, 3}, {17, 2, 33}}) {
    const auto a = random_tensor(m, k, rng), b = random_tensor(k, n, rng);
    const auto ref = naive_matmul(a, b);
    const auto c = matmul(a, b);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c.values()[i], ref.values()[i], 1e-12);

    const auto bt = transpose(b);
    const auto c2 = matmul_nt(a, bt);
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_NEAR(c2.values()[i], ref.values()[i], 1e-12);

    // a^T * c accumulated on top of ones
    Tensor<double> acc(k, n, 1.0);
    const auto dref = naive_matmul(transpose(a), ref);
    matmul_tn_acc(a, ref, acc);
    for (std::size_t i = 0; i < acc.size(); ++i) EXPECT_NEAR(acc.values()[i], dref.values()[i] + 1.0, 1e-12);
  }
}

TEST(Matmul, ShapeMismatchIsContractViolation) {
  EXPECT_THROW(matmul(Tensor<double>(2, 3), Tensor<double>(2, 3)), ContractViolation);
  EXPECT_THROW((Tensor<double>(2, 3, std::vector<double>(5))), ContractViolation);
}

TEST(LinearLayer, Examples) {
  ParamStore<double> ps;
  std::mt19937_64 rng(0);
  Linear<double> lin(ps, "lin", 2, 2, rng);
  ps.find("lin.W")->value = Tensor<double>(2, 2, {1, 2, 3, 4});
  ps.find("lin.b")->value.fill(0.0);
  const Tensor<double> eye(2, 2, {1, 0, 0, 1});
  EXPECT_EQ(lin.forward(eye), Tensor<double>(2, 2, std::vector<double>{1, 2, 3, 4}));

  ps.find("lin.b")->value = Tensor<double>(1, 2, {0.5, -1});
  EXPECT_EQ(lin.forward(Tensor<double>(3, 2)), Tensor<double>(3, 2, std::vector<double>{0.5, -1, 0.5, -1, 0.5, -1}));
  EXPECT_THROW(lin.forward(Tensor<double>(1, 3)), ContractViolation);
}

TEST(LinearLayer, RandomMatchesNaiveOracle) {
  ParamStore<double> ps;
  std::mt19937_64 rng(4);
  Linear<double> lin(ps, "lin", 5, 4, rng);
  for (auto& v : ps.find("lin.b")->value.values()) v = uniform01(rng);
  const auto x = random_tensor(3, 5, rng);
  auto ref = naive_matmul(x, ps.find("lin.W")->value);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) ref(r, c) += ps.find("lin.b")->value(0, c);
  const auto y = lin.forward(x);
  for (std::size_t i = 0; i < y.size(); ++i) EXPECT_NEAR(y.values()[i], ref.values()[i], 1e-6);
}

TEST(LinearLayer, SumLossGradientIsXTransposeOnes) {
  ParamStore<double> ps;
  std::mt19937_64 rng(5);
  Linear<double> lin(ps, "lin", 3, 2, rng, /*bias=*/false);
  const auto x = random_tensor(4, 3, rng);
  lin.forward(x);
  lin.backward(Tensor<double>(4, 2, 1.0));
  const auto& dw = ps.find("lin.W")->grad;
  for (std::size_t i = 0; i < 3; ++i) {
    double col_sum = 0;
    for (std::size_t r = 0; r < 4; ++r) col_sum += x(r, i);
    EXPECT_NEAR(dw(i, 0), col_sum, 1e-12);
    EXPECT_NEAR(dw(i, 1), col_sum, 1e-12);
  }
}

TEST(LayerNormLayer, RowsAreStandardised) {
  ParamStore<double> ps;
  LayerNorm<double> ln(ps, "ln", 16);
  std::mt19937_64 rng(6);
  auto x = random_tensor(10, 16, rng);
  for (auto& v : x.values()) v = 3.0 * v + 1.5;
  ln.forward(x);
  const auto& h = ln.normalized();
  for (std::size_t r = 0; r < h.rows(); ++r) {
    double mean = 0, var = 0;
    for (std::size_t c = 0; c < 16; ++c) mean += h(r, c);
    mean /= 16;
    for (std::size_t c = 0; c < 16; ++c) var += (h(r, c) - mean) * (h(r, c) - mean);
    var /= 16;
    EXPECT_NEAR(mean, 0.0, 1e-6);
    EXPECT_NEAR(var, 1.0, 1e-4);
  }
}
