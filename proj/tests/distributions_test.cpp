// Copyright 2026 The skewent Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "skewent/distributions.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "test_support.hpp"

namespace skewent {
namespace {

using testing::random_delta;
using testing::random_spd;
using testing::random_vector;

const double kHalfLog2Pi = 0.5 * std::log(2 * std::numbers::pi);

TEST(SkewnessMatrix, RejectsNormAtLeastOne) {
  Matrix d(2, 1);
  d << 0.8, 0.7;  // ||d|| > 1
  try {
    (void)SkewnessMatrix::create(d);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotPositiveDefinite);
    EXPECT_NE(std::string(e.what()).find("||Delta a|| < 1"), std::string::npos);
  }
  Matrix edge = Matrix::Constant(1, 1, 1.0 - 1e-12);  // pivot ~2e-12 < 1e-10
  EXPECT_THROW((void)SkewnessMatrix::create(edge), NotPositiveDefiniteError);
  EXPECT_NO_THROW((void)SkewnessMatrix::create(Matrix::Constant(1, 1, alpha_to_delta(1e4))));
}

TEST(SkewnessMatrix, ConditionalCovarianceAlwaysFactors) {
  std::mt19937_64 gen(5);
  for (int t = 0; t < 50; ++t) {
    Matrix d = random_delta(gen, 1 + t % 4, 1 + t % 3, 0.99);
    Matrix dstar = Matrix::Identity(d.cols(), d.cols()) - d.transpose() * d;
    EXPECT_NO_THROW((void)chol_decompose(0.5 * (dstar + dstar.transpose())));
  }
}

TEST(LogPdf, SkewNormalWithZeroAlphaIsNormal) {
  EXPECT_NEAR(log_pdf(make_skew_normal(0, 1, 0), 0.0), -kHalfLog2Pi, 1e-15);
}

TEST(LogPdf, LcfusnWithZeroDeltaIsLogNormalProduct) {
  auto spec = make_lcfusn(Vector::Zero(2), Matrix::Identity(2, 2), Matrix::Zero(2, 1));
  EXPECT_NEAR(log_pdf(spec, make_vector({1.0, 1.0})), 2 * -kHalfLog2Pi, 1e-14);
}

TEST(LogPdf, CfusnOneByOneDirect) {
  auto spec = make_canonical_cfusn(Matrix::Constant(1, 1, 0.6));
  const double expected = std::log(2.0) + std_normal_log_pdf(0.5) + std::log(std_normal_cdf(0.3 / std::sqrt(0.64)));
  EXPECT_NEAR(log_pdf(spec, 0.5), expected, 1e-14);
  auto density = [&](double z) { return std::exp(log_pdf(spec, z)); };
  EXPECT_NEAR(quadrature::integrate(density, -12, 12).value, 1.0, 1e-10);
}

TEST(LogPdf, SupportHandling) {
  DistributionSpec ln = make_lognormal(0, 1);
  EXPECT_EQ(log_pdf(ln, 0.0), -kInf);
  try {
    (void)log_pdf(ln, -0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfSupport);
  }
  DistributionSpec lc = make_lcfusn(Vector::Zero(2), Matrix::Identity(2, 2), Matrix::Zero(2, 2));
  EXPECT_EQ(log_pdf(lc, make_vector({0.0, 1.0})), -kInf);
  EXPECT_THROW((void)log_pdf(lc, make_vector({1.0, -1.0})), Error);
  EXPECT_THROW((void)log_pdf(lc, make_vector({1.0})), Error);
}

// exp(log_pdf) integrates to one, in 1-D and 2-D, for random parameters of
// every family. Log families integrate in x = ln y with the Jacobian e^x.
TEST(LogPdf, NormalizesOverSupport) {
  std::mt19937_64 gen(21);
  std::uniform_real_distribution<double> ua(-5, 5), us(0.3, 2.0), um(-1, 1);
  quadrature::Tolerance tol{1e-9, 1e-10, 4000};
  for (int t = 0; t < 6; ++t) {
    const double mu = um(gen), sigma = us(gen), alpha = ua(gen);
    std::vector<DistributionSpec> uni = {make_normal(mu, sigma), make_lognormal(mu, sigma),
                                         make_skew_normal(mu, sigma, alpha), make_log_skew_normal(mu, sigma, alpha)};
    for (const auto& spec : uni) {
      const bool logf = positive_support(spec);
      auto f = [&](double x) {
        return logf ? std::exp(log_pdf(spec, std::exp(x)) + x) : std::exp(log_pdf(spec, x));
      };
      EXPECT_NEAR(quadrature::integrate(f, mu - 12 * sigma, mu + 12 * sigma, tol).value, 1.0, 1e-4)
          << family_name(spec);
    }
  }
  for (int t = 0; t < 6; ++t) {
    const Eigen::Index m = 1 + t % 2;
    Matrix delta = random_delta(gen, 2, m, 0.95);
    Vector mu = random_vector(gen, 2);
    Matrix sigma = random_spd(gen, 2);
    for (bool logf : {false, true}) {
      DistributionSpec spec = logf ? DistributionSpec(make_lcfusn(mu, sigma, delta))
                                   : DistributionSpec(make_cfusn(mu, sigma, delta));
      const double h0 = 11 * std::sqrt(sigma(0, 0)), h1 = 11 * std::sqrt(sigma(1, 1));
      auto outer = [&](double x0) {
        auto inner = [&](double x1) {
          Vector x = make_vector({x0, x1});
          return logf ? std::exp(log_pdf(spec, Vector(x.array().exp())) + x.sum()) : std::exp(log_pdf(spec, x));
        };
        return quadrature::integrate(inner, mu(1) - h1, mu(1) + h1, tol).value;
      };
      EXPECT_NEAR(quadrature::integrate(outer, mu(0) - h0, mu(0) + h0, tol).value, 1.0, 1e-4);
    }
  }
}

TEST(LogPdf, LogTransformConsistency) {
  std::mt19937_64 gen(3);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Index n = 1 + t % 3, m = 1 + t % 2;
    Vector mu = random_vector(gen, n);
    Matrix sigma = random_spd(gen, n);
    Matrix delta = random_delta(gen, n, m);
    DistributionSpec c = make_cfusn(mu, sigma, delta);
    DistributionSpec l = make_lcfusn(mu, sigma, delta);
    Vector y = random_vector(gen, n, 2.0).array().exp();
    const Vector ly = y.array().log();
    EXPECT_NEAR(log_pdf(l, y), log_pdf(c, ly) - ly.sum(), 1e-12);
  }
}

TEST(LogPdf, ReductionChain) {
  std::mt19937_64 gen(8);
  // Delta = 0: multivariate normal.
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index n = 1 + t % 3;
    Vector mu = random_vector(gen, n);
    Matrix sigma = random_spd(gen, n);
    DistributionSpec c = make_cfusn(mu, sigma, Matrix::Zero(n, 2));
    DistributionSpec g = MvNormal{LocationScale::create(mu, sigma)};
    Vector x = random_vector(gen, n, 2.0);
    EXPECT_NEAR(log_pdf(c, x), log_pdf(g, x), 1e-12);
  }
  // n = m = 1: univariate skew-normal with alpha = delta / sqrt(1 - delta^2).
  for (double delta : {-0.95, -0.3, 0.0, 0.4, 0.999}) {
    DistributionSpec c = make_cfusn(make_vector({0.7}), Matrix::Constant(1, 1, 2.25), Matrix::Constant(1, 1, delta));
    DistributionSpec s = make_skew_normal(0.7, 1.5, delta_to_alpha(delta));
    for (double x : {-3.0, -0.2, 0.7, 1.9, 4.0}) EXPECT_NEAR(log_pdf(c, x), log_pdf(s, x), 1e-12) << delta << " " << x;
  }
}

TEST(LogPdf, DiagonalDeltaIsProductOfSkewNormals) {
  const double delta = 0.6;
  const double alpha = delta_to_alpha(delta);
  for (Eigen::Index n : {2, 3}) {
    DistributionSpec c = make_canonical_cfusn(delta * Matrix::Identity(n, n));
    DistributionSpec s = make_skew_normal(0, 1, alpha);
    std::mt19937_64 gen(static_cast<unsigned>(n));
    for (int t = 0; t < 10; ++t) {
      Vector x = random_vector(gen, n, 3.0);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) sum += log_pdf(s, x(i));
      EXPECT_NEAR(log_pdf(c, x), sum, 1e-12);
    }
  }
}

TEST(Moments, SkewNormalMeanAndVariance) {
  DistributionSpec s = make_skew_normal(0, 1, 1);
  EXPECT_NEAR(mean(s)(0), 1.0 / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_NEAR(mean(s)(0), 0.5641896, 1e-7);
  EXPECT_NEAR(variance(s)(0, 0), 1.0 - 1.0 / std::numbers::pi, 1e-15);
  EXPECT_NEAR(variance(s)(0, 0), 0.6816901, 1e-7);
}

TEST(Moments, CfusnClosedForms) {
  Vector mu = make_vector({1.0, -2.0});
  Matrix sigma = random_spd(*std::make_unique<std::mt19937_64>(4), 2);
  DistributionSpec zero = make_cfusn(mu, sigma, Matrix::Zero(2, 3));
  EXPECT_EQ(mean(zero), mu);
  EXPECT_TRUE(variance(zero).isApprox(sigma, 1e-14));

  Matrix d(2, 1);
  d << 0.5, 0.5;
  DistributionSpec c = make_canonical_cfusn(d);
  EXPECT_NEAR(mean(c)(0), std::sqrt(2 / std::numbers::pi) * 0.5, 1e-15);
  EXPECT_NEAR(mean(c)(1), std::sqrt(2 / std::numbers::pi) * 0.5, 1e-15);

  Matrix row(1, 2);
  row << 0.3, 0.4;
  EXPECT_NEAR(variance(make_canonical_cfusn(row))(0, 0), 1 - 0.5 / std::numbers::pi, 1e-15);
  EXPECT_THROW((void)mean(make_lognormal(0, 1)), Error);
  EXPECT_THROW((void)variance(make_lcfusn(mu, sigma, d)), Error);
}

TEST(Sampling, ZeroDeltaMatchesNormalMean) {
  RandomStream rs(10);
  Vector mu = make_vector({0.5, -1.0});
  Matrix sigma(2, 2);
  sigma << 2.0, 0.3, 0.3, 0.5;
  const std::size_t n = 100000;
  Matrix xs = sample(make_cfusn(mu, sigma, Matrix::Zero(2, 2)), rs, n);
  Vector m = xs.colwise().mean();
  for (int i = 0; i < 2; ++i) EXPECT_LT(std::abs(m(i) - mu(i)), 4 * std::sqrt(sigma(i, i) / n));
}

TEST(Sampling, UnivariateCfusnMean) {
  RandomStream rs(11);
  const double delta = 0.8;
  const std::size_t n = 100000;
  Matrix xs = sample(make_canonical_cfusn(Matrix::Constant(1, 1, delta)), rs, n);
  const double sm = xs.mean();
  const double sd = std::sqrt((xs.array() - sm).square().sum() / (n - 1));
  EXPECT_LT(std::abs(sm - kSqrt2OverPi * delta), 4 * sd / std::sqrt(n));
}

TEST(Sampling, OneByOneVarianceMatchesMoments) {
  RandomStream rs(12);
  Matrix row(1, 2);
  row << 0.3, 0.4;
  const std::size_t n = 1000000;
  Matrix xs = sample(make_canonical_cfusn(row), rs, n);
  const double m = xs.mean();
  const double v = (xs.array() - m).square().sum() / (n - 1);
  // SE of the sample variance ~ sigma^2 sqrt(2/n) for a near-normal law.
  EXPECT_NEAR(v, 1 - 0.5 / std::numbers::pi, 4 * std::sqrt(2.0 / n));
}

TEST(Sampling, DiagonalDeltaCoordinatesUncorrelated) {
  RandomStream rs(13);
  const std::size_t n = 100000;
  Matrix xs = sample(make_canonical_cfusn(0.7 * Matrix::Identity(2, 2)), rs, n);
  Matrix centered = xs.rowwise() - xs.colwise().mean();
  Matrix cov = centered.transpose() * centered / double(n - 1);
  const double corr = cov(0, 1) / std::sqrt(cov(0, 0) * cov(1, 1));
  EXPECT_LT(std::abs(corr), 4 / std::sqrt(double(n)));
}

TEST(Sampling, KolmogorovSmirnovUnivariateFamilies) {
  const std::size_t n = 100000;
  std::vector<std::pair<DistributionSpec, double>> cases = {
      {make_normal(0.3, 1.2), -20.0},
      {make_skew_normal(0.0, 1.0, 3.0), -20.0},
      {make_skew_normal(1.0, 0.5, -1.5), -20.0},
      {make_canonical_cfusn(Matrix::Constant(1, 1, 0.9)), -20.0},
      {make_lognormal(0.2, 0.6), 0.0},
      {make_log_skew_normal(0.0, 0.8, 2.0), 0.0},
  };
  std::uint64_t seed = 100;
  for (const auto& [spec, lower] : cases) {
    RandomStream rs(seed++);
    Matrix xs = sample(spec, rs, n);
    std::vector<double> v(xs.data(), xs.data() + xs.size());
    auto logf = [&](double x) { return x <= 0 && positive_support(spec) ? -kInf : log_pdf(spec, x); };
    const double d = testing::ks_statistic(v, logf, lower);
    EXPECT_LT(d, testing::ks_critical_1pct(n)) << family_name(spec);
  }
}

TEST(Sampling, LogFamiliesArePositiveAndExponentiated) {
  RandomStream a(77), b(77);
  Matrix delta(2, 1);
  delta << 0.4, -0.5;
  Vector mu = make_vector({0.1, 0.2});
  Matrix sigma = Matrix::Identity(2, 2);
  Matrix lc = sample(make_lcfusn(mu, sigma, delta), a, 100);
  Matrix c = sample(make_cfusn(mu, sigma, delta), b, 100);
  EXPECT_TRUE((lc.array() > 0).all());
  EXPECT_TRUE(lc.isApprox(Matrix(c.array().exp()), 1e-15));
}

TEST(Canonicalization, SkewNormalRoundTrip) {
  SkewNormal s = make_skew_normal(0.4, 1.7, -2.5);
  SkewNormal back = to_skew_normal(to_cfusn(s));
  EXPECT_NEAR(back.mu, s.mu, 1e-15);
  EXPECT_NEAR(back.sigma, s.sigma, 1e-14);
  EXPECT_NEAR(back.alpha, s.alpha, 1e-12);
  EXPECT_THROW((void)to_skew_normal(make_canonical_cfusn(Matrix::Zero(2, 1))), Error);
}

TEST(Marginal, RowSubsetOfDelta) {
  Matrix d(2, 1);
  d << 0.3, -0.6;
  DistributionSpec joint = make_lcfusn(Vector::Zero(2), Matrix::Identity(2, 2), d);
  auto part = Partition::create(2, 1);
  auto m1 = std::get<Lcfusn>(marginal(joint, part, 1));
  EXPECT_EQ(m1.ls.dim(), 1u);
  EXPECT_EQ(m1.delta.cols(), 1u);
  EXPECT_EQ(m1.delta.matrix()(0, 0), 0.3);
  auto m2 = std::get<Lcfusn>(marginal(joint, part, 2));
  EXPECT_EQ(m2.delta.matrix()(0, 0), -0.6);
}

TEST(Marginal, ZeroRowIsLogNormal) {
  Matrix d(2, 2);
  d << 0.5, 0.4, 0.0, 0.0;
  DistributionSpec joint = make_lcfusn(Vector::Zero(2), Matrix::Identity(2, 2), d);
  DistributionSpec m2 = marginal(joint, Partition::create(2, 1), 2);
  DistributionSpec ln = make_lognormal(0, 1);
  for (double y : {0.1, 0.7, 1.0, 3.5}) EXPECT_NEAR(log_pdf(m2, y), log_pdf(ln, y), 1e-14);
}

TEST(Marginal, IntegratesToOneAndMatchesJointIntegral) {
  Matrix d(2, 1);
  d << 0.7, 0.7;
  DistributionSpec joint = make_canonical_cfusn(d);
  DistributionSpec m1 = marginal(joint, Partition::create(2, 1), 1);
  quadrature::Tolerance tol{1e-11, 1e-11, 2000};
  auto f1 = [&](double x) { return std::exp(log_pdf(m1, x)); };
  EXPECT_NEAR(quadrature::integrate(f1, -12, 12, tol).value, 1.0, 1e-4);
  // Marginal density equals the joint integrated over the second coordinate.
  for (double x0 : {-1.0, 0.2, 1.5}) {
    auto inner = [&](double x1) { return std::exp(log_pdf(joint, make_vector({x0, x1}))); };
    EXPECT_NEAR(quadrature::integrate(inner, -12, 12, tol).value, f1(x0), 1e-9);
  }
}

TEST(Marginal, Errors) {
  Matrix d = Matrix::Constant(3, 1, 0.2);
  DistributionSpec joint = make_canonical_cfusn(d);
  EXPECT_THROW((void)Partition::create(3, 0), Error);
  EXPECT_THROW((void)Partition::create(3, 3), Error);
  EXPECT_THROW((void)marginal(joint, Partition::create(2, 1), 1), Error);
  Matrix sigma = random_spd(*std::make_unique<std::mt19937_64>(1), 3);
  DistributionSpec scaled = make_cfusn(Vector::Zero(3), sigma, d);
  try {
    (void)marginal(scaled, Partition::create(3, 1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Unsupported);
  }
  EXPECT_THROW((void)marginal(make_normal(0, 1), Partition::create(2, 1), 1), Error);
}

}  // namespace
}  // namespace skewent
