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

#include "skewent/oracle.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "skewent/entropy.hpp"

namespace skewent {
namespace {

const double kHn = 0.5 * (1.0 + std::log(2 * std::numbers::pi));

TEST(EntropyQuadrature, ClosedFormFamilies) {
  EXPECT_NEAR(entropy_quadrature(make_normal(0, 1)), kHn, 1e-7);
  EXPECT_NEAR(entropy_quadrature(make_normal(3, 0.2)), kHn + std::log(0.2), 1e-7);
  EXPECT_NEAR(entropy_quadrature(make_lognormal(1, 1)), kHn + 1.0, 1e-7);
  Matrix s(2, 2);
  s << 2.0, 0.6, 0.6, 1.0;
  MvNormal mvn{LocationScale::create(make_vector({1, -1}), s)};
  EXPECT_NEAR(entropy_quadrature(mvn), entropy_closed(mvn), 1e-7);
}

TEST(EntropyQuadrature, SkewNormalLargeAlphaLimit) {
  EXPECT_NEAR(entropy_quadrature(make_skew_normal(0, 1, 1e4)), kHn - kLn2, 1e-3);
}

TEST(EntropyQuadrature, LogFamilyDirectMatchesLogCoordinates) {
  for (const DistributionSpec& spec :
       {DistributionSpec(make_lognormal(0.3, 0.8)), DistributionSpec(make_log_skew_normal(-0.2, 0.6, 3.0))}) {
    QuadratureConfig cfg;
    EXPECT_NEAR(entropy_quadrature_direct(spec, cfg), entropy_quadrature(spec, cfg), 2 * cfg.abs_tol);
  }
}

TEST(EntropyQuadrature, HalvingToleranceIsSelfConsistent) {
  Matrix d(2, 1);
  d << 0.6, -0.3;
  for (const DistributionSpec& spec : {DistributionSpec(make_skew_normal(0, 1.3, 2.0)),
                                       DistributionSpec(make_canonical_cfusn(d))}) {
    QuadratureConfig coarse{1e-6};
    QuadratureConfig fine{5e-7};
    EXPECT_LT(std::abs(entropy_quadrature(spec, coarse) - entropy_quadrature(spec, fine)), coarse.abs_tol);
  }
}

TEST(EntropyQuadrature, CfusnTwoByTwo) {
  Matrix d = 0.6 * Matrix::Identity(2, 2);
  const double single = entropy_quadrature(make_skew_normal(0, 1, 0.75));
  EXPECT_NEAR(entropy_quadrature(make_canonical_cfusn(d)), 2 * single, 2e-7);
}

TEST(EntropyQuadrature, Lcfusn2D) {
  Matrix d(2, 1);
  d << 0.5, 0.4;
  Matrix s(2, 2);
  s << 0.5, 0.1, 0.1, 0.3;
  const Vector mu = make_vector({0.2, -0.4});
  const double hc = entropy_quadrature(make_cfusn(mu, s, d));
  const double hl = entropy_quadrature(make_lcfusn(mu, s, d));
  EXPECT_NEAR(hl - hc, mean(make_cfusn(mu, s, d)).sum(), 2e-7);
}

TEST(EntropyQuadrature, RejectsLargeDimension) {
  try {
    (void)entropy_quadrature(make_canonical_cfusn(Matrix::Zero(3, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionTooLarge);
  }
}

TEST(EntropyQuadrature, ReportsNonConvergence) {
  QuadratureConfig cfg{1e-14, 10.0, 3};
  try {
    (void)entropy_quadrature(make_skew_normal(0, 1, 50.0), cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonConvergent);
  }
}

TEST(MiQuadrature, IndependentCasesVanish) {
  auto part = Partition::create(2, 1);
  EXPECT_NEAR(mi_quadrature(SkewnessMatrix::create(0.6 * Matrix::Identity(2, 2)), part), 0.0, 1e-6);
  EXPECT_NEAR(mi_quadrature(SkewnessMatrix::zero(2, 1), part), 0.0, 1e-6);
}

TEST(MiQuadrature, DependentCaseMatchesEntropyDecomposition) {
  Matrix d(2, 1);
  d << 0.7, 0.7;
  auto delta = SkewnessMatrix::create(d);
  auto part = Partition::create(2, 1);
  const double mi = mi_quadrature(delta, part);
  EXPECT_GT(mi, 0.0);
  auto joint = make_canonical_cfusn(d);
  const double h1 = entropy_quadrature(marginal(joint, part, 1));
  const double h2 = entropy_quadrature(marginal(joint, part, 2));
  EXPECT_NEAR(mi, h1 + h2 - entropy_quadrature(joint), 5e-7);
}

TEST(KlQuadrature, GaussianClosedForm) {
  EXPECT_NEAR(kl_quadrature(DistributionSpec(make_normal(0, 1)), DistributionSpec(make_normal(1, 1))), 0.5, 1e-7);
  const DistributionSpec sn = make_skew_normal(0.1, 1.2, -2.0);
  EXPECT_NEAR(kl_quadrature(sn, sn), 0.0, 1e-8);
}

TEST(KlQuadrature, SupportMismatch) {
  try {
    (void)kl_quadrature(DistributionSpec(make_normal(0, 1)), DistributionSpec(make_lognormal(0, 1)));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SupportMismatch);
  }
}

TEST(KlQuadrature, LsnAgainstItsLcfusnForm) {
  auto y = LsnSpec::create(make_vector({0.3}), Matrix::Constant(1, 1, 0.7), make_vector({1.5}));
  EXPECT_NEAR(kl_quadrature(DistributionSpec(y.as_lcfusn()), y), 0.0, 1e-8);
  EXPECT_NEAR(kl_quadrature(y, DistributionSpec(y.as_lcfusn())), 0.0, 1e-8);
}

}  // namespace
}  // namespace skewent
