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

// A short tour: entropy of a skew-normal, the log-shift between a CFUSN and
// its log counterpart, mutual information between two blocks, and the
// relative entropy of an LCFUSN against a log-skew-normal.

#include <cstdio>

#include "skewent/distributions.hpp"
#include "skewent/entropy.hpp"
#include "skewent/information.hpp"
#include "skewent/oracle.hpp"

int main() {
  using namespace skewent;
  const McOptions opts{100000, 1};

  const auto sn = make_skew_normal(0.0, 1.0, 3.0);
  const auto h = entropy_mc(sn, RngStream(1), opts);
  std::printf("H[SN(0,1,3)]      = %.6f +/- %.6f  (quadrature %.6f)\n", h.value, h.std_error,
              entropy_quadrature(sn));

  Matrix delta(2, 2);
  delta << 0.6, 0.1, -0.2, 0.5;
  Matrix sigma(2, 2);
  sigma << 1.0, 0.4, 0.4, 2.0;
  const Vector mu = make_vector({0.2, -0.1});
  const auto hc = entropy_mc(make_cfusn(mu, sigma, delta), RngStream(2), opts);
  const auto hl = entropy_mc(make_lcfusn(mu, sigma, delta), RngStream(2), opts);
  std::printf("H[CFUSN]          = %.6f +/- %.6f\n", hc.value, hc.std_error);
  std::printf("H[LCFUSN] - H[CFUSN] = %.12f  (sum of means %.12f)\n", hl.value - hc.value,
              mean(make_cfusn(mu, sigma, delta)).sum());

  Matrix d(2, 1);
  d << 0.7, 0.7;
  const auto part = Partition::create(2, 1);
  const auto mi = mutual_information(SkewnessMatrix::create(d), part, RngStream(3), opts);
  std::printf("I(X1; X2)         = %.6f +/- %.6f  (quadrature %.6f)\n", mi.value, mi.std_error,
              mi_quadrature(SkewnessMatrix::create(d), part));

  const auto z = make_lcfusn(mu, sigma, delta);
  const auto y = LsnSpec::create(mu, sigma, make_vector({2.0, -1.0}));
  const auto kl = kl_lcfusn_vs_lsn(z, y, RngStream(4), opts);
  std::printf("D(LCFUSN || LSN)  = %.6f +/- %.6f\n", kl.value, kl.std_error);
}
