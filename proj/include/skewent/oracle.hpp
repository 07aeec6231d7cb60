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

#pragma once

// Deterministic quadrature reference values for entropy, mutual information
// and relative entropy in one or two dimensions. Slow, but free of sampling
// noise; used to check the Monte Carlo estimators.
//
// Integration runs over a box of +-halfwidth standard deviations around the
// location; the normal tail outside 10 sd carries mass ~1.5e-23 per side, far
// below the default tolerance. Log families are integrated in log
// coordinates, x = ln z, where the density of ln Z is f(e^x) e^{sum x}.

#include <cmath>
#include <string>
#include <vector>

#include "skewent/distributions.hpp"
#include "skewent/error.hpp"
#include "skewent/information.hpp"
#include "skewent/numerics.hpp"
#include "skewent/quadrature.hpp"

namespace skewent {

struct QuadratureConfig {
  double abs_tol = 1e-7;
  /// Integration half-width in standard deviations of the normal kernel.
  double domain_halfwidth = 10.0;
  std::size_t max_subdivisions = 2000;
};

namespace detail {

/// Location and per-coordinate scale of the normal kernel, in the
/// coordinates that get integrated (log coordinates for log families).
struct Box {
  Vector center;
  Vector scale;
  bool log_coords = false;
};

inline Box integration_box(const DistributionSpec& spec) {
  return std::visit(
      Overloaded{[](const Normal& d) { return Box{make_vector({d.mu}), make_vector({d.sigma}), false}; },
                 [](const LogNormal& d) { return Box{make_vector({d.mu}), make_vector({d.sigma}), true}; },
                 [](const SkewNormal& d) { return Box{make_vector({d.mu}), make_vector({d.sigma}), false}; },
                 [](const LogSkewNormal& d) { return Box{make_vector({d.mu}), make_vector({d.sigma}), true}; },
                 [](const MvNormal& d) {
                   return Box{d.ls.mu(), d.ls.sigma().matrix().diagonal().cwiseSqrt(), false};
                 },
                 [](const Cfusn& d) { return Box{d.ls.mu(), d.ls.sigma().matrix().diagonal().cwiseSqrt(), false}; },
                 [](const Lcfusn& d) { return Box{d.ls.mu(), d.ls.sigma().matrix().diagonal().cwiseSqrt(), true}; }},
      spec);
}

inline Box integration_box(const LsnSpec& y) { return Box{y.mu(), y.omega(), true}; }

inline std::size_t point_dimension(const DistributionSpec& spec) { return dimension(spec); }
inline std::size_t point_dimension(const LsnSpec& y) { return y.dim(); }

inline bool has_positive_support(const DistributionSpec& spec) { return positive_support(spec); }
inline bool has_positive_support(const LsnSpec&) { return true; }

inline void require_small(std::size_t n) {
  if (n > 2)
    throw Error(ErrorKind::DimensionTooLarge,
                "quadrature reference supports n <= 2, got n=" + std::to_string(n) + "; use the Monte Carlo path");
}

/// Integrate over [lo, hi] split at `mid` (the location, where skewed
/// densities may have a sharp shoulder).
template <class F>
quadrature::Result integrate_split(F&& f, double lo, double mid, double hi, const quadrature::Tolerance& tol) {
  quadrature::Tolerance half = tol;
  half.abs = 0.5 * tol.abs;
  const auto a = quadrature::integrate(f, lo, mid, half);
  const auto b = quadrature::integrate(f, mid, hi, half);
  return {a.value + b.value, a.error + b.error, a.subdivisions + b.subdivisions, a.converged && b.converged};
}

/// Integral of `integrand(x)` over the box, x in integration coordinates.
template <class F>
double integrate_box(const Box& box, F&& integrand, const QuadratureConfig& cfg, const char* what) {
  const auto n = box.center.size();
  const double h = cfg.domain_halfwidth;
  bool ok = true;
  double result = 0.0;
  if (n == 1) {
    auto f = [&](double x) { return integrand(make_vector({x})); };
    const double c = box.center(0), s = box.scale(0);
    const auto r = integrate_split(f, c - h * s, c, c + h * s, {cfg.abs_tol, 0.0, cfg.max_subdivisions});
    ok = r.converged;
    result = r.value;
  } else {
    const double c1 = box.center(0), s1 = box.scale(0);
    const double c2 = box.center(1), s2 = box.scale(1);
    // the inner error, integrated over the outer range, stays below abs_tol/4
    const quadrature::Tolerance inner_tol{cfg.abs_tol / (8.0 * h * s1), 0.0, cfg.max_subdivisions};
    Vector x(2);
    auto inner = [&](double x1) {
      auto g = [&](double x2) {
        x(0) = x1;
        x(1) = x2;
        return integrand(x);
      };
      const auto r = integrate_split(g, c2 - h * s2, c2, c2 + h * s2, inner_tol);
      if (!r.converged) ok = false;
      return r.value;
    };
    const auto r = integrate_split(inner, c1 - h * s1, c1, c1 + h * s1, {0.5 * cfg.abs_tol, 0.0, cfg.max_subdivisions});
    ok = ok && r.converged;
    result = r.value;
  }
  if (!ok) throw Error(ErrorKind::NonConvergent, std::string(what) + ": quadrature did not reach abs_tol");
  return result;
}

/// ln of the density of the integration variable and ln of the original
/// density at the corresponding point.
template <class D>
std::pair<double, double> log_densities(const D& d, const Box& box, const Vector& x) {
  if (!box.log_coords) {
    const double l = log_pdf(d, x);
    return {l, l};
  }
  const Vector w = x.array().exp().matrix();
  const double l = log_pdf(d, w);
  return {l + x.sum(), l};
}

inline double plogp_neg(double log_p, double log_f) {
  if (std::isinf(log_p) && log_p < 0.0) return 0.0;  // 0 ln 0 := 0
  return -std::exp(log_p) * log_f;
}

}  // namespace detail

/// -int f ln f for n <= 2.
inline double entropy_quadrature(const DistributionSpec& spec, const QuadratureConfig& cfg = {}) {
  detail::require_small(dimension(spec));
  const auto box = detail::integration_box(spec);
  return detail::integrate_box(
      box,
      [&](const Vector& x) {
        const auto [lp, lf] = detail::log_densities(spec, box, x);
        return detail::plogp_neg(lp, lf);
      },
      cfg, "entropy_quadrature");
}

/// -int_0^inf f ln f in the original coordinate of a univariate log family.
/// Kept as a cross-check of the log-coordinate path; the 1/z shape near 0
/// makes it the less accurate of the two.
inline double entropy_quadrature_direct(const DistributionSpec& spec, const QuadratureConfig& cfg = {}) {
  if (!positive_support(spec) || dimension(spec) != 1)
    throw Error(ErrorKind::Unsupported, "direct quadrature is only for univariate log families");
  const auto box = detail::integration_box(spec);
  const double c = box.center(0), s = box.scale(0), h = cfg.domain_halfwidth;
  auto f = [&](double z) {
    if (z <= 0.0) return 0.0;
    const double l = log_pdf(spec, z);
    return detail::plogp_neg(l, l);
  };
  // split the range at e^{c + k s}, k = -h..h, so each piece spans one sd in ln z
  const int steps = static_cast<int>(std::ceil(2.0 * h));
  const quadrature::Tolerance tol{cfg.abs_tol / (2.0 * steps), 0.0, cfg.max_subdivisions};
  double total = 0.0;
  for (int k = 0; k < steps; ++k) {
    const double a = std::exp(c + (-h + k) * s);
    const double b = std::exp(c + std::min(-h + k + 1.0, h) * s);
    const auto r = quadrature::integrate(f, a, b, tol);
    if (!r.converged) throw Error(ErrorKind::NonConvergent, "entropy_quadrature_direct did not reach abs_tol");
    total += r.value;
  }
  return total;
}

/// int f ln(f / (f1 f2)) for X ~ CFUSN_{2,m}(Delta), split (1, 1).
inline double mi_quadrature(const SkewnessMatrix& delta, const Partition& part, const QuadratureConfig& cfg = {}) {
  if (delta.rows() != 2 || part.n() != 2)
    throw Error(delta.rows() > 2 ? ErrorKind::DimensionTooLarge : ErrorKind::InvalidPartition,
                "mutual information quadrature needs n = 2 with partition (1, 1)");
  const Cfusn joint = make_canonical_cfusn(delta.matrix());
  const Cfusn m1{LocationScale::canonical(1), delta.row_block(0, 1)};
  const Cfusn m2{LocationScale::canonical(1), delta.row_block(1, 1)};
  const detail::Box box{Vector::Zero(2), Vector::Ones(2), false};
  return detail::integrate_box(
      box,
      [&](const Vector& x) {
        const double lf = log_pdf(joint, x);
        if (std::isinf(lf)) return 0.0;
        const double l1 = log_pdf(m1, make_vector({x(0)}));
        const double l2 = log_pdf(m2, make_vector({x(1)}));
        return std::exp(lf) * (lf - l1 - l2);
      },
      cfg, "mi_quadrature");
}

/// int f ln(f / g) for n <= 2. Both laws must live on the same support
/// (both on R^n or both on the positive orthant).
template <class F, class G>
double kl_quadrature(const F& f, const G& g, const QuadratureConfig& cfg = {}) {
  const auto n = detail::point_dimension(f);
  detail::require_small(n);
  if (detail::point_dimension(g) != n) throw Error(ErrorKind::DimensionMismatch, "f and g differ in dimension");
  if (detail::has_positive_support(f) != detail::has_positive_support(g))
    throw Error(ErrorKind::SupportMismatch, "f and g must share their support (R^n vs positive orthant)");
  const auto box = detail::integration_box(f);
  return detail::integrate_box(
      box,
      [&](const Vector& x) {
        const auto [lp, lf] = detail::log_densities(f, box, x);
        if (std::isinf(lp) && lp < 0.0) return 0.0;
        const auto lg = detail::log_densities(g, box, x).second;
        if (std::isinf(lg)) throw Error(ErrorKind::SupportMismatch, "g vanishes where f has mass");
        return std::exp(lp) * (lf - lg);
      },
      cfg, "kl_quadrature");
}

}  // namespace skewent
