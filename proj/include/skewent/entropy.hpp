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

// Shannon entropy (nats) of the Normal / Log-Normal / SN / LSN / CFUSN /
// LCFUSN families. Every term with a closed form is evaluated exactly; only
// the skewness expectation E[ln(2^m Phi_m(Delta'X0 | Delta*))] is estimated
// by Monte Carlo, with X0 drawn from the canonical CFUSN_{n,m}(Delta).

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "skewent/distributions.hpp"
#include "skewent/error.hpp"
#include "skewent/numerics.hpp"
#include "skewent/rng.hpp"

namespace skewent {

/// Entropy-type estimate. value = closed_form_part + mc_part. std_error is
/// the Monte Carlo standard error only; bias_bound separately bounds the
/// effect of the multivariate normal CDF error on the mean.
struct McEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t n_samples = 0;
  double closed_form_part = 0.0;
  double mc_part = 0.0;
  double bias_bound = 0.0;
};

struct McOptions {
  std::size_t n_samples = 100000;
  unsigned workers = 1;
};

namespace detail {

struct LogTerm {
  double value;
  double bias;
};

inline McEstimate summarize_terms(const std::vector<LogTerm>& terms) {
  std::vector<double> values(terms.size());
  double bias = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    values[i] = terms[i].value;
    bias += terms[i].bias;
  }
  const auto s = summarize(values);
  McEstimate out;
  out.value = s.mean;
  out.mc_part = s.mean;
  out.std_error = s.std_error;
  out.n_samples = s.count;
  out.bias_bound = terms.empty() ? 0.0 : bias / static_cast<double>(terms.size());
  return out;
}

inline void require_samples(const McOptions& options) {
  if (options.n_samples < 2) throw Error(ErrorKind::InvalidParameter, "need at least two Monte Carlo samples");
}

/// ln(2^m Phi_m(Delta'z | Delta*)) with a first-order bound on the error
/// coming from the CDF evaluation.
inline LogTerm log_skew_term(const SkewnessMatrix& delta, const Vector& z) {
  const auto r = delta.log_skew_cdf(z);
  const double m = static_cast<double>(delta.cols());
  const double bias = r.error_bound > 0.0 ? r.error_bound / std::exp(r.log_value) : 0.0;
  return {m * kLn2 + r.log_value, bias};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Closed forms

/// H of N(mu, sigma^2): ln(sigma) + (1 + ln 2pi)/2.
inline double normal_entropy(double sigma) { return std::log(sigma) + 0.5 * (1.0 + kLog2Pi); }

/// H of N_n(mu, Sigma): ln|Sigma|/2 + n(1 + ln 2pi)/2.
inline double mvnormal_entropy(const SymPosDefMatrix& sigma) {
  return 0.5 * sigma.logdet() + 0.5 * static_cast<double>(sigma.dim()) * (1.0 + kLog2Pi);
}

/// Exact entropy of Normal, Log-Normal and multivariate Normal laws.
inline double entropy_closed(const DistributionSpec& spec) {
  return std::visit(Overloaded{[](const Normal& d) { return normal_entropy(d.sigma); },
                               [](const LogNormal& d) { return normal_entropy(d.sigma) + d.mu; },
                               [](const MvNormal& d) { return mvnormal_entropy(d.ls.sigma()); },
                               [](const auto&) -> double {
                                 throw Error(ErrorKind::Unsupported,
                                             "no closed-form entropy for skew families; use entropy_mc");
                               }},
                    spec);
}

/// True when Delta'Delta is diagonal to within `tol` (orthogonal columns).
inline bool has_orthogonal_columns(const Matrix& delta, double tol = 1e-12) {
  const Matrix gram = delta.transpose() * delta;
  for (Eigen::Index i = 0; i < gram.rows(); ++i)
    for (Eigen::Index j = 0; j < gram.cols(); ++j)
      if (i != j && std::abs(gram(i, j)) > tol) return false;
  return true;
}

/// (1/2) sum_i E(X_{i0}^2) for X0 ~ CFUSN_{n,m}(0, I, Delta), from the
/// moments E(X0) = sqrt(2/pi) Delta 1 and Var(X0) = I - (2/pi) Delta Delta':
///   E(X_{i0}^2) = 1 + (2/pi) [ (Delta 1)_i^2 - (Delta Delta')_ii ].
/// Orthogonal columns make the excess vanish identically; it is then set to
/// exactly zero rather than left as rounding residue.
inline double half_second_moment(const SkewnessMatrix& delta) {
  const Matrix& d = delta.matrix();
  if (has_orthogonal_columns(d)) return 0.5 * static_cast<double>(d.rows());
  const Vector row_sums = d.rowwise().sum();
  const Vector row_norms = d.rowwise().squaredNorm();
  double excess = 0.0;
  for (Eigen::Index i = 0; i < d.rows(); ++i) excess += row_sums(i) * row_sums(i) - row_norms(i);
  return 0.5 * static_cast<double>(d.rows()) + excess / std::numbers::pi;
}

/// The Delta-polynomial  -sum_ij Delta_ij^2 + sum_i (sum_j Delta_ij)^2,
/// i.e. the off-diagonal sum of Delta'Delta (without the 1/pi factor).
inline double expansion_bracket(const Matrix& delta) {
  double squares = 0.0;
  double row_sq = 0.0;
  for (Eigen::Index i = 0; i < delta.rows(); ++i) {
    double row = 0.0;
    for (Eigen::Index j = 0; j < delta.cols(); ++j) {
      squares += delta(i, j) * delta(i, j);
      row += delta(i, j);
    }
    row_sq += row * row;
  }
  return -squares + row_sq;
}

/// Sum of the CFUSN(mu, Sigma, Delta) means: 1'mu + sqrt(2/pi) 1'Sigma^{1/2} Delta 1.
inline double cfusn_mean_sum(const LocationScale& ls, const SkewnessMatrix& delta) {
  return mean(Cfusn{ls, delta}).sum();
}

// ---------------------------------------------------------------------------
// Monte Carlo pieces

/// E[ln(2^m Phi_m(Delta'X0 | I - Delta'Delta))], X0 ~ CFUSN_{n,m}(Delta).
/// Zero Delta short-circuits to exactly 0.
inline McEstimate skew_correction(const SkewnessMatrix& delta, const RngStream& stream, const McOptions& options = {}) {
  detail::require_samples(options);
  if (delta.is_zero()) {
    McEstimate zero;
    zero.n_samples = options.n_samples;
    return zero;
  }
  auto terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
    return detail::log_skew_term(delta, delta.draw_canonical(rs));
  });
  return detail::summarize_terms(terms);
}

/// Univariate form E[ln(2 Phi(alpha X0))], X0 ~ SN(0, 1, alpha). Draws are
/// made in the same order as the CFUSN_{1,1} sampler.
inline McEstimate skew_correction_univariate(double alpha, const RngStream& stream, const McOptions& options = {}) {
  detail::require_samples(options);
  if (alpha == 0.0) {
    McEstimate zero;
    zero.n_samples = options.n_samples;
    return zero;
  }
  const double delta = alpha_to_delta(alpha);
  const double resid = 1.0 / std::hypot(1.0, alpha);
  auto terms = sharded_observations(stream, options.n_samples, options.workers, [&](RandomStream& rs) {
    const double u = std::abs(rs.normal());
    const double x0 = delta * u + resid * rs.normal();
    return detail::LogTerm{kLn2 + log_std_normal_cdf(alpha * x0), 0.0};
  });
  return detail::summarize_terms(terms);
}

namespace detail {
inline McEstimate combine(double closed, const McEstimate& skew) {
  McEstimate out = skew;
  out.closed_form_part = closed;
  out.mc_part = 0.0 - skew.mc_part;  // +0, not -0
  out.value = out.closed_form_part + out.mc_part;
  return out;
}

inline double cfusn_closed_part(const LocationScale& ls, const SkewnessMatrix& delta) {
  const double n = static_cast<double>(ls.dim());
  const double base = 0.5 * n * kLog2Pi + 0.5 * ls.sigma().logdet();
  return base + half_second_moment(delta);
}
}  // namespace detail

/// Entropy of any supported family. Closed-form families return the exact
/// value with n_samples = 0 and std_error = 0; skew families put every
/// analytic term in closed_form_part and minus the skew correction in
/// mc_part.
inline McEstimate entropy_mc(const DistributionSpec& spec, const RngStream& stream, const McOptions& options = {}) {
  return std::visit(
      Overloaded{
          [&](const SkewNormal& d) {
            return detail::combine(normal_entropy(d.sigma), skew_correction_univariate(d.alpha, stream, options));
          },
          [&](const LogSkewNormal& d) {
            // H_LSN = H_SN + E(Y), Y ~ SN(mu, sigma, alpha)
            const double mean_sn = d.mu + d.sigma * kSqrt2OverPi * alpha_to_delta(d.alpha);
            return detail::combine(normal_entropy(d.sigma) + mean_sn,
                                   skew_correction_univariate(d.alpha, stream, options));
          },
          [&](const Cfusn& d) {
            return detail::combine(detail::cfusn_closed_part(d.ls, d.delta), skew_correction(d.delta, stream, options));
          },
          [&](const Lcfusn& d) {
            // H_LCFUSN = H_CFUSN + sum_i E(X_i)
            return detail::combine(detail::cfusn_closed_part(d.ls, d.delta) + cfusn_mean_sum(d.ls, d.delta),
                                   skew_correction(d.delta, stream, options));
          },
          [&](const auto&) {
            McEstimate out;
            out.closed_form_part = entropy_closed(spec);
            out.value = out.closed_form_part;
            return out;
          }},
      spec);
}

/// CFUSN entropy with the second-moment sum written as the explicit
/// Delta-polynomial n/2 + bracket/pi. When Delta'Delta is diagonal the
/// bracket is identically zero and is dropped, leaving
/// H_N(Sigma) - E[ln 2^m Phi_m(.)].
inline McEstimate entropy_expanded_cfusn(const SkewnessMatrix& delta, const SymPosDefMatrix& sigma,
                                         const RngStream& stream, const McOptions& options = {}) {
  if (delta.rows() != sigma.dim())
    throw Error(ErrorKind::DimensionMismatch, "Delta rows and Sigma dimension differ");
  const double n = static_cast<double>(sigma.dim());
  const double bracket = has_orthogonal_columns(delta.matrix()) ? 0.0 : expansion_bracket(delta.matrix());
  const double base = 0.5 * n * kLog2Pi + 0.5 * sigma.logdet();
  const double closed = base + (0.5 * n + bracket / std::numbers::pi);
  return detail::combine(closed, skew_correction(delta, stream, options));
}

// ---------------------------------------------------------------------------
// Curves

enum class CurveFamily { SkewNormal, LogSkewNormal, Cfusn12 };

struct CurvePoint {
  /// alpha for the univariate families, (delta1, delta2) for CFUSN_{1,2}.
  std::vector<double> coords;
  McEstimate estimate;
};

struct CurveFixed {
  double mu = 0.0;
  double sigma = 1.0;
};

/// Entropy along a parameter grid. Every point reuses the same stream, so
/// neighbouring points share their random draws (common random numbers).
/// For CFUSN_{1,2}, grid points with |delta| >= 1 are left out.
inline std::vector<CurvePoint> entropy_curve(CurveFamily family, const std::vector<std::vector<double>>& grid,
                                             const CurveFixed& fixed, const RngStream& stream,
                                             const McOptions& options = {}) {
  std::vector<CurvePoint> out;
  out.reserve(grid.size());
  for (const auto& point : grid) {
    switch (family) {
      case CurveFamily::SkewNormal:
      case CurveFamily::LogSkewNormal: {
        if (point.size() != 1) throw Error(ErrorKind::DimensionMismatch, "univariate curves take one coordinate");
        DistributionSpec spec = family == CurveFamily::SkewNormal
                                    ? DistributionSpec(make_skew_normal(fixed.mu, fixed.sigma, point[0]))
                                    : DistributionSpec(make_log_skew_normal(fixed.mu, fixed.sigma, point[0]));
        out.push_back({point, entropy_mc(spec, stream, options)});
        break;
      }
      case CurveFamily::Cfusn12: {
        if (point.size() != 2) throw Error(ErrorKind::DimensionMismatch, "CFUSN_{1,2} curves take (delta1, delta2)");
        Matrix delta(1, 2);
        delta << point[0], point[1];
        if (std::hypot(point[0], point[1]) >= 1.0) continue;
        Cfusn spec;
        try {
          spec = make_cfusn(make_vector({fixed.mu}), Matrix::Constant(1, 1, fixed.sigma * fixed.sigma), delta);
        } catch (const NotPositiveDefiniteError&) {
          continue;
        }
        out.push_back({point, entropy_mc(spec, stream, options)});
        break;
      }
    }
  }
  return out;
}

}  // namespace skewent
