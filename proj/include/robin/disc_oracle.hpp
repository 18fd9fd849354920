// SPDX-License-Identifier: Apache-2.0
//
// Exact negative Robin spectrum of a disc of radius R: lambda = -(X/R)^2
// where X solves  X I_m'(X) / I_m(X) = beta R  for m = 0, 1, 2, ...
// Only the logarithmic derivative of I_m is ever formed.
#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "robin/eigen_result.hpp"
#include "robin/error.hpp"
#include "robin/numerics.hpp"

namespace robin::disc_oracle {

struct DiscSpectrumRequest {
  double radius_R = 1.0;
  double beta = 0.0;
  int n_levels = 1;
};

struct DiscLevel {
  int m = 0;
  double X = 0.0;
  double lambda = 0.0;
};

/// One CSV row: m, X, lambda, two-term asymptotic, defect.
struct DiscRow {
  int m = 0;
  double X = 0.0;
  double lambda = 0.0;
  double lambda_asymptotic_2term = 0.0;
  double defect = 0.0;
};

/// I_{m+1}(x) / I_m(x) by backward recurrence of the continued fraction
///   r_k = 1 / (2(k+1)/x + r_{k+1}), started at k = 2(x + m) + 40.
inline double bessel_i_quotient(int m, double x) {
  const int start = static_cast<int>(2.0 * (x + m)) + 40;
  double r = 0.0;
  for (int k = start; k >= m; --k) r = 1.0 / (2.0 * (k + 1) / x + r);
  return r;
}

/// x I_m'(x) / I_m(x).
inline double bessel_i_ratio(int m, double x) {
  if (m < 0 || m > 200) throw ParameterError("bessel_i_ratio: m must lie in [0, 200]");
  if (!(x > 0.0)) throw ParameterError("bessel_i_ratio: x must be positive");
  if (x < std::max(12.0, 2.0 * m)) {
    // I_m(x) = (x/2)^m sum_k q^k / (k! (k+m)!),  q = x^2/4.
    // x I_m' / I_m = sum_k (2k+m) t_k / sum_k t_k.
    const double q = 0.25 * x * x;
    double t = 1.0, num = m, den = 1.0;
    for (int k = 0; k < 2000; ++k) {
      t *= q / ((k + 1.0) * (k + 1.0 + m));
      num += (2.0 * (k + 1) + m) * t;
      den += t;
      if (t < 1e-18 * den && k > q) break;
    }
    return num / den;
  }
  // I_m' = I_{m+1} + (m/x) I_m
  return x * bessel_i_quotient(m, x) + m;
}

/// lambda for angular index m. Throws when beta R <= m (no negative
/// eigenvalue in that sector, since the ratio is >= m for all x).
inline DiscLevel disc_eigenvalue(int m, const DiscSpectrumRequest& req) {
  if (!(req.radius_R > 0.0) || !(req.beta > 0.0)) throw ParameterError("disc request needs R, beta > 0");
  const double alpha = req.beta * req.radius_R;
  if (alpha <= m) throw ParameterError("no negative eigenvalue for this angular index");
  auto f = [&](double x) { return bessel_i_ratio(m, x) - alpha; };

  const double guess = alpha + 0.5 - (4.0 * m * m - 1.0) / (8.0 * alpha);
  const double widen = std::max(1.0, 10.0 / alpha);
  double lo = std::max(guess - widen, 1e-8);
  double hi = guess + widen;
  while (f(lo) > 0.0 && lo > 1e-300) lo *= 0.5;
  while (f(hi) < 0.0) hi = 2.0 * hi + 1.0;

  // g = x I_m'/I_m obeys x g' = x^2 + m^2 - g^2 (from Bessel's equation)
  auto df = [&](double x) {
    const double g = bessel_i_ratio(m, x);
    return (x * x + m * m - g * g) / x;
  };
  const double X = numerics::bracketed_newton(f, df, lo, hi, 1e-3, 1e-16);
  return {m, X, -(X / req.radius_R) * (X / req.radius_R)};
}

/// Angular indices of the n lowest levels: 0, 1, 1, 2, 2, ...
inline std::vector<int> level_indices(int n_levels) {
  std::vector<int> out;
  for (int m = 0; static_cast<int>(out.size()) < n_levels; ++m)
    for (int rep = 0; rep < (m == 0 ? 1 : 2) && static_cast<int>(out.size()) < n_levels; ++rep)
      out.push_back(m);
  return out;
}

/// The n_levels lowest negative eigenvalues, m = 0 simple and m >= 1 double.
/// Levels whose sector has no negative eigenvalue (m >= beta R) are omitted.
inline EigenResult disc_spectrum(const DiscSpectrumRequest& req) {
  if (req.n_levels < 1) throw ParameterError("n_levels must be positive");
  EigenResult out;
  out.beta = req.beta;
  out.mesh_id = "bessel";
  const double alpha = req.beta * req.radius_R;
  int last_m = -1;
  double last = 0.0;
  for (int m : level_indices(req.n_levels)) {
    if (m >= alpha || m > 200) break;
    if (m != last_m) last = disc_eigenvalue(m, req).lambda;
    last_m = m;
    out.eigenvalues.push_back(last);
    out.error_estimate.push_back(0.0);
  }
  return out;
}

/// Two-term large-beta form  -(beta + 1/(2R))^2 + (m^2 - 1/4)/R^2.
inline double two_term_asymptotic(int m, double beta, double R) {
  const double b = beta + 0.5 / R;
  return -b * b + (m * m - 0.25) / (R * R);
}

inline std::vector<DiscRow> disc_table(const DiscSpectrumRequest& req) {
  std::vector<DiscRow> rows;
  for (int m : level_indices(req.n_levels)) {
    if (m >= req.beta * req.radius_R || m > 200) break;
    const auto lv = disc_eigenvalue(m, req);
    const double asy = two_term_asymptotic(m, req.beta, req.radius_R);
    rows.push_back({m, lv.X, lv.lambda, asy, lv.lambda - asy});
  }
  return rows;
}

}  // namespace robin::disc_oracle
