// SPDX-License-Identifier: Apache-2.0
//
// Large-beta bounds for the negative Robin eigenvalues and their checks:
// the three-term sandwich built from the comparison operator, the two-term
// curvature expansion, and the boundary-layer trial-function upper bound.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <future>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robin/comparison_1d.hpp"
#include "robin/eigen_result.hpp"
#include "robin/error.hpp"
#include "robin/geometry.hpp"
#include "robin/numerics.hpp"
#include "robin/robin_fem.hpp"

namespace robin::asymptotics {

/// (-(beta + gamma^*/2)^2 + mu_n, -(beta + gamma_*/2)^2 + mu_n), n >= 1.
inline std::pair<double, double> three_term_bounds(int n, double beta, const geometry::CurvatureProfile& cp,
                                                   const comparison_1d::Spectrum1D& spec) {
  if (n < 1 || n > spec.count) throw ParameterError("n must lie in [1, spec.count]");
  const double mu = spec.eigenvalues[static_cast<std::size_t>(n - 1)];
  const double lo = beta + 0.5 * cp.gamma_star;
  const double hi = beta + 0.5 * cp.gamma_lowstar;
  return {-lo * lo + mu, -hi * hi + mu};
}

inline double two_term_upper(double beta, double gamma_star) { return -beta * beta - gamma_star * beta; }

inline double remainder_scale(double beta) { return std::log(beta) / beta; }

struct ReportRow {
  int n = 0;
  double beta = 0.0;
  double lambda = 0.0;
  double err_est = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double two_term = 0.0;
  double residual_lower = 0.0;  // lambda - lower   (should be >= -tol)
  double residual_upper = 0.0;  // lambda - upper   (should be <= +tol)
  std::optional<double> trial;
};

struct SandwichReport {
  std::vector<ReportRow> rows;
  std::vector<double> betas;
  // Per beta: largest bound violation beyond err_est, in units of log(beta)/beta.
  std::vector<double> constant_lower;
  std::vector<double> constant_upper;
  double fit_lower = 0.0;  // max over beta
  double fit_upper = 0.0;
  bool stable_lower = true;
  bool stable_upper = true;
  bool counts_ok = true;      // at least n negative eigenvalues at every beta
  bool within_tolerance = true;
  bool inconclusive = false;  // some err_est above 10% of log(beta)/beta

  [[nodiscard]] bool pass() const {
    return counts_ok && within_tolerance && stable_lower && stable_upper;
  }
};

namespace detail {

/// Constants c_1, c_2, ... over increasing beta are "stable" when every
/// consecutive pair of nonzero values differs by at most a factor 2 and no
/// zero is followed by a nonzero value (a violation may vanish, not appear).
inline bool stable_within_factor2(const std::vector<double>& c) {
  for (std::size_t k = 0; k + 1 < c.size(); ++k) {
    if (c[k] == 0.0 && c[k + 1] == 0.0) continue;
    if (c[k] == 0.0) return false;
    if (c[k + 1] == 0.0) continue;
    const double r = c[k + 1] / c[k];
    if (r < 0.5 || r > 2.0) return false;
  }
  return true;
}

}  // namespace detail

/// Checks lower - tol <= lambda_n <= upper + tol for n = 1..n_max with
/// tol = C_fit log(beta)/beta + err_est, fitting separate constants per side.
inline SandwichReport verify_sandwich(const std::vector<EigenResult>& results, int n_max,
                                      const geometry::CurvatureProfile& cp,
                                      const comparison_1d::Spectrum1D& spec) {
  if (results.empty()) throw ParameterError("no spectra supplied");
  SandwichReport rep;
  for (const auto& r : results) {
    const double scale = remainder_scale(r.beta);
    int negative = 0;
    for (double l : r.eigenvalues) negative += l < 0.0;
    if (negative < n_max) rep.counts_ok = false;
    double cl = 0.0, cu = 0.0;
    for (int n = 1; n <= std::min<int>(n_max, static_cast<int>(r.eigenvalues.size())); ++n) {
      const auto k = static_cast<std::size_t>(n - 1);
      const auto [lo, hi] = three_term_bounds(n, r.beta, cp, spec);
      ReportRow row;
      row.n = n;
      row.beta = r.beta;
      row.lambda = r.eigenvalues[k];
      row.err_est = k < r.error_estimate.size() ? r.error_estimate[k] : 0.0;
      row.lower = lo;
      row.upper = hi;
      row.two_term = two_term_upper(r.beta, cp.gamma_star);
      row.residual_lower = row.lambda - lo;
      row.residual_upper = row.lambda - hi;
      if (row.err_est > 0.1 * scale) rep.inconclusive = true;
      cl = std::max(cl, std::max(0.0, -row.residual_lower - row.err_est) / scale);
      cu = std::max(cu, std::max(0.0, row.residual_upper - row.err_est) / scale);
      rep.rows.push_back(row);
    }
    rep.betas.push_back(r.beta);
    rep.constant_lower.push_back(cl);
    rep.constant_upper.push_back(cu);
  }
  rep.fit_lower = *std::max_element(rep.constant_lower.begin(), rep.constant_lower.end());
  rep.fit_upper = *std::max_element(rep.constant_upper.begin(), rep.constant_upper.end());
  for (const auto& row : rep.rows) {
    const double s = remainder_scale(row.beta);
    if (row.lambda < row.lower - (rep.fit_lower * s + row.err_est) * (1.0 + 1e-12) ||
        row.lambda > row.upper + (rep.fit_upper * s + row.err_est) * (1.0 + 1e-12))
      rep.within_tolerance = false;
  }
  rep.stable_lower = detail::stable_within_factor2(rep.constant_lower);
  rep.stable_upper = detail::stable_within_factor2(rep.constant_upper);
  return rep;
}

struct TwoTermFit {
  double c_estimate = 0.0;
  double nuisance = 0.0;               // coefficient of beta^{2/3}
  std::vector<double> leave_one_out;   // c with each beta removed
  double drift = 0.0;                  // max |c_loo - c|
  double condition = 0.0;
};

namespace detail {

inline std::pair<Eigen::Vector2d, double> fit_c(const std::vector<double>& betas,
                                                const std::vector<double>& lambda1) {
  const auto m = static_cast<Eigen::Index>(betas.size());
  Eigen::MatrixXd A(m, 2);
  Eigen::VectorXd y(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double b = betas[static_cast<std::size_t>(i)];
    A(i, 0) = -b;
    A(i, 1) = std::pow(b, 2.0 / 3.0);
    y(i) = lambda1[static_cast<std::size_t>(i)] + b * b;
  }
  // column scaling before judging conditioning
  const Eigen::Vector2d scale(A.col(0).norm(), A.col(1).norm());
  const Eigen::MatrixXd As = A * scale.cwiseInverse().asDiagonal();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto sv = svd.singularValues();
  const double cond = sv(0) / sv(sv.size() - 1);
  if (!std::isfinite(cond) || cond > 1e10) throw FitError("two-term fit is ill-conditioned");
  const Eigen::Vector2d x = svd.solve(y).cwiseQuotient(scale);
  return {x, cond};
}

}  // namespace detail

/// Least squares of lambda_1 + beta^2 on (-beta, beta^{2/3}); c is the
/// coefficient of -beta.
inline TwoTermFit two_term_fit(const std::vector<double>& betas, const std::vector<double>& lambda1) {
  if (betas.size() < 3 || betas.size() != lambda1.size())
    throw FitError("two_term_fit needs at least three (beta, lambda_1) pairs");
  for (std::size_t i = 0; i < betas.size(); ++i) {
    if (!(betas[i] > 0.0)) throw FitError("beta values must be positive");
    if (i > 0 && !(betas[i] > betas[i - 1])) throw FitError("beta values must increase");
  }
  TwoTermFit f;
  const auto [x, cond] = detail::fit_c(betas, lambda1);
  f.c_estimate = x(0);
  f.nuisance = x(1);
  f.condition = cond;
  for (std::size_t skip = 0; skip < betas.size(); ++skip) {
    std::vector<double> b, l;
    for (std::size_t i = 0; i < betas.size(); ++i)
      if (i != skip) b.push_back(betas[i]), l.push_back(lambda1[i]);
    const double c = detail::fit_c(b, l).first(0);
    f.leave_one_out.push_back(c);
    f.drift = std::max(f.drift, std::abs(c - f.c_estimate));
  }
  return f;
}

// --------------------------------------------------------- trial functions

/// Default bump chi(x) = exp(-1/(x(1-x))) on (0,1), zero elsewhere.
struct Bump {
  [[nodiscard]] double operator()(double x, int order = 0) const {
    if (!(x > 0.0 && x < 1.0)) return 0.0;
    const double q = x * (1.0 - x);
    const double v = std::exp(-1.0 / q);
    if (order == 0) return v;
    return v * (1.0 - 2.0 * x) / (q * q);
  }
};

struct TrialQuotient {
  double quotient = 0.0;
  double numerator = 0.0;
  double norm2 = 0.0;
  double quadrature_change = 0.0;  // relative change under panel doubling
  int panels = 0;
};

struct TrialSetup {
  double beta = 0.0;
  double a = 0.0;        // strip width
  double epsilon = 0.0;  // half window
  double alpha = 0.0;    // transverse decay rate
  double center = 0.0;   // s^*
};

/// a = min(0.95 a1, 6 log(beta)/beta), epsilon = beta^{-1/3}, alpha = beta + gamma^*/2.
inline TrialSetup default_trial_setup(const geometry::CurvatureProfile& cp, double a1, double beta) {
  if (!(beta > 1.0)) throw ParameterError("trial functions need beta > 1");
  return {beta, std::min(0.95 * a1, 6.0 / beta * std::log(beta)), std::cbrt(1.0 / beta),
          beta + 0.5 * cp.gamma_star, cp.s_star};
}

namespace detail {

/// Window j (j = 1 is centred at s^*): chi((s - s^* + (2j - 1) eps) / (2 eps)).
inline double window_left(const TrialSetup& t, int j) { return t.center - (2 * j - 1) * t.epsilon; }

template <int Q>
TrialQuotient trial_quadrature(const geometry::CurvatureProfile& cp, const TrialSetup& t, int j,
                               const std::function<double(double, int)>& chi, int panels) {
  const double s0 = window_left(t, j);
  const double two_eps = 2.0 * t.epsilon;
  const auto qs = numerics::composite_gauss<Q>(s0, s0 + two_eps, panels);
  const auto qu = numerics::composite_gauss<Q>(0.0, t.a, panels);
  const double e2 = std::exp(-2.0 * t.a * t.alpha);
  std::vector<double> f(qu.nodes.size()), df(qu.nodes.size());
  for (std::size_t k = 0; k < qu.nodes.size(); ++k) {
    const double u = qu.nodes[k];
    const double p = std::exp(-t.alpha * u), m = e2 * std::exp(t.alpha * u);
    f[k] = p - m;
    df[k] = -t.alpha * (p + m);
  }
  const double f0 = 1.0 - e2;
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < qs.nodes.size(); ++i) {
    const double s = qs.nodes[i];
    const double x = (s - s0) / two_eps;
    const double c = chi(x, 0), dc = chi(x, 1) / two_eps;
    if (c == 0.0 && dc == 0.0) continue;
    const double g = cp.at(s, 0), g1 = cp.at(s, 1), g2 = cp.at(s, 2);
    double inner = 0.0, mass = 0.0;
    for (std::size_t k = 0; k < qu.nodes.size(); ++k) {
      const double u = qu.nodes[k];
      const double w = 1.0 - u * g;
      if (!(w > 0.0)) throw SingularCoordinateError("strip width reaches the focal set");
      const double V = -g * g / (4.0 * w * w) - u * g2 / (2.0 * w * w * w) - 1.25 * u * u * g1 * g1 / (w * w * w * w);
      const double phi = c * f[k];
      inner += qu.weights[k] * (dc * dc * f[k] * f[k] / (w * w) + c * c * df[k] * df[k] + V * phi * phi);
      mass += qu.weights[k] * phi * phi;
    }
    num += qs.weights[i] * (inner - (0.5 * g + t.beta) * c * c * f0 * f0);
    den += qs.weights[i] * mass;
  }
  return {num / den, num, den, 0.0, panels};
}

}  // namespace detail

/// Rayleigh quotient b^D[phi] / ||phi||^2 for phi = chi_eps,j(s) (e^{-alpha u} - e^{-2 a alpha + alpha u}),
/// with panel doubling until the value moves by < 1e-8 relative.
inline TrialQuotient trial_window_quotient(const geometry::CurvatureProfile& cp, const TrialSetup& t, int j,
                                           const std::function<double(double, int)>& chi = Bump{}) {
  if (!(t.a > 0.0) || !(t.a * cp.gamma_plus < 1.0))
    throw ParameterError("strip width must satisfy 0 < a < 1/gamma_+");
  if (!(t.epsilon > 0.0) || !(2.0 * t.epsilon < cp.length_L))
    throw PlacementError("window of width 2 eps does not fit in (0, L)");
  TrialQuotient prev = detail::trial_quadrature<20>(cp, t, j, chi, 8);
  for (int panels = 16; panels <= 512; panels *= 2) {
    TrialQuotient cur = detail::trial_quadrature<20>(cp, t, j, chi, panels);
    cur.quadrature_change = std::abs(cur.quotient - prev.quotient) / std::abs(cur.quotient);
    if (cur.quadrature_change < 1e-8) return cur;
    prev = cur;
  }
  return prev;
}

inline TrialQuotient trial_rayleigh_quotient(const geometry::CurvatureProfile& cp, double beta, double a,
                                             double epsilon,
                                             const std::function<double(double, int)>& chi = Bump{}) {
  return trial_window_quotient(cp, {beta, a, epsilon, beta + 0.5 * cp.gamma_star, cp.s_star}, 1, chi);
}

struct TrialFamily {
  std::vector<TrialQuotient> quotients;  // j = 1..j_max
  double max_overlap = 0.0;              // max |chi_j chi_k| over samples, j != k
  double max_cross_inner = 0.0;          // max |<phi_j, phi_k>| at quadrature level
};

/// Shifted windows j = 1..j_max placed side by side to the left of s^*.
inline TrialFamily trial_orthogonal_family(const geometry::CurvatureProfile& cp, const TrialSetup& t, int j_max,
                                           const std::function<double(double, int)>& chi = Bump{}) {
  if (j_max < 1) throw ParameterError("j_max must be positive");
  if (!(2.0 * j_max * t.epsilon < cp.length_L))
    throw PlacementError("shifted windows overlap around the curve");
  TrialFamily fam;
  for (int j = 1; j <= j_max; ++j) fam.quotients.push_back(trial_window_quotient(cp, t, j, chi));

  // all windows live in [s^* - (2 j_max - 1) eps, s^* + eps], an interval shorter than L,
  // so sample-level supports can be compared without wrapping
  auto chi_j = [&](int j, double s) { return chi((s - detail::window_left(t, j)) / (2.0 * t.epsilon), 0); };
  const double lo = detail::window_left(t, j_max), hi = t.center + t.epsilon;
  const int samples = 4000 * j_max;
  for (int i = 0; i <= samples; ++i) {
    const double s = lo + (hi - lo) * i / samples;
    for (int j = 1; j <= j_max; ++j)
      for (int k = j + 1; k <= j_max; ++k) fam.max_overlap = std::max(fam.max_overlap, std::abs(chi_j(j, s) * chi_j(k, s)));
  }
  // <phi_j, phi_k> = <chi_j, chi_k>_s * ||f||^2_u; the s-factor on the union of window rules
  for (int j = 1; j <= j_max; ++j)
    for (int k = j + 1; k <= j_max; ++k) {
      double acc = 0.0;
      for (int w : {j, k}) {
        const double s0 = detail::window_left(t, w);
        const auto q = numerics::composite_gauss<20>(s0, s0 + 2.0 * t.epsilon, 16);
        for (std::size_t i = 0; i < q.nodes.size(); ++i) acc += q.weights[i] * chi_j(j, q.nodes[i]) * chi_j(k, q.nodes[i]);
      }
      fam.max_cross_inner = std::max(fam.max_cross_inner, std::abs(acc));
    }
  return fam;
}

// ------------------------------------------------------------------ sweeps

/// FEM spectra for every beta, at most `jobs` solves in flight.
inline std::vector<EigenResult> fem_sweep(const geometry::ArcLengthCurve& alc, double gamma_star,
                                          const std::vector<double>& betas, int n,
                                          const fem::FemOptions& opt, int jobs = 1) {
  std::vector<EigenResult> out(betas.size());
  jobs = std::max(1, jobs);
  for (std::size_t start = 0; start < betas.size(); start += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<EigenResult>> batch;
    const std::size_t end = std::min(betas.size(), start + static_cast<std::size_t>(jobs));
    for (std::size_t i = start; i < end; ++i)
      batch.push_back(std::async(jobs == 1 ? std::launch::deferred : std::launch::async,
                                 [&, i] { return fem::compute_spectrum(alc, gamma_star, betas[i], n, opt); }));
    for (std::size_t i = start; i < end; ++i) out[i] = batch[i - start].get();
  }
  return out;
}

}  // namespace robin::asymptotics
