// SPDX-License-Identifier: Apache-2.0
//
// Transverse Robin operators on (0,a):  -d^2/du^2 with
//   phi'(0) = -(beta + gamma_b/2) phi(0)
// and either phi(a) = 0 (Dirichlet variant) or phi'(a) = c_a phi(a),
// c_a = gamma_+ / (2(1 - a gamma_+)) (Neumann variant). Each has a single
// negative eigenvalue zeta = -k^2 with k exponentially close to
// kappa = beta + gamma_b/2; the root is located in log(|k - kappa|) so that
// e^{2ka} never has to be formed.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

#include <Eigen/Eigenvalues>

#include "robin/error.hpp"
#include "robin/numerics.hpp"

namespace robin::transverse {

enum class Kind { dirichlet, neumann };

struct TransverseParams {
  double a = 0.0;
  double beta = 0.0;
  double gamma_boundary = 0.0;  // gamma_* (Dirichlet) or gamma^* (Neumann)
  double gamma_plus = 0.0;

  [[nodiscard]] double kappa() const { return beta + 0.5 * gamma_boundary; }
  [[nodiscard]] double far_coefficient() const { return gamma_plus / (2.0 * (1.0 - a * gamma_plus)); }
};

struct TransverseMode {
  double zeta = 0.0;
  double k = 0.0;
  double log_offset = 0.0;  // log |k - kappa|
  double residual = 0.0;    // of the log-form root equation
  bool degenerate = false;  // |k - kappa| below double resolution of kappa
  double lower = 0.0;       // sandwich bounds for zeta
  double upper = 0.0;
};

inline bool dirichlet_admissible(const TransverseParams& p) {
  return p.a > 0.0 && p.a * p.kappa() > 4.0 / 3.0;
}

inline bool neumann_admissible(const TransverseParams& p) {
  if (!(p.a > 0.0) || !(p.a * p.gamma_plus < 1.0) || p.gamma_plus < 0.0) return false;
  const double kappa = p.kappa();
  return kappa > p.far_coefficient() && kappa > 2.0 * std::log(5.0) / (3.0 * p.a);
}

/// g_{a,beta}(k) = 2ak + log(kappa - k) - log(kappa + k).
inline double dirichlet_condition(const TransverseParams& p, double k) {
  const double kappa = p.kappa();
  return 2.0 * p.a * k + std::log(kappa - k) - std::log(kappa + k);
}

inline TransverseMode solve_dirichlet_mode(const TransverseParams& p) {
  if (!dirichlet_admissible(p)) throw ParameterError("Dirichlet transverse mode needs a(beta + gamma_*/2) > 4/3");
  const double kappa = p.kappa();
  const double a = p.a;
  // k = kappa - s, t = log s
  auto f = [&](double t) {
    const double s = std::exp(t);
    return t - std::log(2.0 * kappa - s) + 2.0 * a * (kappa - s);
  };
  auto df = [&](double t) {
    const double s = std::exp(t);
    return 1.0 + s / (2.0 * kappa - s) - 2.0 * a * s;
  };
  const double t_hi = std::log(0.5 * kappa);
  const double t_lo = std::log(2.0 * kappa) - 2.0 * a * kappa - 10.0;
  const double t = numerics::bracketed_newton(f, df, t_lo, t_hi);
  const double s = std::exp(t);

  TransverseMode m;
  m.log_offset = t;
  m.k = kappa - s;
  m.zeta = -(kappa - s) * (kappa - s);
  m.residual = std::abs(f(t));
  m.degenerate = s < kappa * std::numeric_limits<double>::epsilon();
  m.lower = -kappa * kappa;
  m.upper = -kappa * kappa + 4.0 * kappa * kappa * std::exp(-a * kappa);
  return m;
}

inline TransverseMode solve_neumann_mode(const TransverseParams& p) {
  if (!neumann_admissible(p))
    throw ParameterError("Neumann transverse mode needs beta + gamma^*/2 > max(c_a, 2 log5 / (3a))");
  const double kappa = p.kappa();
  const double a = p.a;
  const double c = p.far_coefficient();
  // k = kappa + s, t = log s; log form of
  //   e^{2ka} = (k + kappa)/(k - kappa) * (k + c)/(k - c)
  auto f = [&](double t) {
    const double s = std::exp(t);
    return 2.0 * a * (kappa + s) - std::log(2.0 * kappa + s) + t - std::log(kappa + s + c) +
           std::log(kappa + s - c);
  };
  auto df = [&](double t) {
    const double s = std::exp(t);
    return 2.0 * a * s - s / (2.0 * kappa + s) + 1.0 - s / (kappa + s + c) + s / (kappa + s - c);
  };
  const double t_hi = std::log(0.5 * kappa);
  const double t_lo =
      std::log(2.0 * kappa) + std::log((kappa + c) / (kappa - c)) - 2.0 * a * kappa - 10.0;
  const double t = numerics::bracketed_newton(f, df, t_lo, t_hi);
  const double s = std::exp(t);

  TransverseMode m;
  m.log_offset = t;
  m.k = kappa + s;
  m.zeta = -(kappa + s) * (kappa + s);
  m.residual = std::abs(f(t));
  m.degenerate = s < kappa * std::numeric_limits<double>::epsilon();
  m.lower = -kappa * kappa - 11.25 * kappa * kappa * std::exp(-a * kappa);
  m.upper = -kappa * kappa;
  return m;
}

struct FdSpectrum {
  std::vector<double> eigenvalues;  // ascending
  int negative_count = 0;
  double h = 0.0;
};

namespace detail {

/// Symmetrised ghost-point finite-difference matrix (diagonal, off-diagonal)
/// plus the node weights w with  phi = w^{-1/2} psi.
struct Tridiagonal {
  Eigen::VectorXd diag;
  Eigen::VectorXd off;
  Eigen::VectorXd weight;
  double h = 0.0;
};

inline Tridiagonal fd_matrix(const TransverseParams& p, Kind kind, int cells) {
  const double h = p.a / cells;
  const double h2 = h * h;
  const int n = kind == Kind::dirichlet ? cells : cells + 1;
  Tridiagonal t;
  t.h = h;
  t.diag = Eigen::VectorXd::Constant(n, 2.0 / h2);
  t.off = Eigen::VectorXd::Constant(n - 1, -1.0 / h2);
  t.weight = Eigen::VectorXd::Ones(n);
  t.diag(0) = (2.0 - 2.0 * h * p.kappa()) / h2;
  t.off(0) = -std::sqrt(2.0) / h2;
  t.weight(0) = 0.5;
  if (kind == Kind::neumann) {
    t.diag(n - 1) = (2.0 - 2.0 * h * p.far_coefficient()) / h2;
    t.off(n - 2) = -std::sqrt(2.0) / h2;
    t.weight(n - 1) = 0.5;
  }
  return t;
}

}  // namespace detail

/// Second-order finite differences with ghost points for both boundary
/// conditions; an independent check of the transcendental roots.
inline FdSpectrum fd_transverse_oracle(const TransverseParams& p, Kind kind, int cells) {
  if (cells < 256) throw ParameterError("finite-difference oracle needs at least 256 cells");
  const auto t = detail::fd_matrix(p, kind, cells);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(t.diag, t.off, Eigen::EigenvaluesOnly);
  FdSpectrum out;
  out.h = t.h;
  out.eigenvalues.assign(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  out.negative_count =
      static_cast<int>(std::count_if(out.eigenvalues.begin(), out.eigenvalues.end(), [](double v) { return v < 0.0; }));
  return out;
}

namespace detail {

/// Number of eigenvalues below sigma (signs of the LDL^T pivots of T - sigma).
inline int count_below(const Tridiagonal& t, double sigma) {
  int count = 0;
  double d = 1.0;
  for (Eigen::Index i = 0; i < t.diag.size(); ++i) {
    const double off2 = i > 0 ? t.off(i - 1) * t.off(i - 1) : 0.0;
    d = t.diag(i) - sigma - (i > 0 ? off2 / d : 0.0);
    if (d == 0.0) d = -1e-300;
    count += d < 0.0;
  }
  return count;
}

}  // namespace detail

/// Lowest eigenvalue and negative count of the same finite-difference
/// operator, by Sturm bisection; O(cells) per step instead of a full solve.
inline FdSpectrum fd_transverse_ground(const TransverseParams& p, Kind kind, int cells) {
  if (cells < 256) throw ParameterError("finite-difference oracle needs at least 256 cells");
  const auto t = detail::fd_matrix(p, kind, cells);
  // Gershgorin interval
  const Eigen::Index n = t.diag.size();
  double lo = 0.0, hi = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(t.off(i - 1)) : 0.0) + (i + 1 < n ? std::abs(t.off(i)) : 0.0);
    lo = std::min(lo, t.diag(i) - r);
    hi = std::max(hi, t.diag(i) + r);
  }
  while (hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (detail::count_below(t, mid) >= 1 ? hi : lo) = mid;
  }
  FdSpectrum out;
  out.h = t.h;
  out.eigenvalues = {0.5 * (lo + hi)};
  out.negative_count = detail::count_below(t, 0.0);
  return out;
}

/// Ground state of the finite-difference operator on the nodes u_i = i h,
/// normalised in the trapezoidal L^2 norm (Dirichlet: the node u = a is 0).
inline std::vector<double> fd_ground_state(const TransverseParams& p, Kind kind, int cells) {
  const auto t = detail::fd_matrix(p, kind, cells);
  const auto spec = fd_transverse_oracle(p, kind, cells);
  const Eigen::Index n = t.diag.size();
  const double shift = spec.eigenvalues.front() - 1e-9 * std::abs(spec.eigenvalues.front());
  Eigen::VectorXd x = Eigen::VectorXd::Ones(n);
  for (int it = 0; it < 4; ++it) {
    // Thomas algorithm for (T - shift) y = x
    Eigen::VectorXd c(n), d(n);
    double denom = t.diag(0) - shift;
    c(0) = n > 1 ? t.off(0) / denom : 0.0;
    d(0) = x(0) / denom;
    for (Eigen::Index i = 1; i < n; ++i) {
      denom = t.diag(i) - shift - t.off(i - 1) * c(i - 1);
      c(i) = i + 1 < n ? t.off(i) / denom : 0.0;
      d(i) = (x(i) - t.off(i - 1) * d(i - 1)) / denom;
    }
    for (Eigen::Index i = n - 2; i >= 0; --i) d(i) -= c(i) * d(i + 1);
    x = d / d.norm();
  }
  std::vector<double> phi(static_cast<std::size_t>(cells + 1), 0.0);
  double norm2 = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double v = x(i) / std::sqrt(t.weight(i));
    phi[static_cast<std::size_t>(i)] = v;
    norm2 += t.weight(i) * v * v * t.h;
  }
  const double scale = (phi[0] < 0 ? -1.0 : 1.0) / std::sqrt(norm2);
  for (double& v : phi) v *= scale;
  return phi;
}

/// A e^{ku} + B e^{-ku} for the solved mode, in overflow-free form.
class TransverseEigenfunction {
 public:
  TransverseEigenfunction(const TransverseMode& mode, const TransverseParams& p, Kind kind)
      : k_(mode.k), a_(p.a), kappa_(p.kappa()), c_(p.far_coefficient()), kind_(kind) {
    if (kind == Kind::dirichlet) {
      // phi = e^{-ku} - e^{k(u - 2a)}
      log_b_ = -2.0 * k_ * a_;
    } else {
      // phi = e^{-ku} + B e^{ku},  B = (k - kappa)/(k + kappa)
      log_b_ = mode.log_offset - std::log(k_ + kappa_);
    }
    const auto rule = numerics::composite_gauss<20>(0.0, a_, 64);
    double n2 = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double v = raw(rule.nodes[i], 0);
      n2 += rule.weights[i] * v * v;
    }
    scale_ = 1.0 / std::sqrt(n2);
  }

  [[nodiscard]] double operator()(double u, int order = 0) const { return scale_ * raw(u, order); }

  [[nodiscard]] std::vector<double> sample(int points) const {
    std::vector<double> out(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) out[static_cast<std::size_t>(i)] = (*this)(a_ * i / (points - 1));
    return out;
  }

  /// |phi'(0) + kappa phi(0)| and the far-end residual, both relative to max |phi|.
  [[nodiscard]] std::pair<double, double> boundary_residuals() const {
    const double peak = std::abs((*this)(0.0));
    const double r0 = std::abs((*this)(0.0, 1) + kappa_ * (*this)(0.0));
    const double ra = kind_ == Kind::dirichlet ? std::abs((*this)(a_))
                                               : std::abs((*this)(a_, 1) - c_ * (*this)(a_));
    return {r0 / peak, ra / peak};
  }

 private:
  [[nodiscard]] double raw(double u, int order) const {
    const double sign_minus = order % 2 == 0 ? 1.0 : -1.0;
    const double kp = std::pow(k_, order);
    const double decay = sign_minus * kp * std::exp(-k_ * u);
    const double grow = kp * std::exp(log_b_ + k_ * u);
    return kind_ == Kind::dirichlet ? decay - grow : decay + grow;
  }

  double k_, a_, kappa_, c_;
  Kind kind_;
  double log_b_ = 0.0;
  double scale_ = 1.0;
};

struct SweepRow {
  double a, beta;
  double zeta_D, zeta_D_lower, zeta_D_upper;
  double zeta_N, zeta_N_lower, zeta_N_upper;
};

/// Both transverse modes over a (a, beta) grid; Dirichlet uses gamma_*,
/// Neumann uses gamma^* and gamma_+.
inline std::vector<SweepRow> transverse_sweep(const std::vector<double>& a_list,
                                              const std::vector<double>& beta_list,
                                              double gamma_lowstar, double gamma_star,
                                              double gamma_plus) {
  std::vector<SweepRow> rows;
  for (double a : a_list) {
    for (double beta : beta_list) {
      const auto d = solve_dirichlet_mode({a, beta, gamma_lowstar, gamma_plus});
      const auto n = solve_neumann_mode({a, beta, gamma_star, gamma_plus});
      rows.push_back({a, beta, d.zeta, d.lower, d.upper, n.zeta, n.lower, n.upper});
    }
  }
  return rows;
}

/// Three-level Richardson extrapolation of a second-order sequence computed
/// on cells, 2 cells, 4 cells.
inline double richardson3(double coarse, double mid, double fine) {
  const double r1 = (4.0 * mid - coarse) / 3.0;
  const double r2 = (4.0 * fine - mid) / 3.0;
  return (16.0 * r2 - r1) / 15.0;
}

}  // namespace robin::transverse
