// SPDX-License-Identifier: Apache-2.0
//
// Periodic one-dimensional Schroedinger operators
//   c (-d^2/ds^2) + V(s)  on L^2(0,L),  f(0)=f(L), f'(0)=f'(L),
// discretised by a plane-wave Galerkin method. Covers the comparison
// operator S (c = 1, V = -gamma^2/4) and the bracketing pair U_a^D, U_a^N.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "robin/error.hpp"
#include "robin/geometry.hpp"
#include "robin/numerics.hpp"

namespace robin::comparison_1d {

struct PeriodicSchrodinger {
  double length_L = 0.0;
  double kinetic_coefficient = 1.0;
  std::vector<double> potential;  // samples on the uniform grid s_i = i L / N
};

struct Spectrum1D {
  std::vector<double> eigenvalues;  // ascending
  int count = 0;
  int grid_size = 0;
};

inline PeriodicSchrodinger build_comparison_operator(const geometry::CurvatureProfile& cp) {
  PeriodicSchrodinger op{cp.length_L, 1.0, std::vector<double>(cp.gamma.size())};
  std::transform(cp.gamma.begin(), cp.gamma.end(), op.potential.begin(),
                 [](double g) { return -0.25 * g * g; });
  return op;
}

/// Returns (U_a^D, U_a^N). Requires 0 < a < 1/(2 gamma_+).
inline std::pair<PeriodicSchrodinger, PeriodicSchrodinger> build_bracketing_operators(
    const geometry::CurvatureProfile& cp, double a) {
  const double gp = cp.gamma_plus;
  if (!(a > 0.0) || !(2.0 * a * gp < 1.0))
    throw ParameterError("strip width a must satisfy 0 < a < 1/(2 gamma_+)");
  const double m = 1.0 - a * gp;
  const double p = 1.0 + a * gp;
  const double g1 = cp.gamma_d1_plus;
  const double g2 = cp.gamma_d2_plus;

  PeriodicSchrodinger upper{cp.length_L, 1.0 / (m * m), std::vector<double>(cp.gamma.size())};
  PeriodicSchrodinger lower{cp.length_L, 1.0 / (p * p), std::vector<double>(cp.gamma.size())};
  for (std::size_t i = 0; i < cp.gamma.size(); ++i) {
    const double gg = cp.gamma[i] * cp.gamma[i];
    upper.potential[i] = -gg / (4.0 * p * p) + a * g2 / (2.0 * m * m * m);
    lower.potential[i] = -gg / (4.0 * m * m) - a * g2 / (2.0 * m * m * m) -
                         1.25 * a * a * g1 * g1 / (m * m * m * m);
  }
  return {std::move(upper), std::move(lower)};
}

/// Straightened-strip potential V(s,u) with gamma and its derivatives
/// trigonometrically interpolated at s.
inline double effective_potential(const geometry::CurvatureProfile& cp, double s, double u) {
  const double g = cp.at(s, 0);
  const double g1 = cp.at(s, 1);
  const double g2 = cp.at(s, 2);
  const double w = 1.0 - u * g;
  if (!(w > 0.0)) throw SingularCoordinateError("1 - u gamma(s) <= 0");
  return -g * g / (4.0 * w * w) - u * g2 / (2.0 * w * w * w) - 1.25 * u * u * g1 * g1 / (w * w * w * w);
}

namespace detail {

/// Lowest n eigenvalues of the plane-wave Galerkin matrix with modes
/// |m| <= modes/2.
inline std::vector<double> galerkin_eigenvalues(const PeriodicSchrodinger& op,
                                                const numerics::PeriodicInterpolant& v, int modes,
                                                int n) {
  const int K = modes / 2;
  const int dim = 2 * K + 1;
  const double w0 = numerics::kTwoPi / op.length_L;
  Eigen::MatrixXcd H(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) H(r, c) = v.coefficient(static_cast<long>(r - c));
    const double k = w0 * (r - K);
    H(r, r) += op.kinetic_coefficient * k * k;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = es.eigenvalues()(j);
  return out;
}

}  // namespace detail

inline constexpr int kMaxGridSize = 4096;

/// Lowest `n_modes` eigenvalues; the result is cross-checked against a
/// grid of twice (or, at the cap, half) the size and rejected if any
/// eigenvalue moves by more than 1e-8 relative.
inline Spectrum1D solve_periodic_spectrum(const PeriodicSchrodinger& op, int n_modes,
                                          int grid_size = 256) {
  if (n_modes < 1 || grid_size < 8 * n_modes)
    throw ParameterError("grid_size must be at least 8 * n_modes");
  if (grid_size > kMaxGridSize) throw ParameterError("grid_size above 4096 is not supported");
  if (!(op.kinetic_coefficient > 0.0)) throw ParameterError("kinetic coefficient must be positive");
  if (op.potential.empty()) throw ParameterError("empty potential");

  const numerics::PeriodicInterpolant v(op.potential, op.length_L);
  Spectrum1D out{detail::galerkin_eigenvalues(op, v, grid_size, n_modes), n_modes, grid_size};
  const int check = 2 * grid_size <= kMaxGridSize ? 2 * grid_size : grid_size / 2;
  const auto other = detail::galerkin_eigenvalues(op, v, check, n_modes);
  for (int j = 0; j < n_modes; ++j) {
    const double mu = out.eigenvalues[static_cast<std::size_t>(j)];
    if (std::abs(mu - other[static_cast<std::size_t>(j)]) > 1e-8 * std::max(1.0, std::abs(mu)))
      throw ResolutionError("periodic spectrum not converged at grid_size " +
                            std::to_string(grid_size));
  }
  return out;
}

struct MuConvergenceRow {
  int j = 0;
  double a = 0.0;
  double err_D = 0.0;
  double err_N = 0.0;
};

struct MuConvergenceTable {
  std::vector<MuConvergenceRow> rows;
  double fitted_constant = 0.0;             // max err / (a j^2) over the table
  std::vector<double> constant_per_a;       // same maximum restricted to each a
  // err(a_{k+1}) / err(a_k) for consecutive entries of a_list, per j,
  // for the Dirichlet and Neumann side.
  std::vector<std::vector<double>> ratio_D;
  std::vector<std::vector<double>> ratio_N;
};

/// |mu_j^{D/N}(a) - mu_j| for j <= j_max and every a in a_list.
inline MuConvergenceTable verify_mu_convergence(const geometry::CurvatureProfile& cp, int j_max,
                                                const std::vector<double>& a_list,
                                                int grid_size = 256) {
  const auto s = solve_periodic_spectrum(build_comparison_operator(cp), j_max, grid_size);
  MuConvergenceTable t;
  std::vector<std::vector<double>> eD, eN;
  for (double a : a_list) {
    const auto [ud, un] = build_bracketing_operators(cp, a);
    const auto sd = solve_periodic_spectrum(ud, j_max, grid_size);
    const auto sn = solve_periodic_spectrum(un, j_max, grid_size);
    double c_a = 0.0;
    eD.emplace_back();
    eN.emplace_back();
    for (int j = 1; j <= j_max; ++j) {
      const auto k = static_cast<std::size_t>(j - 1);
      MuConvergenceRow row{j, a, std::abs(sd.eigenvalues[k] - s.eigenvalues[k]),
                           std::abs(sn.eigenvalues[k] - s.eigenvalues[k])};
      c_a = std::max(c_a, std::max(row.err_D, row.err_N) / (a * j * j));
      eD.back().push_back(row.err_D);
      eN.back().push_back(row.err_N);
      t.rows.push_back(row);
    }
    t.constant_per_a.push_back(c_a);
    t.fitted_constant = std::max(t.fitted_constant, c_a);
  }
  for (std::size_t k = 0; k + 1 < a_list.size(); ++k) {
    std::vector<double> rd, rn;
    for (int j = 0; j < j_max; ++j) {
      const auto jj = static_cast<std::size_t>(j);
      rd.push_back(eD[k + 1][jj] / eD[k][jj]);
      rn.push_back(eN[k + 1][jj] / eN[k][jj]);
    }
    t.ratio_D.push_back(std::move(rd));
    t.ratio_N.push_back(std::move(rn));
  }
  return t;
}

}  // namespace robin::comparison_1d
