// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/SparseCholesky>
#include <gtest/gtest.h>

#include "robin/comparison_1d.hpp"

using namespace robin;
using namespace robin::comparison_1d;
using geometry::CurvatureProfile;
using geometry::ParametricCurve;

namespace {

constexpr double kPi = std::numbers::pi;

CurvatureProfile profile(const ParametricCurve& c, std::size_t n = 512) {
  return geometry::signed_curvature(geometry::reparametrize_arclength(c, n));
}

// Number of eigenvalues of the periodic second-order finite-difference
// operator that lie below x, from the inertia of an LDL^T factorisation.
int fd_count_below(const std::vector<double>& v, double L, double x) {
  const int n = static_cast<int>(v.size());
  const double h = L / n;
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < n; ++i) {
    trip.emplace_back(i, i, 2.0 / (h * h) + v[static_cast<std::size_t>(i)] - x);
    trip.emplace_back(i, (i + 1) % n, -1.0 / (h * h));
    trip.emplace_back((i + 1) % n, i, -1.0 / (h * h));
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(trip.begin(), trip.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  const auto d = ldlt.vectorD();
  return static_cast<int>((d.array() < 0.0).count());
}

// j-th eigenvalue (1-based) of the finite-difference operator by bisection.
double fd_eigenvalue(const std::vector<double>& v, double L, int j, double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (fd_count_below(v, L, mid) >= j ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(ComparisonOperator, DiscPotentialIsConstant) {
  for (double R : {1.0, 2.0}) {
    auto op = build_comparison_operator(profile(ParametricCurve::circle(R), 128));
    EXPECT_DOUBLE_EQ(op.kinetic_coefficient, 1.0);
    for (double v : op.potential) EXPECT_NEAR(v, -0.25 / (R * R), 1e-12);
  }
}

TEST(ComparisonOperator, EllipseMinimumPotential) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto op = build_comparison_operator(cp);
  EXPECT_NEAR(*std::min_element(op.potential.begin(), op.potential.end()), -0.5625, 1e-9);
  for (double v : op.potential) EXPECT_LE(v, 0.0);
}

TEST(PeriodicSpectrum, DiscMatchesExplicitFormula) {
  for (double R : {1.0, 2.0}) {
    auto op = build_comparison_operator(profile(ParametricCurve::circle(R), 128));
    auto spec = solve_periodic_spectrum(op, 9, 128);
    for (int j = 1; j <= 9; ++j) {
      const double expect = (-0.25 + (j / 2) * (j / 2)) / (R * R);
      EXPECT_NEAR(spec.eigenvalues[static_cast<std::size_t>(j - 1)], expect, 1e-10) << j;
    }
  }
}

TEST(PeriodicSpectrum, FreeLaplacian) {
  PeriodicSchrodinger op{1.0, 1.0, std::vector<double>(64, 0.0)};
  auto spec = solve_periodic_spectrum(op, 5, 64);
  const double w = 2 * kPi;
  const double expect[] = {0.0, w * w, w * w, 4 * w * w, 4 * w * w};
  for (int j = 0; j < 5; ++j) EXPECT_NEAR(spec.eigenvalues[j], expect[j], 1e-9);
}

TEST(PeriodicSpectrum, ConstantPotentialPairsAreDegenerate) {
  PeriodicSchrodinger op{2.5, 0.7, std::vector<double>(64, -3.0)};
  auto spec = solve_periodic_spectrum(op, 11, 128);
  for (int j = 1; j + 1 < 11; j += 2) EXPECT_NEAR(spec.eigenvalues[j], spec.eigenvalues[j + 1], 1e-9);
}

TEST(PeriodicSpectrum, EllipseAgreesWithFiniteDifferenceOracle) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto spec = solve_periodic_spectrum(build_comparison_operator(cp), 6, 256);
  const int n_fd = 16384;
  std::vector<double> v(n_fd);
  for (int i = 0; i < n_fd; ++i) {
    const double g = cp.at(cp.length_L * i / n_fd);
    v[static_cast<std::size_t>(i)] = -0.25 * g * g;
  }
  for (int j = 1; j <= 6; ++j) {
    const double fd = fd_eigenvalue(v, cp.length_L, j, -1.0, 20.0);
    EXPECT_NEAR(spec.eigenvalues[static_cast<std::size_t>(j - 1)], fd, 1e-6) << j;
  }
}

TEST(PeriodicSpectrum, VariationalBoundsAndConvergence) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto op = build_comparison_operator(cp);
  auto s1 = solve_periodic_spectrum(op, 6, 128);
  auto s2 = solve_periodic_spectrum(op, 6, 256);
  const double vmin = *std::min_element(op.potential.begin(), op.potential.end());
  double mean = 0.0;
  for (double v : op.potential) mean += v / op.potential.size();
  EXPECT_GE(s1.eigenvalues[0], vmin);
  EXPECT_LE(s1.eigenvalues[0], mean);
  for (int j = 0; j < 6; ++j) {
    EXPECT_NEAR(s1.eigenvalues[j], s2.eigenvalues[j], 1e-8 * std::max(1.0, std::abs(s2.eigenvalues[j])));
    if (j > 0) EXPECT_LE(s1.eigenvalues[j - 1], s1.eigenvalues[j]);
  }
}

TEST(PeriodicSpectrum, RejectsUnresolvedOrTooSmallGrid) {
  PeriodicSchrodinger op{1.0, 1.0, std::vector<double>(64, 0.0)};
  EXPECT_THROW(solve_periodic_spectrum(op, 4, 16), ParameterError);
  // a rough potential with content near the grid cut-off cannot converge
  std::vector<double> rough(2048);
  for (std::size_t i = 0; i < rough.size(); ++i) rough[i] = 400.0 * std::cos(2 * kPi * 12.0 * i / 2048.0);
  PeriodicSchrodinger hard{1.0, 1.0, rough};
  EXPECT_THROW(solve_periodic_spectrum(hard, 2, 16), ResolutionError);
}

TEST(Bracketing, SmallStripWidthRecoversComparisonOperator) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto s = build_comparison_operator(cp);
  auto [ud, un] = build_bracketing_operators(cp, 1e-6);
  for (std::size_t i = 0; i < s.potential.size(); ++i) {
    EXPECT_NEAR(ud.potential[i], s.potential[i], 1e-5);
    EXPECT_NEAR(un.potential[i], s.potential[i], 1e-5);
  }
  EXPECT_NEAR(ud.kinetic_coefficient, 1.0, 1e-5);
  EXPECT_NEAR(un.kinetic_coefficient, 1.0, 1e-5);
}

TEST(Bracketing, DiscValues) {
  auto cp = profile(ParametricCurve::circle(1.0), 128);
  auto [ud, un] = build_bracketing_operators(cp, 0.1);
  EXPECT_NEAR(ud.kinetic_coefficient, 1.0 / 0.81, 1e-12);
  EXPECT_NEAR(un.kinetic_coefficient, 1.0 / 1.21, 1e-12);
  for (double v : ud.potential) EXPECT_NEAR(v, -1.0 / (4 * 1.21), 1e-9);
  for (double v : un.potential) EXPECT_NEAR(v, -1.0 / (4 * 0.81), 1e-9);
}

TEST(Bracketing, EllipseLowerPotentialBelowUpper) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto [ud, un] = build_bracketing_operators(cp, 0.05);
  for (std::size_t i = 0; i < ud.potential.size(); ++i) EXPECT_LT(un.potential[i], ud.potential[i]);
}

TEST(Bracketing, RejectsStripWidthOutOfRange) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  EXPECT_THROW(build_bracketing_operators(cp, 0.0), ParameterError);
  EXPECT_THROW(build_bracketing_operators(cp, 1.0 / 3.0), ParameterError);
  EXPECT_NO_THROW(build_bracketing_operators(cp, 0.33));
}

TEST(Bracketing, MinMaxOrderingAtFixedKineticCoefficient) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto s = build_comparison_operator(cp);
  auto [ud, un] = build_bracketing_operators(cp, 0.05);
  ud.kinetic_coefficient = un.kinetic_coefficient = 1.0;
  auto ms = solve_periodic_spectrum(s, 8, 256);
  auto md = solve_periodic_spectrum(ud, 8, 256);
  auto mn = solve_periodic_spectrum(un, 8, 256);
  for (int j = 0; j < 8; ++j) {
    EXPECT_LE(mn.eigenvalues[j], ms.eigenvalues[j]);
    EXPECT_LE(ms.eigenvalues[j], md.eigenvalues[j]);
  }
}

TEST(EffectivePotential, BoundaryValueAndDisc) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  for (double s : {0.0, 0.4, 2.2, 5.9}) {
    const double g = cp.at(s);
    EXPECT_NEAR(effective_potential(cp, s, 0.0), -0.25 * g * g, 1e-12);
  }
  auto disc = profile(ParametricCurve::circle(1.0), 128);
  EXPECT_NEAR(effective_potential(disc, 1.3, 0.2), -0.390625, 1e-9);
  EXPECT_THROW(effective_potential(disc, 1.3, 1.0), SingularCoordinateError);
}

TEST(EffectivePotential, SqueezedBetweenSeparatedPotentials) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  for (double a : {0.05, 0.2, 0.3}) {
    auto [ud, un] = build_bracketing_operators(cp, a);
    for (std::size_t i = 0; i < cp.s_grid.size(); i += 3) {
      for (int k = 0; k <= 20; ++k) {
        const double u = a * k / 20.0;
        const double v = effective_potential(cp, cp.s_grid[i], u);
        EXPECT_LE(un.potential[i], v + 1e-12);
        EXPECT_LE(v, ud.potential[i] + 1e-12);
      }
    }
  }
}

TEST(MuConvergence, DiscErrorsAreLinearInStripWidth) {
  auto cp = profile(ParametricCurve::circle(1.0), 128);
  auto t = verify_mu_convergence(cp, 4, {0.02, 0.01, 0.005}, 64);
  ASSERT_EQ(t.rows.size(), 12u);
  for (const auto& ratios : {t.ratio_D, t.ratio_N})
    for (const auto& per_j : ratios)
      for (double r : per_j) {
        EXPECT_GE(r, 0.4);
        EXPECT_LE(r, 0.6);
      }
  // monotone decrease to zero as a shrinks
  for (const auto& row : t.rows) EXPECT_GT(row.err_D, 0.0);
  EXPECT_GT(t.fitted_constant, 0.0);
}

TEST(MuConvergence, EllipseConstantIsStable) {
  auto cp = profile(ParametricCurve::ellipse(1.5, 1.0));
  auto t = verify_mu_convergence(cp, 6, {0.02, 0.01, 0.005});
  const auto [lo, hi] = std::minmax_element(t.constant_per_a.begin(), t.constant_per_a.end());
  EXPECT_LE(*hi / *lo, 2.0);
  EXPECT_TRUE(std::isfinite(t.fitted_constant));
}
