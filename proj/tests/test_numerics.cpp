// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "robin/numerics.hpp"

using namespace robin::numerics;

TEST(PeriodicInterpolant, ReproducesTrigPolynomialAndDerivatives) {
  const double L = 3.0;
  const std::size_t n = 32;
  std::vector<double> f(n);
  auto exact = [&](double s) { return 1.0 + std::cos(kTwoPi * s / L) + 0.5 * std::sin(3 * kTwoPi * s / L); };
  for (std::size_t i = 0; i < n; ++i) f[i] = exact(L * i / n);
  PeriodicInterpolant p(f, L);
  for (double s : {0.1, 0.77, 2.9}) {
    EXPECT_NEAR(p(s), exact(s), 1e-13);
    const double w = kTwoPi / L;
    EXPECT_NEAR(p(s, 1), -w * std::sin(w * s) + 1.5 * w * std::cos(3 * w * s), 1e-12);
    EXPECT_NEAR(p(s, 2), -w * w * std::cos(w * s) - 4.5 * w * w * std::sin(3 * w * s), 1e-11);
  }
  EXPECT_NEAR(p.coefficient(0).real(), 1.0, 1e-14);
  EXPECT_NEAR(p.coefficient(1).real(), 0.5, 1e-14);
  EXPECT_NEAR(p.coefficient(-3).imag(), 0.25, 1e-14);
}

TEST(SpectralDerivative, MatchesAnalyticDerivative) {
  const std::size_t n = 64;
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = std::exp(std::sin(kTwoPi * i / n));
  auto d1 = spectral_derivative(f, 1.0, 1);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / n;
    EXPECT_NEAR(d1[i], kTwoPi * std::cos(kTwoPi * t) * f[i], 1e-9);
  }
}

TEST(GaussLegendre, IntegratesPolynomialsExactly) {
  auto r = gauss_legendre<7>(0.0, 2.0);
  double acc = 0.0;
  for (std::size_t i = 0; i < r.nodes.size(); ++i) acc += r.weights[i] * std::pow(r.nodes[i], 12);
  EXPECT_NEAR(acc, std::pow(2.0, 13) / 13.0, 1e-10);
  auto c = composite_gauss<10>(0.0, 1.0, 4);
  EXPECT_EQ(c.nodes.size(), 40u);
}

TEST(BracketedNewton, FindsRootOfMonotoneFunction) {
  const double r = bracketed_newton([](double x) { return x * x * x - 2.0; },
                                    [](double x) { return 3 * x * x; }, 0.0, 5.0);
  EXPECT_NEAR(r, std::cbrt(2.0), 1e-15);
  const double d = bracketed_newton([](double x) { return 1.0 - x; }, [](double) { return -1.0; },
                                    -3.0, 4.0);
  EXPECT_NEAR(d, 1.0, 1e-15);
}

TEST(RefineExtremum, RecoversParabolaVertex) {
  // samples of 1 - (x - 0.7)^2 at x = 0, 1, 2 (index i is x = i)
  std::vector<double> g{1.0 - 0.49, 1.0 - 0.09, 1.0 - 1.69, -3.0};
  auto [x, v] = refine_extremum(g, 1);
  EXPECT_NEAR(x, 0.7, 1e-14);
  EXPECT_NEAR(v, 1.0, 1e-14);
}
