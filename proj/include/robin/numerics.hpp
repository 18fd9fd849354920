// SPDX-License-Identifier: Apache-2.0
//
// Small numerical kernels shared by the modules: periodic spectral
// differentiation and interpolation, Gauss-Legendre panels, a safeguarded
// bracketed Newton iteration and three-point peak refinement.
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <unsupported/Eigen/FFT>

namespace robin::numerics {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Trigonometric interpolant of N uniform samples of an L-periodic real
/// function, evaluable (with derivatives) anywhere.
class PeriodicInterpolant {
 public:
  PeriodicInterpolant() = default;

  PeriodicInterpolant(std::span<const double> samples, double period)
      : period_(period), n_(samples.size()) {
    Eigen::FFT<double> fft;
    std::vector<double> in(samples.begin(), samples.end());
    std::vector<std::complex<double>> out;
    fft.fwd(out, in);
    coeffs_.assign(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n_ / 2 + 1));
  }

  [[nodiscard]] double period() const noexcept { return period_; }
  [[nodiscard]] std::size_t size() const noexcept { return n_; }

  /// Value of the `order`-th derivative at s.
  [[nodiscard]] double operator()(double s, int order = 0) const {
    const double w0 = kTwoPi / period_;
    double acc = order == 0 ? coeffs_[0].real() : 0.0;
    const std::size_t half = n_ / 2;
    const bool even = n_ % 2 == 0;
    for (std::size_t k = 1; k < coeffs_.size(); ++k) {
      const double w = w0 * static_cast<double>(k);
      std::complex<double> factor = std::pow(std::complex<double>(0.0, w), order);
      const std::complex<double> term =
          coeffs_[k] * factor * std::polar(1.0, w * s);
      if (even && k == half) {
        if (order % 2 == 1) continue;
        acc += term.real();
      } else {
        acc += 2.0 * term.real();
      }
    }
    return acc / static_cast<double>(n_);
  }

  /// Fourier coefficient of index m (any sign), normalised so that the
  /// interpolant equals sum_m c_m exp(2 pi i m s / L). Zero beyond Nyquist.
  [[nodiscard]] std::complex<double> coefficient(long m) const {
    const long half = static_cast<long>(n_ / 2);
    const long am = std::abs(m);
    if (am > half) return {0.0, 0.0};
    std::complex<double> c = coeffs_[static_cast<std::size_t>(am)] / static_cast<double>(n_);
    if (n_ % 2 == 0 && am == half) c *= 0.5;
    return m < 0 ? std::conj(c) : c;
  }

 private:
  double period_ = 1.0;
  std::size_t n_ = 0;
  std::vector<std::complex<double>> coeffs_;
};

/// `order`-th derivative of uniformly sampled L-periodic data, by FFT.
inline std::vector<double> spectral_derivative(std::span<const double> samples, double period,
                                               int order) {
  const std::size_t n = samples.size();
  Eigen::FFT<double> fft;
  std::vector<double> in(samples.begin(), samples.end());
  std::vector<std::complex<double>> spec;
  fft.fwd(spec, in);
  const double w0 = kTwoPi / period;
  for (std::size_t k = 0; k < n; ++k) {
    long m = static_cast<long>(k);
    if (k > n / 2) m -= static_cast<long>(n);
    if (n % 2 == 0 && k == n / 2 && order % 2 == 1) {
      spec[k] = 0.0;
      continue;
    }
    spec[k] *= std::pow(std::complex<double>(0.0, w0 * static_cast<double>(m)), order);
  }
  std::vector<double> out;
  fft.inv(out, spec);
  return out;
}

/// Nodes and weights of an N-point Gauss-Legendre rule mapped to [a, b].
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

template <int N>
QuadratureRule gauss_legendre(double a, double b) {
  using Rule = boost::math::quadrature::gauss<double, N>;
  const auto& x = Rule::abscissa();
  const auto& w = Rule::weights();
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  QuadratureRule rule;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] == 0.0) {
      rule.nodes.push_back(mid);
      rule.weights.push_back(half * w[i]);
      continue;
    }
    rule.nodes.push_back(mid - half * x[i]);
    rule.weights.push_back(half * w[i]);
    rule.nodes.push_back(mid + half * x[i]);
    rule.weights.push_back(half * w[i]);
  }
  return rule;
}

/// Composite Gauss-Legendre rule: `panels` equal panels of N points each.
template <int N>
QuadratureRule composite_gauss(double a, double b, int panels) {
  QuadratureRule out;
  const double h = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    auto r = gauss_legendre<N>(a + p * h, a + (p + 1) * h);
    out.nodes.insert(out.nodes.end(), r.nodes.begin(), r.nodes.end());
    out.weights.insert(out.weights.end(), r.weights.begin(), r.weights.end());
  }
  return out;
}

/// Root of f on [lo, hi] with f(lo) < 0 < f(hi) (or the reverse): bisection
/// down to `switch_width`, then Newton steps that fall back to bisection
/// whenever they leave the current bracket.
template <class F, class DF>
double bracketed_newton(F&& f, DF&& df, double lo, double hi, double switch_width = 1e-3,
                        double xtol = 1e-15, int max_iter = 400) {
  double flo = f(lo);
  const bool increasing = flo < 0.0;
  auto negative = [&](double v) { return increasing ? v < 0.0 : v > 0.0; };
  for (int it = 0; it < max_iter && hi - lo > switch_width; ++it) {
    const double mid = 0.5 * (lo + hi);
    (negative(f(mid)) ? lo : hi) = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < max_iter; ++it) {
    const double fx = f(x);
    if (fx == 0.0) return x;
    (negative(fx) ? lo : hi) = x;
    const double d = df(x);
    double next = x - fx / d;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= xtol * std::max(1.0, std::abs(x))) return next;
    x = next;
  }
  return x;
}

/// Vertex of the parabola through (i-1, i, i+1) of a periodic sample array.
/// Returns the refined fractional index and value.
inline std::pair<double, double> refine_extremum(std::span<const double> f, std::size_t i) {
  const std::size_t n = f.size();
  const double fm = f[(i + n - 1) % n];
  const double f0 = f[i];
  const double fp = f[(i + 1) % n];
  const double curv = fm - 2.0 * f0 + fp;
  if (std::abs(curv) < 1e-300 || !std::isfinite(curv)) return {static_cast<double>(i), f0};
  const double shift = 0.5 * (fm - fp) / curv;
  if (std::abs(shift) > 1.0) return {static_cast<double>(i), f0};
  return {static_cast<double>(i) + shift, f0 - 0.25 * (fm - fp) * shift};
}

}  // namespace robin::numerics
