// SPDX-License-Identifier: Apache-2.0
//
// Closed smooth boundary curves: analytic (circle, ellipse) or truncated
// Fourier series per coordinate, reparametrised by arc length with the
// clockwise orientation, so that the signed curvature
//   gamma = G1'' G2' - G2'' G1'
// is positive on convex domains and u >= 0 in Phi(s,u) points inwards.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "robin/error.hpp"
#include "robin/numerics.hpp"

namespace robin::geometry {

using Point = Eigen::Vector2d;

enum class CurveKind { circle, ellipse, fourier };

/// Periodic curve t in [0,1) -> R^2, each coordinate a trigonometric
/// polynomial  c0 + sum_k (a_k cos 2 pi k t + b_k sin 2 pi k t).
class ParametricCurve {
 public:
  struct Series {
    std::vector<double> cos;  // cos[0] is the constant term
    std::vector<double> sin;  // sin[0] is ignored
  };

  ParametricCurve(CurveKind kind, Series x, Series y, std::vector<double> params = {})
      : kind_(kind), x_(std::move(x)), y_(std::move(y)), params_(std::move(params)) {
    auto pad = [](Series& s) {
      const std::size_t n = std::max(s.cos.size(), s.sin.size());
      s.cos.resize(std::max<std::size_t>(n, 1), 0.0);
      s.sin.resize(std::max<std::size_t>(n, 1), 0.0);
    };
    pad(x_);
    pad(y_);
  }

  static ParametricCurve circle(double radius, Point center = Point::Zero()) {
    if (!(radius > 0.0)) throw DegenerateParametrizationError("circle radius must be positive");
    return {CurveKind::circle, {{center.x(), radius}, {0.0, 0.0}},
            {{center.y(), 0.0}, {0.0, radius}}, {radius}};
  }

  static ParametricCurve ellipse(double semi_x, double semi_y, Point center = Point::Zero()) {
    if (!(semi_x > 0.0 && semi_y > 0.0))
      throw DegenerateParametrizationError("ellipse semi-axes must be positive");
    return {CurveKind::ellipse, {{center.x(), semi_x}, {0.0, 0.0}},
            {{center.y(), 0.0}, {0.0, semi_y}}, {semi_x, semi_y}};
  }

  static ParametricCurve fourier(Series x, Series y) {
    return {CurveKind::fourier, std::move(x), std::move(y)};
  }

  [[nodiscard]] CurveKind kind() const noexcept { return kind_; }
  [[nodiscard]] const std::vector<double>& params() const noexcept { return params_; }
  [[nodiscard]] bool reversed() const noexcept { return reversed_; }

  /// d^order Gamma / dt^order at t.
  [[nodiscard]] Point derivative(double t, int order = 0) const {
    const double tt = reversed_ ? -t : t;
    const double sign = (reversed_ && order % 2 == 1) ? -1.0 : 1.0;
    return sign * Point(eval(x_, tt, order), eval(y_, tt, order));
  }

  [[nodiscard]] Point position(double t) const { return derivative(t, 0); }
  [[nodiscard]] double speed(double t) const { return derivative(t, 1).norm(); }

  /// Same point set traversed the other way.
  [[nodiscard]] ParametricCurve flipped() const {
    ParametricCurve c = *this;
    c.reversed_ = !reversed_;
    return c;
  }

  /// Dilation about the origin by `factor`.
  [[nodiscard]] ParametricCurve scaled(double factor) const {
    ParametricCurve c = *this;
    for (auto* s : {&c.x_, &c.y_}) {
      for (double& v : s->cos) v *= factor;
      for (double& v : s->sin) v *= factor;
    }
    for (double& p : c.params_) p *= factor;
    return c;
  }

  /// Positions on a uniform parameter grid of `n` points.
  [[nodiscard]] std::vector<Point> sample(std::size_t n) const {
    std::vector<Point> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = position(static_cast<double>(i) / n);
    return pts;
  }

 private:
  static double eval(const Series& s, double t, int order) {
    double acc = order == 0 ? s.cos[0] : 0.0;
    for (std::size_t k = 1; k < s.cos.size(); ++k) {
      const double w = numerics::kTwoPi * static_cast<double>(k);
      const double ph = w * t;
      // d^p/dt^p cos(w t) = w^p cos(w t + p pi/2), same shift for sin.
      const double shift = order * std::numbers::pi / 2.0;
      const double wp = std::pow(w, order);
      acc += wp * (s.cos[k] * std::cos(ph + shift) + s.sin[k] * std::sin(ph + shift));
    }
    return acc;
  }

  CurveKind kind_;
  Series x_;
  Series y_;
  std::vector<double> params_;
  bool reversed_ = false;
};

namespace detail {

inline double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Proper or touching intersection of closed segments [p1,p2] and [q1,q2].
inline bool segments_intersect(const Point& p1, const Point& p2, const Point& q1,
                               const Point& q2) {
  const double d1 = cross(p2 - p1, q1 - p1);
  const double d2 = cross(p2 - p1, q2 - p1);
  const double d3 = cross(q2 - q1, p1 - q1);
  const double d4 = cross(q2 - q1, p2 - q1);
  if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
    return true;
  auto on_segment = [](const Point& a, const Point& b, const Point& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
           std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y());
  };
  if (d1 == 0 && on_segment(p1, p2, q1)) return true;
  if (d2 == 0 && on_segment(p1, p2, q2)) return true;
  if (d3 == 0 && on_segment(q1, q2, p1)) return true;
  if (d4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

/// True if the closed polygon has two non-adjacent edges that meet.
inline bool polygon_self_intersects(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_intersect(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

inline double signed_area(const std::vector<Point>& pts) {
  double a = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) a += cross(pts[i], pts[(i + 1) % pts.size()]);
  return 0.5 * a;
}

}  // namespace detail

/// Unit-speed resampling of a ParametricCurve: N uniform arc-length samples
/// of Gamma and its first three s-derivatives.
class ArcLengthCurve {
 public:
  double length_L = 0.0;
  std::vector<double> s_grid;
  std::vector<Point> gamma_pos;
  std::vector<Point> gamma_d1;
  std::vector<Point> gamma_d2;
  std::vector<Point> gamma_d3;

  ArcLengthCurve(ParametricCurve curve, std::vector<double> cumulative)
      : curve_(std::move(curve)), cumulative_(std::move(cumulative)) {
    length_L = cumulative_.back();
  }

  [[nodiscard]] std::size_t size() const noexcept { return s_grid.size(); }
  [[nodiscard]] const ParametricCurve& parametric() const noexcept { return curve_; }

  /// Parameter t(s) for arbitrary s (taken modulo L).
  [[nodiscard]] double parameter_at(double s) const {
    s = wrap(s);
    const std::size_t cells = cumulative_.size() - 1;
    const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
    std::size_t c = static_cast<std::size_t>(std::distance(cumulative_.begin(), it));
    c = std::clamp<std::size_t>(c, 1, cells) - 1;
    const double h = 1.0 / static_cast<double>(cells);
    const double t0 = c * h;
    const double s0 = cumulative_[c];
    const double s1 = cumulative_[c + 1];
    // Cubic Hermite guess for t(s) with exact end slopes dt/ds = 1/speed.
    const double ds = s1 - s0;
    const double x = (s - s0) / ds;
    const double m0 = ds / curve_.speed(t0) / h;
    const double m1 = ds / curve_.speed(t0 + h) / h;
    const double h10 = x * (1 - x) * (1 - x);
    const double h01 = x * x * (3 - 2 * x), h11 = x * x * (x - 1);
    double t = t0 + h * (h10 * m0 + h01 + h11 * m1);
    for (int it_newton = 0; it_newton < 4; ++it_newton) {
      const double err = s0 + partial_length(t0, t) - s;
      const double dt = err / curve_.speed(t);
      t -= dt;
      if (std::abs(dt) < 1e-16) break;
    }
    return t;
  }

  [[nodiscard]] Point position(double s) const { return curve_.position(parameter_at(s)); }

  /// Unit tangent Gamma'(s).
  [[nodiscard]] Point tangent(double s) const {
    const Point d = curve_.derivative(parameter_at(s), 1);
    return d / d.norm();
  }

  /// Inward unit normal (G2', -G1') under the clockwise convention.
  [[nodiscard]] Point inward_normal(double s) const {
    const Point t = tangent(s);
    return {t.y(), -t.x()};
  }

  [[nodiscard]] double wrap(double s) const {
    double r = std::fmod(s, length_L);
    if (r < 0) r += length_L;
    return r;
  }

  /// Arc length between parameters a <= b inside one cell.
  [[nodiscard]] double partial_length(double a, double b) const {
    return boost::math::quadrature::gauss<double, 30>::integrate(
        [&](double t) { return curve_.speed(t); }, a, b);
  }

 private:
  ParametricCurve curve_;
  std::vector<double> cumulative_;  // arc length at t = k / cells
};

struct CurvatureProfile {
  double length_L = 0.0;
  std::vector<double> s_grid;
  std::vector<double> gamma;
  std::vector<double> gamma_d1;  // d gamma / ds
  std::vector<double> gamma_d2;  // d^2 gamma / ds^2
  double gamma_star = 0.0;       // max gamma
  double gamma_lowstar = 0.0;    // min gamma
  double gamma_plus = 0.0;       // max |gamma|
  double gamma_d1_plus = 0.0;    // max |gamma'|
  double gamma_d2_plus = 0.0;    // max |gamma''|
  double s_star = 0.0;           // a maximiser of gamma
  numerics::PeriodicInterpolant interpolant;

  [[nodiscard]] double at(double s, int order = 0) const { return interpolant(s, order); }
};

/// Arc-length reparametrisation with automatic re-orientation to the
/// clockwise (positive total curvature) convention.
inline ArcLengthCurve reparametrize_arclength(const ParametricCurve& input, std::size_t n_samples) {
  if (n_samples < 64) throw DegenerateParametrizationError("need at least 64 samples");

  const std::size_t probe = 4 * n_samples;
  double mean_speed = 0.0;
  double min_speed = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < probe; ++i) {
    const double v = input.speed(static_cast<double>(i) / probe);
    mean_speed += v / probe;
    min_speed = std::min(min_speed, v);
  }
  if (!(min_speed > 1e-12 * mean_speed)) throw DegenerateParametrizationError("vanishing speed");

  auto polygon = input.sample(2 * n_samples);
  if (detail::polygon_self_intersects(polygon))
    throw SelfIntersectionError("boundary curve is not simple at sample resolution");

  // Clockwise traversal has negative signed area.
  ParametricCurve curve = detail::signed_area(polygon) > 0.0 ? input.flipped() : input;

  const std::size_t cells = n_samples;
  std::vector<double> cumulative(cells + 1, 0.0);
  for (std::size_t c = 0; c < cells; ++c) {
    const double a = static_cast<double>(c) / cells;
    const double b = static_cast<double>(c + 1) / cells;
    cumulative[c + 1] = cumulative[c] + boost::math::quadrature::gauss<double, 30>::integrate(
                                            [&](double t) { return curve.speed(t); }, a, b);
  }

  ArcLengthCurve alc(curve, std::move(cumulative));
  const double L = alc.length_L;
  alc.s_grid.resize(n_samples);
  alc.gamma_pos.resize(n_samples);
  alc.gamma_d1.resize(n_samples);
  alc.gamma_d2.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    const double s = L * static_cast<double>(i) / n_samples;
    const double t = alc.parameter_at(s);
    const Point xt = curve.derivative(t, 1);
    const Point xtt = curve.derivative(t, 2);
    const double sigma = xt.norm();
    const Point T = xt / sigma;
    alc.s_grid[i] = s;
    alc.gamma_pos[i] = curve.position(t);
    alc.gamma_d1[i] = T;
    alc.gamma_d2[i] = (xtt - xtt.dot(T) * T) / (sigma * sigma);
  }
  std::vector<double> c1(n_samples), c2(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) {
    c1[i] = alc.gamma_d2[i].x();
    c2[i] = alc.gamma_d2[i].y();
  }
  const auto d1 = numerics::spectral_derivative(c1, L, 1);
  const auto d2 = numerics::spectral_derivative(c2, L, 1);
  alc.gamma_d3.resize(n_samples);
  for (std::size_t i = 0; i < n_samples; ++i) alc.gamma_d3[i] = {d1[i], d2[i]};
  return alc;
}

namespace detail {

/// Grid extremum of `f` refined by a parabola; returns (location s, value).
inline std::pair<double, double> refined_max(const std::vector<double>& f, double L) {
  const auto it = std::max_element(f.begin(), f.end());
  const auto i = static_cast<std::size_t>(std::distance(f.begin(), it));
  const auto [x, v] = numerics::refine_extremum(f, i);
  return {L * x / static_cast<double>(f.size()), v};
}

}  // namespace detail

inline CurvatureProfile signed_curvature(const ArcLengthCurve& alc) {
  CurvatureProfile cp;
  const std::size_t n = alc.size();
  cp.length_L = alc.length_L;
  cp.s_grid = alc.s_grid;
  cp.gamma.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Point& d1 = alc.gamma_d1[i];
    const Point& d2 = alc.gamma_d2[i];
    cp.gamma[i] = d2.x() * d1.y() - d2.y() * d1.x();
  }
  cp.gamma_d1 = numerics::spectral_derivative(cp.gamma, cp.length_L, 1);
  cp.gamma_d2 = numerics::spectral_derivative(cp.gamma, cp.length_L, 2);
  cp.interpolant = numerics::PeriodicInterpolant(cp.gamma, cp.length_L);

  const auto [s_max, g_max] = detail::refined_max(cp.gamma, cp.length_L);
  std::vector<double> neg(n);
  std::transform(cp.gamma.begin(), cp.gamma.end(), neg.begin(), [](double g) { return -g; });
  const auto [s_min, g_negmin] = detail::refined_max(neg, cp.length_L);
  cp.s_star = s_max;
  cp.gamma_star = std::max(g_max, *std::max_element(cp.gamma.begin(), cp.gamma.end()));
  cp.gamma_lowstar = std::min(-g_negmin, *std::min_element(cp.gamma.begin(), cp.gamma.end()));
  cp.gamma_plus = std::max(std::abs(cp.gamma_star), std::abs(cp.gamma_lowstar));

  auto abs_max = [&](const std::vector<double>& f) {
    std::vector<double> a(f.size());
    std::transform(f.begin(), f.end(), a.begin(), [](double v) { return std::abs(v); });
    return std::max(detail::refined_max(a, cp.length_L).second,
                    *std::max_element(a.begin(), a.end()));
  };
  cp.gamma_d1_plus = abs_max(cp.gamma_d1);
  cp.gamma_d2_plus = abs_max(cp.gamma_d2);
  return cp;
}

/// Phi(s,u) = (G1(s) + u G2'(s), G2(s) - u G1'(s)).
inline Point map_phi(const ArcLengthCurve& alc, double s, double u) {
  return alc.position(s) + u * alc.inward_normal(s);
}

/// Largest strip half-width on which the normal map stays injective
/// (sampled), capped at the focal distance 1/gamma_+, times 0.95.
inline double tubular_halfwidth(const ArcLengthCurve& alc, const CurvatureProfile& cp) {
  const std::size_t n = std::max<std::size_t>(alc.size(), 256);
  std::vector<Point> base(n), normal(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = alc.length_L * static_cast<double>(i) / n;
    base[i] = alc.position(s);
    normal[i] = alc.inward_normal(s);
  }
  auto injective = [&](double a) {
    for (std::size_t i = 0; i < n; ++i) {
      const Point pi2 = base[i] + a * normal[i];
      for (std::size_t j = i + 2; j < n; ++j) {
        if (i == 0 && j == n - 1) continue;
        if (detail::segments_intersect(base[i], pi2, base[j], base[j] + a * normal[j]))
          return false;
      }
    }
    return true;
  };

  double diameter = 0.0;
  for (const Point& p : base) diameter = std::max(diameter, (p - base[0]).norm());
  double hi = cp.gamma_plus > 0.0 ? 1.0 / cp.gamma_plus : diameter;
  double width;
  if (injective(hi * (1.0 - 1e-6))) {
    width = hi;
  } else {
    double lo = 0.0;
    for (int it = 0; it < 50; ++it) {
      const double mid = 0.5 * (lo + hi);
      (injective(mid) ? lo : hi) = mid;
    }
    width = lo;
  }
  const double a1 = 0.95 * width;
  if (a1 < 1e-6 * alc.length_L)
    throw TubularWidthError("tubular half-width below 1e-6 L; domain is needle-like");
  return a1;
}

}  // namespace robin::geometry
