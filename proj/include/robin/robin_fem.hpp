// SPDX-License-Identifier: Apache-2.0
//
// Finite-element approximation of the negative Robin eigenvalues
//   -Delta f = lambda f in Omega,  d_n f = beta f on Gamma   (n outward)
// i.e. the generalized problem (K - beta B) v = lambda M v, on star-shaped
// domains meshed along rays from the centroid, graded towards Gamma.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "robin/eigen_result.hpp"
#include "robin/error.hpp"
#include "robin/geometry.hpp"

namespace robin::fem {

using geometry::Point;
using SpMat = Eigen::SparseMatrix<double>;

/// One ring of the polar-like mesh: nodes c + rho (Gamma(s_j) - c), j < n.
struct Ring {
  double rho = 1.0;
  int n = 0;
};

struct Grading {
  double first_layer = 0.0;  // physical thickness of the outermost layer
  double ratio = 1.4;
  double depth = 0.0;        // boundary-layer depth
};

struct BoundaryEdge {
  int a = 0, b = 0;  // node indices, b follows a along increasing s
  double s_a = 0.0, s_b = 0.0;
  double length = 0.0;  // arc length
};

struct Mesh2D {
  std::vector<Point> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<BoundaryEdge> boundary_edges;   // closed cycle, s increasing
  Grading grading_params;

  // P2 data: unique edges, their isoparametric midpoints, and per-triangle
  // edge ids in the order (v0 v1), (v1 v2), (v2 v0).
  std::vector<std::array<int, 2>> edges;
  std::vector<Point> edge_midpoints;
  std::vector<std::array<int, 3>> triangle_edges;

  // construction data, kept for uniform refinement
  Point center = Point::Zero();
  std::vector<Ring> rings;  // rings[0] is Gamma
  double length_L = 0.0;

  [[nodiscard]] std::string id() const {
    return "Nb=" + std::to_string(rings.empty() ? 0 : rings.front().n) +
           ",rings=" + std::to_string(rings.size()) + ",triangles=" + std::to_string(triangles.size());
  }
};

struct MeshOptions {
  double target_h = 0.05;
  double first_layer_factor = 0.2;  // first layer = factor / beta
  double ratio = 1.4;
  int layers = 0;       // > 0: at least this many graded layers inside the depth
  double a1 = -1.0;     // tubular half-width; computed when negative
};

namespace detail {

inline Point area_centroid(const std::vector<Point>& pts) {
  double a = 0.0;
  Point c = Point::Zero();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const Point& q = pts[(i + 1) % pts.size()];
    const double w = geometry::detail::cross(p, q);
    a += w;
    c += w * (p + q);
  }
  return c / (3.0 * a);
}

inline std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

/// Ring radii and counts from the boundary inwards.
inline std::vector<Ring> plan_rings(double L, double beta, double p_min, double p_max, double r_max,
                                    const MeshOptions& opt, Grading& g) {
  if (!(opt.target_h > 0.0) || !(opt.target_h < L / 16.0))
    throw ParameterError("target_h must lie in (0, L/16)");
  const double b = std::max(beta, 1.0);
  g.first_layer = opt.first_layer_factor / b;
  g.depth = std::min(opt.a1, 6.0 / b * std::max(1.0, std::log(b)));
  g.ratio = opt.ratio;
  if (opt.layers > 0) {
    // smallest ratio <= opt.ratio for which `layers` layers reach the depth
    auto reach = [&](double r) {
      return r == 1.0 ? g.first_layer * opt.layers
                      : g.first_layer * (std::pow(r, opt.layers) - 1.0) / (r - 1.0);
    };
    if (reach(1.0) >= g.depth) {
      g.ratio = 1.0;
    } else if (reach(opt.ratio) > g.depth) {
      double lo = 1.0, hi = opt.ratio;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (reach(mid) < g.depth ? lo : hi) = mid;
      }
      g.ratio = hi;
    }
  }

  int nb = 8;
  while (L / nb > opt.target_h) nb *= 2;
  std::vector<Ring> rings{{1.0, nb}};
  const double rho_layer = 1.0 - g.depth / p_min;  // inside this, no coarsening
  double t = g.first_layer;
  double rho = 1.0;
  int n = nb;
  for (;;) {
    const double step = std::min(t, opt.target_h) / p_max;
    if (rho - step < 0.5 * step) break;
    rho -= step;
    if (rho < rho_layer && n / 2 >= 8 && 2.0 * rho * L / n <= 1.5 * opt.target_h) n /= 2;
    rings.push_back({rho, n});
    t *= g.ratio;
  }
  return rings;
}

}  // namespace detail

/// Builds the mesh described by `rings` (rings[0] = Gamma, rho = 1).
inline Mesh2D build_mesh(const geometry::ArcLengthCurve& alc, const Point& c, std::vector<Ring> rings,
                         const Grading& grading) {
  Mesh2D mesh;
  mesh.center = c;
  mesh.rings = rings;
  mesh.grading_params = grading;
  mesh.length_L = alc.length_L;
  const int nb = rings.front().n;
  const int units = 4 * nb;  // s is stored as an integer multiple of L / units
  std::vector<Point> g(static_cast<std::size_t>(units));
  for (int k = 0; k < units; ++k) g[static_cast<std::size_t>(k)] = alc.position(alc.length_L * k / units);

  struct Param {
    int k;  // -1 at the center
    double rho;
  };
  std::vector<Param> param;
  auto place = [&](const Param& p) -> Point {
    if (p.k < 0) return c;
    return c + p.rho * (g[static_cast<std::size_t>(p.k)] - c);
  };

  std::vector<int> first;  // first node index of each ring
  for (const Ring& r : rings) {
    if (r.n < 8 || nb % r.n != 0) throw ParameterError("ring counts must divide the boundary count");
    first.push_back(static_cast<int>(param.size()));
    const int step = units / r.n;
    for (int j = 0; j < r.n; ++j) param.push_back({j * step, r.rho});
  }
  const int center_node = static_cast<int>(param.size());
  param.push_back({-1, 0.0});
  for (const Param& p : param) mesh.nodes.push_back(place(p));

  auto node = [&](std::size_t ring, int j) {
    const int n = rings[ring].n;
    return first[ring] + ((j % n) + n) % n;
  };
  auto add = [&](int a, int b, int d) {
    const double area = geometry::detail::cross(mesh.nodes[b] - mesh.nodes[a], mesh.nodes[d] - mesh.nodes[a]);
    if (area < 0.0) std::swap(b, d);
    mesh.triangles.push_back({a, b, d});
  };
  for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
    const int n_out = rings[r].n, n_in = rings[r + 1].n;
    if (n_in == n_out) {
      for (int j = 0; j < n_out; ++j) {
        add(node(r, j), node(r, j + 1), node(r + 1, j + 1));
        add(node(r, j), node(r + 1, j + 1), node(r + 1, j));
      }
    } else if (2 * n_in == n_out) {
      for (int i = 0; i < n_in; ++i) {
        add(node(r, 2 * i), node(r, 2 * i + 1), node(r + 1, i));
        add(node(r, 2 * i + 1), node(r, 2 * i + 2), node(r + 1, i + 1));
        add(node(r, 2 * i + 1), node(r + 1, i + 1), node(r + 1, i));
      }
    } else {
      throw ParameterError("adjacent rings may differ by a factor of two at most");
    }
  }
  const std::size_t last = rings.size() - 1;
  for (int j = 0; j < rings[last].n; ++j) add(center_node, node(last, j), node(last, j + 1));

  // edges and P2 midpoints from the parametric midpoint
  std::unordered_map<std::uint64_t, int> edge_id;
  auto midpoint = [&](int a, int b) -> Point {
    Param pa = param[static_cast<std::size_t>(a)], pb = param[static_cast<std::size_t>(b)];
    if (pa.k < 0) pa.k = pb.k;
    if (pb.k < 0) pb.k = pa.k;
    if (std::abs(pa.k - pb.k) > units / 2) (pa.k < pb.k ? pa.k : pb.k) += units;
    return place({((pa.k + pb.k) / 2) % units, 0.5 * (pa.rho + pb.rho)});
  };
  for (const auto& t : mesh.triangles) {
    std::array<int, 3> te{};
    for (int e = 0; e < 3; ++e) {
      const int a = t[static_cast<std::size_t>(e)], b = t[static_cast<std::size_t>((e + 1) % 3)];
      const auto key = detail::edge_key(a, b);
      auto it = edge_id.find(key);
      if (it == edge_id.end()) {
        it = edge_id.emplace(key, static_cast<int>(mesh.edges.size())).first;
        mesh.edges.push_back({std::min(a, b), std::max(a, b)});
        mesh.edge_midpoints.push_back(midpoint(a, b));
      }
      te[static_cast<std::size_t>(e)] = it->second;
    }
    mesh.triangle_edges.push_back(te);
  }

  const double ds = alc.length_L / nb;
  for (int j = 0; j < nb; ++j)
    mesh.boundary_edges.push_back({j, (j + 1) % nb, j * ds, (j + 1) * ds, ds});
  return mesh;
}

/// Star-shaped check about the area centroid: Gamma - c must cross every
/// unit tangent with one sign (negative under the clockwise convention).
inline Point star_center(const geometry::ArcLengthCurve& alc, double& p_min, double& p_max,
                         double& r_max) {
  const std::size_t n = std::max<std::size_t>(4 * alc.size(), 1024);
  std::vector<Point> pts(n), tan(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double s = alc.length_L * static_cast<double>(i) / n;
    pts[i] = alc.position(s);
    tan[i] = alc.tangent(s);
  }
  const Point c = detail::area_centroid(pts);
  p_min = 1e300;
  p_max = 0.0;
  r_max = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = -geometry::detail::cross(pts[i] - c, tan[i]);
    p_min = std::min(p_min, p);
    p_max = std::max(p_max, p);
    r_max = std::max(r_max, (pts[i] - c).norm());
  }
  if (!(p_min > 1e-8 * r_max))
    throw UnsupportedGeometryError("domain is not star-shaped with respect to its centroid");
  return c;
}

inline Mesh2D mesh_domain(const geometry::ArcLengthCurve& alc, double beta, const MeshOptions& opt) {
  double p_min = 0, p_max = 0, r_max = 0;
  const Point c = star_center(alc, p_min, p_max, r_max);
  MeshOptions o = opt;
  if (o.a1 <= 0.0) o.a1 = geometry::tubular_halfwidth(alc, geometry::signed_curvature(alc));
  Grading g;
  auto rings = detail::plan_rings(alc.length_L, beta, p_min, p_max, r_max, o, g);
  return build_mesh(alc, c, std::move(rings), g);
}

/// Halves every mesh width: doubles ring counts and inserts a ring between
/// consecutive rings (and between the innermost ring and the center).
inline Mesh2D refine_uniform(const geometry::ArcLengthCurve& alc, const Mesh2D& mesh) {
  std::vector<Ring> out;
  const auto& r = mesh.rings;
  for (std::size_t k = 0; k < r.size(); ++k) {
    if (k > 0) out.push_back({0.5 * (r[k - 1].rho + r[k].rho), 2 * r[k - 1].n});
    out.push_back({r[k].rho, 2 * r[k].n});
  }
  out.push_back({0.5 * r.back().rho, 2 * r.back().n});
  Grading g = mesh.grading_params;
  g.first_layer *= 0.5;
  return build_mesh(alc, mesh.center, std::move(out), g);
}

struct MeshAudit {
  bool positive_orientation = true;
  bool conforming = true;         // interior edges shared by 2 triangles, boundary by 1
  bool boundary_cycle = true;     // boundary edges form one closed cycle
  bool s_increasing = true;
  double boundary_deviation = 0.0;  // max distance of boundary nodes/midpoints from Gamma
  double min_area = 0.0;
  int euler_characteristic = 0;
  [[nodiscard]] bool ok() const {
    return positive_orientation && conforming && boundary_cycle && s_increasing &&
           boundary_deviation <= 1e-10 && euler_characteristic == 1;
  }
};

inline MeshAudit audit_mesh(const Mesh2D& mesh, const geometry::ArcLengthCurve& alc) {
  MeshAudit a;
  a.min_area = 1e300;
  for (const auto& t : mesh.triangles) {
    const double area = 0.5 * geometry::detail::cross(mesh.nodes[t[1]] - mesh.nodes[t[0]],
                                              mesh.nodes[t[2]] - mesh.nodes[t[0]]);
    a.min_area = std::min(a.min_area, area);
    if (!(area > 0.0)) a.positive_orientation = false;
  }
  std::vector<int> use(mesh.edges.size(), 0);
  for (const auto& te : mesh.triangle_edges)
    for (int e : te) ++use[static_cast<std::size_t>(e)];
  std::unordered_map<std::uint64_t, int> edge_id;
  for (std::size_t e = 0; e < mesh.edges.size(); ++e)
    edge_id[detail::edge_key(mesh.edges[e][0], mesh.edges[e][1])] = static_cast<int>(e);
  std::vector<bool> on_boundary(mesh.edges.size(), false);
  for (const auto& be : mesh.boundary_edges) {
    auto it = edge_id.find(detail::edge_key(be.a, be.b));
    if (it == edge_id.end()) {
      a.conforming = false;
      continue;
    }
    on_boundary[static_cast<std::size_t>(it->second)] = true;
    const Point mid = alc.position(0.5 * (be.s_a + be.s_b));
    a.boundary_deviation = std::max(
        {a.boundary_deviation, (mesh.nodes[be.a] - alc.position(be.s_a)).norm(),
         (mesh.edge_midpoints[static_cast<std::size_t>(it->second)] - mid).norm()});
  }
  for (std::size_t e = 0; e < use.size(); ++e)
    if (use[e] != (on_boundary[e] ? 1 : 2)) a.conforming = false;
  const auto& be = mesh.boundary_edges;
  for (std::size_t i = 0; i < be.size(); ++i) {
    const auto& nx = be[(i + 1) % be.size()];
    if (be[i].b != nx.a) a.boundary_cycle = false;
    if (i + 1 < be.size() && !(nx.s_a > be[i].s_a)) a.s_increasing = false;
  }
  a.euler_characteristic = static_cast<int>(mesh.nodes.size()) - static_cast<int>(mesh.edges.size()) +
                           static_cast<int>(mesh.triangles.size());
  return a;
}

// ---------------------------------------------------------------- assembly

struct AssembledForms {
  SpMat K, M, B;
  int dof_count = 0;
  int order = 2;
  std::vector<Point> dof_positions;
  std::vector<bool> boundary_dof;
  std::string mesh_id;
};

namespace detail {

struct TriRule {
  std::vector<std::array<double, 2>> pts;  // (xi, eta) on the unit right triangle
  std::vector<double> w;                   // sums to 1/2
};

/// Symmetric 12-point rule, exact through degree 6.
inline const TriRule& rule_degree6() {
  static const TriRule r = [] {
    TriRule out;
    auto orbit3 = [&](double a, double b, double w) {
      const double bc[3][3] = {{a, b, b}, {b, a, b}, {b, b, a}};
      for (const auto& p : bc) {
        out.pts.push_back({p[1], p[2]});
        out.w.push_back(0.5 * w);
      }
    };
    auto orbit6 = [&](double a, double b, double c, double w) {
      const double bc[6][3] = {{a, b, c}, {a, c, b}, {b, a, c}, {b, c, a}, {c, a, b}, {c, b, a}};
      for (const auto& p : bc) {
        out.pts.push_back({p[1], p[2]});
        out.w.push_back(0.5 * w);
      }
    };
    orbit3(0.501426509658179, 0.249286745170910, 0.116786275726379);
    orbit3(0.873821971016996, 0.063089014491502, 0.050844906370207);
    orbit6(0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
    return out;
  }();
  return r;
}

/// Three interior points, exact through degree 2.
inline const TriRule& rule_degree2() {
  static const TriRule r{{{1.0 / 6, 1.0 / 6}, {2.0 / 3, 1.0 / 6}, {1.0 / 6, 2.0 / 3}},
                         {1.0 / 6, 1.0 / 6, 1.0 / 6}};
  return r;
}

/// Shape functions and reference gradients of P1 (3) or P2 (6) at (xi, eta).
inline void shape(int order, double x, double y, double* N, double (*dN)[2]) {
  const double l1 = 1.0 - x - y, l2 = x, l3 = y;
  if (order == 1) {
    N[0] = l1, N[1] = l2, N[2] = l3;
    dN[0][0] = -1, dN[0][1] = -1;
    dN[1][0] = 1, dN[1][1] = 0;
    dN[2][0] = 0, dN[2][1] = 1;
    return;
  }
  const double d1[2] = {-1, -1}, d2[2] = {1, 0}, d3[2] = {0, 1};
  N[0] = l1 * (2 * l1 - 1);
  N[1] = l2 * (2 * l2 - 1);
  N[2] = l3 * (2 * l3 - 1);
  N[3] = 4 * l1 * l2;
  N[4] = 4 * l2 * l3;
  N[5] = 4 * l3 * l1;
  for (int c = 0; c < 2; ++c) {
    dN[0][c] = (4 * l1 - 1) * d1[c];
    dN[1][c] = (4 * l2 - 1) * d2[c];
    dN[2][c] = (4 * l3 - 1) * d3[c];
    dN[3][c] = 4 * (l1 * d2[c] + l2 * d1[c]);
    dN[4][c] = 4 * (l2 * d3[c] + l3 * d2[c]);
    dN[5][c] = 4 * (l3 * d1[c] + l1 * d3[c]);
  }
}

}  // namespace detail

inline AssembledForms assemble(const Mesh2D& mesh, int order) {
  if (order != 1 && order != 2) throw ParameterError("element order must be 1 or 2");
  const int nv = static_cast<int>(mesh.nodes.size());
  AssembledForms f;
  f.order = order;
  f.mesh_id = mesh.id() + ",P" + std::to_string(order);
  f.dof_count = order == 1 ? nv : nv + static_cast<int>(mesh.edges.size());
  f.dof_positions = mesh.nodes;
  if (order == 2)
    f.dof_positions.insert(f.dof_positions.end(), mesh.edge_midpoints.begin(), mesh.edge_midpoints.end());
  f.boundary_dof.assign(static_cast<std::size_t>(f.dof_count), false);

  const auto& rule = order == 1 ? detail::rule_degree2() : detail::rule_degree6();
  const int nl = order == 1 ? 3 : 6;
  std::vector<Eigen::Triplet<double>> tk, tm, tb;
  tk.reserve(mesh.triangles.size() * static_cast<std::size_t>(nl * nl));
  tm.reserve(tk.capacity());

  double N[6], dN[6][2];
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    int dofs[6];
    Point x[6];
    for (int a = 0; a < 3; ++a) {
      dofs[a] = t[static_cast<std::size_t>(a)];
      x[a] = mesh.nodes[static_cast<std::size_t>(dofs[a])];
    }
    if (order == 2)
      for (int a = 0; a < 3; ++a) {
        const int id = mesh.triangle_edges[e][static_cast<std::size_t>(a)];
        dofs[3 + a] = nv + id;
        x[3 + a] = mesh.edge_midpoints[static_cast<std::size_t>(id)];
      }
    Eigen::Matrix<double, 6, 6> ke = Eigen::Matrix<double, 6, 6>::Zero();
    Eigen::Matrix<double, 6, 6> me = Eigen::Matrix<double, 6, 6>::Zero();
    for (std::size_t q = 0; q < rule.w.size(); ++q) {
      detail::shape(order, rule.pts[q][0], rule.pts[q][1], N, dN);
      Eigen::Matrix2d J = Eigen::Matrix2d::Zero();
      for (int a = 0; a < nl; ++a)
        for (int r = 0; r < 2; ++r)
          for (int c = 0; c < 2; ++c) J(r, c) += x[a](r) * dN[a][c];
      const double det = J.determinant();
      if (!(det > 0.0)) throw AssemblyError("degenerate or inverted element " + std::to_string(e));
      const Eigen::Matrix2d Jit = J.inverse().transpose();
      Eigen::Matrix<double, 2, 6> G;
      for (int a = 0; a < nl; ++a) G.col(a) = Jit * Eigen::Vector2d(dN[a][0], dN[a][1]);
      const double w = rule.w[q] * det;
      for (int a = 0; a < nl; ++a)
        for (int b = 0; b < nl; ++b) {
          ke(a, b) += w * G.col(a).dot(G.col(b));
          me(a, b) += w * N[a] * N[b];
        }
    }
    for (int a = 0; a < nl; ++a)
      for (int b = 0; b < nl; ++b) {
        tk.emplace_back(dofs[a], dofs[b], ke(a, b));
        tm.emplace_back(dofs[a], dofs[b], me(a, b));
      }
  }

  // boundary mass in arc length: ds = length * dxi on each edge
  std::unordered_map<std::uint64_t, int> edge_id;
  if (order == 2)
    for (std::size_t e = 0; e < mesh.edges.size(); ++e)
      edge_id[detail::edge_key(mesh.edges[e][0], mesh.edges[e][1])] = static_cast<int>(e);
  for (const auto& be : mesh.boundary_edges) {
    if (order == 1) {
      const int d[2] = {be.a, be.b};
      const double m[2][2] = {{2, 1}, {1, 2}};
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) tb.emplace_back(d[i], d[j], be.length * m[i][j] / 6.0);
      f.boundary_dof[static_cast<std::size_t>(be.a)] = true;
    } else {
      const int mid = nv + edge_id.at(detail::edge_key(be.a, be.b));
      const int d[3] = {be.a, mid, be.b};
      const double m[3][3] = {{4, 2, -1}, {2, 16, 2}, {-1, 2, 4}};
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) tb.emplace_back(d[i], d[j], be.length * m[i][j] / 30.0);
      f.boundary_dof[static_cast<std::size_t>(be.a)] = true;
      f.boundary_dof[static_cast<std::size_t>(mid)] = true;
    }
  }
  f.K.resize(f.dof_count, f.dof_count);
  f.M.resize(f.dof_count, f.dof_count);
  f.B.resize(f.dof_count, f.dof_count);
  f.K.setFromTriplets(tk.begin(), tk.end());
  f.M.setFromTriplets(tm.begin(), tm.end());
  f.B.setFromTriplets(tb.begin(), tb.end());
  return f;
}

/// Removes the listed dofs (homogeneous Dirichlet constraints).
inline AssembledForms constrain_dofs(const AssembledForms& f, const std::vector<int>& fixed) {
  std::vector<int> map(static_cast<std::size_t>(f.dof_count), 0);
  for (int d : fixed) map[static_cast<std::size_t>(d)] = -1;
  int next = 0;
  for (auto& m : map) m = m < 0 ? -1 : next++;
  auto restrict_matrix = [&](const SpMat& A) {
    std::vector<Eigen::Triplet<double>> t;
    for (int k = 0; k < A.outerSize(); ++k)
      for (SpMat::InnerIterator it(A, k); it; ++it) {
        const int r = map[static_cast<std::size_t>(it.row())], c = map[static_cast<std::size_t>(it.col())];
        if (r >= 0 && c >= 0) t.emplace_back(r, c, it.value());
      }
    SpMat out(next, next);
    out.setFromTriplets(t.begin(), t.end());
    return out;
  };
  AssembledForms g;
  g.order = f.order;
  g.dof_count = next;
  g.mesh_id = f.mesh_id + ",constrained";
  g.K = restrict_matrix(f.K);
  g.M = restrict_matrix(f.M);
  g.B = restrict_matrix(f.B);
  for (int d = 0; d < f.dof_count; ++d)
    if (map[static_cast<std::size_t>(d)] >= 0) {
      g.dof_positions.push_back(f.dof_positions[static_cast<std::size_t>(d)]);
      g.boundary_dof.push_back(f.boundary_dof[static_cast<std::size_t>(d)]);
    }
  return g;
}

// ------------------------------------------------------------------- solver

struct SolveInfo {
  double shift = 0.0;
  int shift_retries = 0;
  int operator_applications = 0;
  std::vector<double> residuals;  // ||(K - beta B) x - lambda M x|| / ||x||_M
  Eigen::MatrixXd vectors;        // M-orthonormal eigenvectors (columns)
};

/// The n lowest eigenvalues of (K - beta B) v = lambda M v by a restarted
/// block Krylov iteration on (K - beta B - sigma M)^{-1} M in the M inner
/// product, sigma = -(beta + gamma_star/2)^2 lowered until the shifted matrix
/// is positive definite.
inline EigenResult solve_negative_spectrum(const AssembledForms& f, double beta, int n,
                                           double gamma_star, SolveInfo* info = nullptr) {
  if (n < 1 || n > 12) throw ParameterError("n must lie in [1, 12]");
  const int N = f.dof_count;
  if (N < 4 * n) throw ParameterError("too few degrees of freedom");
  const SpMat A = f.K - beta * f.B;
  const SpMat& M = f.M;

  double sigma = -std::pow(beta + 0.5 * gamma_star, 2);
  Eigen::SimplicialLDLT<SpMat> ldlt;
  int retries = 0;
  ldlt.analyzePattern(A);
  for (;; ++retries) {
    if (retries > 200) throw IterationError("no admissible shift found");
    ldlt.factorize(A - sigma * M);
    if (ldlt.info() == Eigen::Success && ldlt.vectorD().minCoeff() > 0.0) break;
    sigma = std::abs(sigma) > 1.0 ? sigma * (1.0 + 1e-3) : sigma - 1e-3;
  }

  const int bsz = std::min(4, N);
  const int m_max = std::min(N, std::max(2 * n + 4 * bsz, 48));
  Eigen::MatrixXd V(N, m_max), Y(N, m_max);
  int cols = 0, applications = 0;
  auto apply_T = [&](const Eigen::VectorXd& x) {
    ++applications;
    return Eigen::VectorXd(ldlt.solve(M * x));
  };
  // M-orthonormalise w against V[:, :cols] and append with T w.
  auto append = [&](Eigen::VectorXd w) {
    const double w0 = std::sqrt(w.dot(M * w));
    for (int pass = 0; pass < 2; ++pass) {
      const Eigen::VectorXd Mw = M * w;
      w -= V.leftCols(cols) * (V.leftCols(cols).transpose() * Mw);
    }
    const double nw = std::sqrt(w.dot(M * w));
    if (!(nw > 1e-10 * w0)) return false;
    V.col(cols) = w / nw;
    Y.col(cols) = apply_T(V.col(cols));
    ++cols;
    return true;
  };

  std::mt19937 gen(20240521u);
  auto random_vector = [&] {
    Eigen::VectorXd v(N);
    for (int i = 0; i < N; ++i) v(i) = static_cast<double>(gen()) / 4294967296.0 - 0.5;
    return v;
  };
  for (int j = 0; j < bsz; ++j) append(random_vector());

  std::vector<int> next_block;
  for (int j = 0; j < bsz; ++j) next_block.push_back(j);
  EigenResult out;
  out.beta = beta;
  out.mesh_id = f.mesh_id;
  std::vector<double> residuals(static_cast<std::size_t>(n));
  const int max_applications = 200 * m_max;
  for (;;) {
    // expand by one block
    std::vector<int> added;
    for (int j : next_block) {
      if (cols >= m_max) break;
      if (append(Y.col(j))) added.push_back(cols - 1);
    }
    while (added.empty() && cols < m_max && append(random_vector())) added.push_back(cols - 1);
    next_block = added;
    if (cols < std::min(m_max, n + bsz) && !added.empty()) continue;

    // Rayleigh-Ritz
    const Eigen::MatrixXd MY = M * Y.leftCols(cols);
    Eigen::MatrixXd H = V.leftCols(cols).transpose() * MY;
    H = 0.5 * (H + H.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
    // descending theta
    const Eigen::VectorXd theta = es.eigenvalues().reverse();
    const Eigen::MatrixXd Z = es.eigenvectors().rowwise().reverse();
    const int take = std::min(n, cols);
    const Eigen::MatrixXd X = V.leftCols(cols) * Z.leftCols(take);
    bool converged = take == n;
    int first_bad = -1;
    for (int j = 0; j < take; ++j) {
      const double lam = sigma + 1.0 / theta(j);
      const Eigen::VectorXd x = X.col(j);
      const double xm = std::sqrt(x.dot(M * x));
      const double r = (A * x - lam * (M * x)).norm() / xm;
      residuals[static_cast<std::size_t>(j)] = r;
      if (!(theta(j) > 0.0) || r > 1e-9 * std::max(std::abs(lam), 1.0)) {
        converged = false;
        if (first_bad < 0) first_bad = j;
      }
    }
    if (converged) {
      for (int j = 0; j < n; ++j) {
        out.eigenvalues.push_back(sigma + 1.0 / theta(j));
        out.error_estimate.push_back(0.0);
      }
      if (info) {
        info->shift = sigma;
        info->shift_retries = retries;
        info->operator_applications = applications;
        info->residuals = residuals;
        info->vectors = X;
      }
      return out;
    }
    if (applications > max_applications) throw IterationError("Krylov iteration did not converge");
    if (cols >= m_max || added.empty()) {
      // thick restart with the leading Ritz vectors
      const int keep = std::min(cols, std::min(m_max - bsz, n + bsz + 2));
      const Eigen::MatrixXd Vk = V.leftCols(cols) * Z.leftCols(keep);
      const Eigen::MatrixXd Yk = Y.leftCols(cols) * Z.leftCols(keep);
      V.leftCols(keep) = Vk;
      Y.leftCols(keep) = Yk;
      cols = keep;
      next_block.clear();
      for (int j = std::max(first_bad, 0); j < keep && static_cast<int>(next_block.size()) < bsz; ++j)
        next_block.push_back(j);
    }
  }
}

// ---------------------------------------------------------- driver / study

struct FemOptions {
  int order = 2;
  MeshOptions mesh;
  bool refine_for_estimate = true;
};

/// Mesh, assemble and solve; with `refine_for_estimate` the reported values
/// come from one uniform refinement, and the error estimate is the change
/// divided by 2^(2 order) - 1 (eigenvalue error ~ h^(2 order)).
inline EigenResult compute_spectrum(const geometry::ArcLengthCurve& alc, double gamma_star,
                                    double beta, int n, const FemOptions& opt) {
  const Mesh2D mesh = mesh_domain(alc, beta, opt.mesh);
  const auto coarse = solve_negative_spectrum(assemble(mesh, opt.order), beta, n, gamma_star);
  if (!opt.refine_for_estimate) return coarse;
  const Mesh2D fine_mesh = refine_uniform(alc, mesh);
  auto fine = solve_negative_spectrum(assemble(fine_mesh, opt.order), beta, n, gamma_star);
  const double gain = std::pow(2.0, 2 * opt.order) - 1.0;
  for (std::size_t j = 0; j < static_cast<std::size_t>(n); ++j)
    fine.error_estimate[j] = std::abs(fine.eigenvalues[j] - coarse.eigenvalues[j]) / gain;
  return fine;
}

struct ConvergenceRow {
  double h = 0.0;
  int dofs = 0;
  std::vector<double> eigenvalues;
  std::vector<double> errors;  // against the reference (or the finest level)
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::vector<std::vector<double>> orders;  // per consecutive pair of rows, per eigenvalue
};

/// h_list must be h0, h0/2, h0/4, ...; level k is k uniform refinements of
/// the mesh for h0. Errors are taken against `reference` when given.
inline ConvergenceTable convergence_study(const geometry::ArcLengthCurve& alc, double gamma_star,
                                          double beta, int n, const std::vector<double>& h_list,
                                          int order = 2, const std::vector<double>& reference = {}) {
  if (h_list.size() < 2) throw ParameterError("convergence_study needs at least two widths");
  for (std::size_t k = 1; k < h_list.size(); ++k)
    if (std::abs(h_list[k] * std::pow(2.0, static_cast<double>(k)) / h_list[0] - 1.0) > 1e-12)
      throw ParameterError("h_list must halve at every step");
  MeshOptions mo;
  mo.target_h = h_list[0];
  Mesh2D mesh = mesh_domain(alc, beta, mo);
  ConvergenceTable t;
  for (std::size_t k = 0; k < h_list.size(); ++k) {
    if (k > 0) mesh = refine_uniform(alc, mesh);
    const auto forms = assemble(mesh, order);
    const auto r = solve_negative_spectrum(forms, beta, n, gamma_star);
    t.rows.push_back({h_list[k], forms.dof_count, r.eigenvalues, {}});
  }
  const auto& ref = reference.empty() ? t.rows.back().eigenvalues : reference;
  for (auto& row : t.rows)
    for (int j = 0; j < n; ++j)
      row.errors.push_back(std::abs(row.eigenvalues[static_cast<std::size_t>(j)] - ref[static_cast<std::size_t>(j)]));
  const std::size_t usable = reference.empty() ? t.rows.size() - 1 : t.rows.size();
  for (std::size_t k = 0; k + 1 < usable; ++k) {
    std::vector<double> o;
    for (int j = 0; j < n; ++j)
      o.push_back(std::log2(t.rows[k].errors[static_cast<std::size_t>(j)] /
                            t.rows[k + 1].errors[static_cast<std::size_t>(j)]));
    t.orders.push_back(std::move(o));
  }
  return t;
}

}  // namespace robin::fem
