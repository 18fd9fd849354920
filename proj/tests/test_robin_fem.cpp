// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "robin/disc_oracle.hpp"
#include "robin/geometry.hpp"
#include "robin/robin_fem.hpp"

using namespace robin;
using geometry::ParametricCurve;

namespace {

const geometry::ArcLengthCurve& unit_disc() {
  static const auto alc = geometry::reparametrize_arclength(ParametricCurve::circle(1.0), 256);
  return alc;
}

const geometry::ArcLengthCurve& ellipse() {
  static const auto alc = geometry::reparametrize_arclength(ParametricCurve::ellipse(1.5, 1.0), 512);
  return alc;
}

fem::MeshOptions disc_options(double h = 0.1) {
  fem::MeshOptions o;
  o.target_h = h;
  o.a1 = 0.95;
  return o;
}

double factorial(int k) { return std::tgamma(k + 1.0); }

}  // namespace

TEST(Quadrature, TriangleRulesAreExactToTheirDegree) {
  for (int order : {1, 2}) {
    const auto& rule = order == 1 ? fem::detail::rule_degree2() : fem::detail::rule_degree6();
    const int degree = order == 1 ? 2 : 6;
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b) {
        double q = 0.0;
        for (std::size_t i = 0; i < rule.w.size(); ++i)
          q += rule.w[i] * std::pow(rule.pts[i][0], a) * std::pow(rule.pts[i][1], b);
        const double exact = factorial(a) * factorial(b) / factorial(a + b + 2);
        EXPECT_NEAR(q, exact, 1e-14) << a << " " << b;
      }
  }
}

TEST(Quadrature, ShapeFunctionsFormPartitionOfUnity) {
  double N[6], dN[6][2];
  for (int order : {1, 2}) {
    fem::detail::shape(order, 0.23, 0.41, N, dN);
    const int nl = order == 1 ? 3 : 6;
    double s = 0.0, gx = 0.0, gy = 0.0;
    for (int a = 0; a < nl; ++a) s += N[a], gx += dN[a][0], gy += dN[a][1];
    EXPECT_NEAR(s, 1.0, 1e-15);
    EXPECT_NEAR(gx, 0.0, 1e-14);
    EXPECT_NEAR(gy, 0.0, 1e-14);
  }
}

TEST(Mesh, DiscFirstLayerFollowsBetaRule) {
  const auto mesh = fem::mesh_domain(unit_disc(), 8.0, disc_options());
  EXPECT_NEAR(mesh.grading_params.first_layer, 0.025, 1e-15);
  const int nb = mesh.rings[0].n;
  ASSERT_EQ(mesh.rings[1].n, nb);
  for (int j = 0; j < nb; ++j) {
    const auto& b = mesh.nodes[static_cast<std::size_t>(j)];
    const auto& r = mesh.nodes[static_cast<std::size_t>(nb + j)];
    const double s = mesh.boundary_edges[static_cast<std::size_t>(j)].s_a;
    EXPECT_LE((r - b).dot(unit_disc().inward_normal(s)), 0.025 + 1e-12);
  }
}

TEST(Mesh, AuditPassesOnDiscEllipseAndRefinements) {
  for (const auto* alc : {&unit_disc(), &ellipse()}) {
    fem::MeshOptions o;
    o.target_h = 0.1;
    auto mesh = fem::mesh_domain(*alc, 20.0, o);
    for (int level = 0; level < 2; ++level) {
      const auto a = fem::audit_mesh(mesh, *alc);
      EXPECT_TRUE(a.positive_orientation);
      EXPECT_TRUE(a.conforming);
      EXPECT_TRUE(a.boundary_cycle);
      EXPECT_TRUE(a.s_increasing);
      EXPECT_LE(a.boundary_deviation, 1e-10);
      EXPECT_EQ(a.euler_characteristic, 1);
      EXPECT_TRUE(a.ok());
      mesh = fem::refine_uniform(*alc, mesh);
    }
  }
}

TEST(Mesh, LayerDepthAndCoarseningRespected) {
  fem::MeshOptions o;
  o.target_h = 0.05;
  const auto mesh = fem::mesh_domain(ellipse(), 40.0, o);
  const auto& g = mesh.grading_params;
  EXPECT_NEAR(g.depth, std::min(0.95 * 2.0 / 3.0, 6.0 / 40.0 * std::log(40.0)), 1e-3);
  // no ring inside the boundary layer is coarsened
  for (const auto& r : mesh.rings)
    if (r.rho > 1.0 - g.depth / 1.0) EXPECT_EQ(r.n, mesh.rings[0].n);
  EXPECT_LT(mesh.rings.back().n, mesh.rings[0].n);
}

TEST(Mesh, LayersOptionLowersTheRatio) {
  fem::MeshOptions o = disc_options();
  o.layers = 30;
  const auto mesh = fem::mesh_domain(unit_disc(), 40.0, o);
  const auto& g = mesh.grading_params;
  EXPECT_LT(g.ratio, 1.4);
  EXPECT_NEAR(g.first_layer * (std::pow(g.ratio, 30) - 1.0) / (g.ratio - 1.0), g.depth, 1e-9);
}

TEST(Mesh, RejectsNonStarShapedAndBadWidths) {
  const auto kidney = geometry::reparametrize_arclength(
      ParametricCurve::fourier({{0, 1, 0.16, 0.269}, {0, 0, -0.254, -0.288}},
                               {{0, 0, 0.331, 0.325}, {0, 1, -0.437, -0.335}}),
      512);
  EXPECT_THROW(fem::mesh_domain(kidney, 10.0, disc_options()), UnsupportedGeometryError);
  EXPECT_THROW(fem::mesh_domain(unit_disc(), 10.0, disc_options(0.5)), ParameterError);
  EXPECT_THROW(fem::mesh_domain(unit_disc(), 10.0, disc_options(0.0)), ParameterError);
}

TEST(Assembly, MassAndBoundaryInvariants) {
  const auto mesh = fem::mesh_domain(unit_disc(), 8.0, disc_options());
  for (int order : {1, 2}) {
    const auto f = fem::assemble(mesh, order);
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.dof_count);
    EXPECT_NEAR(one.dot(f.B * one), 2.0 * std::numbers::pi, 1e-6);
    EXPECT_LT((f.K * one).lpNorm<Eigen::Infinity>(), 1e-10);
    EXPECT_LT(std::abs(one.dot(f.K * one)), 1e-10);
    if (order == 2) EXPECT_NEAR(one.dot(f.M * one), std::numbers::pi, 1e-4);
    // boundary mass lives on boundary dofs only
    for (int k = 0; k < f.B.outerSize(); ++k)
      for (fem::SpMat::InnerIterator it(f.B, k); it; ++it)
        EXPECT_TRUE(f.boundary_dof[static_cast<std::size_t>(it.row())]);
  }
}

TEST(Assembly, EllipseAreaAndPerimeter) {
  fem::MeshOptions o;
  o.target_h = 0.1;
  const auto f = fem::assemble(fem::mesh_domain(ellipse(), 10.0, o), 2);
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(f.dof_count);
  EXPECT_NEAR(one.dot(f.M * one), 1.5 * std::numbers::pi, 1e-4);
  EXPECT_NEAR(one.dot(f.B * one), ellipse().length_L, 1e-6);
}

TEST(Assembly, LinearFunctionsHaveExactGradientEnergy) {
  // v = x: |grad v|^2 integrates to the area
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 8.0, disc_options()), 2);
  Eigen::VectorXd x(f.dof_count);
  for (int i = 0; i < f.dof_count; ++i) x(i) = f.dof_positions[static_cast<std::size_t>(i)].x();
  EXPECT_NEAR(x.dot(f.K * x), std::numbers::pi, 1e-4);
}

TEST(Assembly, DegenerateTriangleIsRejected) {
  fem::Mesh2D mesh;
  mesh.nodes = {{0, 0}, {1, 0}, {2, 0}};
  mesh.triangles = {{0, 1, 2}};
  EXPECT_THROW(fem::assemble(mesh, 1), AssemblyError);
  EXPECT_THROW(fem::assemble(mesh, 3), ParameterError);
}

TEST(Solver, NeumannLimitHasZeroGroundState) {
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 1.0, disc_options(0.1)), 2);
  const auto r = fem::solve_negative_spectrum(f, 0.0, 3, 1.0);
  EXPECT_NEAR(r.eigenvalues[0], 0.0, 1e-9);
  // first nonzero Neumann eigenvalue of the unit disc: j'_{1,1}^2
  EXPECT_NEAR(r.eigenvalues[1], 1.8411837813406593 * 1.8411837813406593, 1e-4);
  EXPECT_NEAR(r.eigenvalues[1], r.eigenvalues[2], 1e-9);
}

TEST(Solver, DiscMatchesBesselOracle) {
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 8.0, disc_options()), 2);
  fem::SolveInfo info;
  const auto r = fem::solve_negative_spectrum(f, 8.0, 5, 1.0, &info);
  const auto ref = disc_oracle::disc_spectrum({1.0, 8.0, 5});
  for (int j = 0; j < 5; ++j) {
    EXPECT_NEAR(r.eigenvalues[j], ref.eigenvalues[j], 5e-3 * std::abs(ref.eigenvalues[j]));
    EXPECT_LE(info.residuals[j], 1e-9 * std::abs(r.eigenvalues[j]));
  }
  EXPECT_NEAR(r.eigenvalues[1], r.eigenvalues[2], 1e-9);
  EXPECT_NEAR(r.eigenvalues[3], r.eigenvalues[4], 1e-9);
  // the requested shift sits above lambda_1 here, so it had to be lowered
  EXPECT_GT(info.shift_retries, 0);
  EXPECT_LT(info.shift, r.eigenvalues[0]);
}

TEST(Solver, EigenvectorsAreMOrthonormal) {
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 8.0, disc_options()), 2);
  fem::SolveInfo info;
  fem::solve_negative_spectrum(f, 8.0, 5, 1.0, &info);
  const Eigen::MatrixXd G = info.vectors.transpose() * (f.M * info.vectors);
  EXPECT_LT((G - Eigen::MatrixXd::Identity(5, 5)).norm(), 1e-8);
}

TEST(Solver, RejectsTooManyModes) {
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 8.0, disc_options()), 1);
  EXPECT_THROW(fem::solve_negative_spectrum(f, 8.0, 13, 1.0), ParameterError);
}

TEST(Solver, EllipseEigenvaluesLieBelowMinusBetaSquared) {
  fem::FemOptions opt;
  opt.mesh.target_h = 0.1;
  opt.refine_for_estimate = false;
  const double beta = 40.0;
  const auto r = fem::compute_spectrum(ellipse(), 1.5, beta, 4, opt);
  for (double l : r.eigenvalues) {
    EXPECT_LT(l, -beta * beta);
    EXPECT_GE(l, -std::pow(beta + 0.75, 2) - 1.0);
  }
}

TEST(Solver, DirichletConstraintsNeverLowerEigenvalues) {
  const auto f = fem::assemble(fem::mesh_domain(unit_disc(), 8.0, disc_options()), 2);
  std::vector<int> fixed;
  for (int d = 0; d < f.dof_count; d += 37)
    if (!f.boundary_dof[static_cast<std::size_t>(d)]) fixed.push_back(d);
  const auto g = fem::constrain_dofs(f, fixed);
  EXPECT_EQ(g.dof_count, f.dof_count - static_cast<int>(fixed.size()));
  const auto free = fem::solve_negative_spectrum(f, 8.0, 6, 1.0);
  const auto tied = fem::solve_negative_spectrum(g, 8.0, 6, 1.0);
  for (int j = 0; j < 6; ++j) EXPECT_GE(tied.eigenvalues[j], free.eigenvalues[j] - 1e-9);
}

TEST(Convergence, DiscP2OrderAgainstOracle) {
  const auto ref = disc_oracle::disc_spectrum({1.0, 8.0, 5}).eigenvalues;
  const auto t = fem::convergence_study(unit_disc(), 1.0, 8.0, 5, {0.2, 0.1, 0.05}, 2, ref);
  ASSERT_EQ(t.orders.size(), 2u);
  for (const auto& o : t.orders)
    for (double p : o) EXPECT_GE(p, 3.5);
  for (std::size_t k = 0; k + 1 < t.rows.size(); ++k)
    for (std::size_t j = 0; j < 5; ++j) EXPECT_LT(t.rows[k + 1].errors[j], t.rows[k].errors[j]);
}

TEST(Convergence, P2BeatsP1OnEveryLevel) {
  const auto ref = disc_oracle::disc_spectrum({1.0, 8.0, 3}).eigenvalues;
  const std::vector<double> hs{0.2, 0.1};
  const auto p1 = fem::convergence_study(unit_disc(), 1.0, 8.0, 3, hs, 1, ref);
  const auto p2 = fem::convergence_study(unit_disc(), 1.0, 8.0, 3, hs, 2, ref);
  for (std::size_t k = 0; k < hs.size(); ++k)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_LT(p2.rows[k].errors[j], p1.rows[k].errors[j]);
  for (double p : p1.orders[0]) EXPECT_GT(p, 1.5);
  EXPECT_THROW(fem::convergence_study(unit_disc(), 1.0, 8.0, 3, {0.2, 0.15}), ParameterError);
}

TEST(Convergence, RefinementEstimateTracksTrueError) {
  fem::FemOptions opt;
  opt.mesh = disc_options(0.2);
  const auto r = fem::compute_spectrum(unit_disc(), 1.0, 8.0, 5, opt);
  const auto ref = disc_oracle::disc_spectrum({1.0, 8.0, 5}).eigenvalues;
  for (std::size_t j = 0; j < 5; ++j) {
    const double err = std::abs(r.eigenvalues[j] - ref[j]);
    EXPECT_GT(r.error_estimate[j], 0.5 * err);
    EXPECT_LT(r.error_estimate[j], 2.0 * err);
  }
  // degenerate pairs split by less than the estimate
  EXPECT_LT(std::abs(r.eigenvalues[1] - r.eigenvalues[2]), r.error_estimate[1]);
  EXPECT_LT(std::abs(r.eigenvalues[3] - r.eigenvalues[4]), r.error_estimate[3]);
}
