#include "support.hpp"

#include <ddr/quadrature.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

using namespace ddr;

namespace {

double tet_monomial(int a, int b, int c)
{
  // a! b! c! / (a+b+c+3)!
  return std::tgamma(a + 1) * std::tgamma(b + 1) * std::tgamma(c + 1) / std::tgamma(a + b + c + 4);
}

}  // namespace

TEST(Quadrature, WeightsSumToMeasure)
{
  for (const auto& name : test::element_meshes()) {
    SCOPED_TRACE(name);
    const Mesh m = test::data_mesh(name);
    for (int deg : {0, 3, 8}) {
      const QuadRule r = quad_points(m, EntityKind::Element, 0, deg);
      EXPECT_NEAR(r.measure(), m.element(0).volume, 1e-14);
      for (double w : r.weights) EXPECT_GT(w, 0.);
      for (int iF = 0; iF < m.n_faces(); ++iF)
        EXPECT_NEAR(quad_points(m, EntityKind::Face, iF, deg).measure(), m.face(iF).area, 1e-14);
      for (int iE = 0; iE < m.n_edges(); ++iE)
        EXPECT_NEAR(quad_points(m, EntityKind::Edge, iE, deg).measure(), m.edge(iE).length, 1e-14);
    }
  }
}

TEST(Quadrature, CubeMonomials)
{
  const Mesh cube = test::data_mesh("cube.mesh");
  EXPECT_NEAR(integrate([](const Vec3& x) { return x[0] * x[0]; }, cube, EntityKind::Element, 0, 2), 1. / 3., 1e-14);
  EXPECT_NEAR(integrate([](const Vec3& x) { return std::pow(x[0], 2) * std::pow(x[1], 4) * std::pow(x[2], 6); }, cube,
                        EntityKind::Element, 0, 12),
              1. / 105., 1e-15);
}

TEST(Quadrature, TetrahedronMonomials)
{
  const Mesh tet = test::data_mesh("tet.mesh");
  EXPECT_NEAR(integrate([](const Vec3& x) { return x[0] * x[1]; }, tet, EntityKind::Element, 0, 2), 1. / 120., 1e-16);
  EXPECT_NEAR(integrate([](const Vec3& x) { return x[0] * x[0] * x[1] * std::pow(x[2], 3); }, tet, EntityKind::Element,
                        0, 6),
              1. / 30240., 1e-17);
  // Every monomial up to the requested degree.
  for (int deg = 0; deg <= 9; ++deg) {
    const QuadRule r = quad_points(tet, EntityKind::Element, 0, deg);
    EXPECT_GE(r.exact_degree, deg);
    for (int a = 0; a <= deg; ++a)
      for (int b = 0; a + b <= deg; ++b) {
        const int c = deg - a - b;
        double s = 0.;
        for (size_t q = 0; q < r.size(); ++q)
          s += r.weights[q] * std::pow(r.points[q][0], a) * std::pow(r.points[q][1], b) * std::pow(r.points[q][2], c);
        EXPECT_NEAR(s, tet_monomial(a, b, c), 1e-15) << a << " " << b << " " << c;
      }
  }
}

TEST(Quadrature, PolyhedralElementsAgreeAcrossDegrees)
{
  // A degree-6 polynomial integrated with rules of degree 6 and 14 must agree.
  std::mt19937_64 rng(7);
  const test::RandomField f(6, rng);
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    const double a = integrate([&](const Vec3& x) { return f.scalar(x); }, m, EntityKind::Element, 0, 6);
    const double b = integrate([&](const Vec3& x) { return f.scalar(x); }, m, EntityKind::Element, 0, 14);
    EXPECT_NEAR(a, b, 1e-13 * std::max(1., std::abs(b))) << name;
  }
}

TEST(Quadrature, DivergenceTheorem)
{
  // int_T div v = sum_F omega_TF int_F v . n_F, on every element shape.
  std::mt19937_64 rng(11);
  const test::RandomField v(4, rng);
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    const Element& T = m.element(0);
    const double lhs = integrate([&](const Vec3& x) { return v.div(x); }, m, EntityKind::Element, 0, 4);
    double rhs = 0.;
    for (size_t i = 0; i < T.faces.size(); ++i) {
      const Vec3 n = m.face(T.faces[i]).normal;
      rhs += T.face_orientation[i] *
             integrate([&](const Vec3& x) { return v(x).dot(n); }, m, EntityKind::Face, T.faces[i], 4);
    }
    EXPECT_NEAR(lhs, rhs, 1e-12 * std::max(1., std::abs(lhs))) << name;
  }
}

TEST(Quadrature, FaceData)
{
  const Mesh m = test::data_mesh("cut_corner.mesh");
  const Vec3 c(0.3, -1.7, 2.2);
  for (int iF = 0; iF < m.n_faces(); ++iF) {
    const Face& F = m.face(iF);
    EXPECT_NEAR(integrate([](const Vec3&) { return 1.; }, m, EntityKind::Face, iF, 0), F.area, 1e-14);
    EXPECT_NEAR(integrate([&](const Vec3&) { return c.dot(F.normal); }, m, EntityKind::Face, iF, 0),
                c.dot(F.normal) * F.area, 1e-14);
  }
}

TEST(Quadrature, EdgeSine)
{
  const Mesh cube = test::data_mesh("cube.mesh");
  int axis_edge = -1;
  for (int iE = 0; iE < cube.n_edges(); ++iE) {
    const Edge& E = cube.edge(iE);
    if (cube.vertex(E.vertices[0]).x.norm() < 1e-14 && std::abs(E.tangent[0] - 1.) < 1e-14) axis_edge = iE;
  }
  ASSERT_GE(axis_edge, 0);
  const double s = integrate([](const Vec3& x) { return std::sin(M_PI * x[0]); }, cube, EntityKind::Edge, axis_edge, 11);
  // Six Gauss points: remainder (6!)^4 pi^12 / (13 (12!)^3) = 1.74e-10.
  EXPECT_NEAR(s, 2. / M_PI, 1.8e-10);
  const double s15 = integrate([](const Vec3& x) { return std::sin(M_PI * x[0]); }, cube, EntityKind::Edge, axis_edge, 15);
  EXPECT_NEAR(s15, 2. / M_PI, 1e-14);
}

TEST(Quadrature, GaussJacobiNodes)
{
  std::vector<double> x, w;
  gauss_jacobi(5, 0., 0., x, w);
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.), 2., 1e-14);
  // Gauss-Legendre with 5 points integrates x^8 exactly: 2/9.
  double s = 0.;
  for (size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 8);
  EXPECT_NEAR(s, 2. / 9., 1e-14);
  gauss_jacobi(4, 2., 0., x, w);
  // int_{-1}^{1} (1-x)^2 dx = 8/3.
  EXPECT_NEAR(std::accumulate(w.begin(), w.end(), 0.), 8. / 3., 1e-13);
}
