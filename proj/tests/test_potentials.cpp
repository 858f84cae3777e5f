#include "support.hpp"

#include <ddr/potentials.hpp>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

using namespace ddr;

namespace {

VectorXd gather(const VectorXd& v, const std::vector<int>& idx)
{
  VectorXd out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = v[idx[i]];
  return out;
}

double eval_scalar(const ScalarBasis& b, int l, const VectorXd& c, const Vec3& x)
{
  return c.dot(b.values(x).head(b.size(l)));
}

Vec3 eval_vector(const ScalarBasis& b, int l, const VectorXd& c, const Vec3& x)
{
  const int n = b.size(l);
  const VectorXd phi = b.values(x).head(n);
  Vec3 v = Vec3::Zero();
  for (int d = 0; d < b.dim(); ++d) v += c.segment(d * n, n).dot(phi) * b.frame().axes.col(d);
  return v;
}

Mesh scaled(const Mesh& m, double s)
{
  std::vector<Vec3> x;
  for (const Vertex& v : m.vertices()) x.push_back(s * v.x);
  std::vector<std::vector<int>> faces, elements;
  for (const Face& F : m.faces()) faces.push_back(F.vertices);
  for (const Element& T : m.elements()) elements.push_back(T.faces);
  return Mesh(x, faces, elements);
}

VectorXd random_vector(int n, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> U(-1., 1.);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = U(rng);
  return v;
}

}  // namespace

TEST(Potentials, ReproducePolynomials)
{
  std::mt19937_64 rng(31);
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 2; ++k) {
      SCOPED_TRACE(std::string(name) + " k=" + std::to_string(k));
      const DDRCore c(m, k);
      const Potentials pot(c);
      const ScalarBasis& P = c.element_bases(0).P;
      const test::RandomField v(k, rng);
      const VectorXd Pc = pot.curl_potential(0) * gather(c.interpolate_curl(v), element_dofs(m, c.curl_space(), 0));
      const VectorXd Pd = pot.div_potential(0) * gather(c.interpolate_div(v), element_dofs(m, c.div_space(), 0));
      for (const Vec3& x : quad_points(m, EntityKind::Element, 0, 2).points) {
        EXPECT_LT((eval_vector(P, k, Pc, x) - v(x)).norm(), 1e-11);
        EXPECT_LT((eval_vector(P, k, Pd, x) - v(x)).norm(), 1e-11);
      }
    }
  }
}

TEST(Potentials, ConstantFields)
{
  const Vec3 cst(0.6, -1.3, 2.);
  for (const auto& name : {"cube.mesh", "cut_corner.mesh", "pyramid.mesh"}) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 3; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const auto f = [&](const Vec3&) { return cst; };
      const VectorXd Pc = pot.curl_potential(0) * gather(c.interpolate_curl(f), element_dofs(m, c.curl_space(), 0));
      const VectorXd Pd = pot.div_potential(0) * gather(c.interpolate_div(f), element_dofs(m, c.div_space(), 0));
      for (const Vec3& x : quad_points(m, EntityKind::Element, 0, 1).points) {
        EXPECT_LT((eval_vector(c.element_bases(0).P, k, Pc, x) - cst).norm(), 1e-11) << name << " k=" << k;
        EXPECT_LT((eval_vector(c.element_bases(0).P, k, Pd, x) - cst).norm(), 1e-12) << name << " k=" << k;
      }
    }
  }
}

TEST(Potentials, CurlProjectionIdentities)
{
  // The element R^{k-1} and R^k-perp components of P_curl v reproduce the
  // element dofs of v for arbitrary v.
  std::mt19937_64 rng(32);
  for (const auto& name : {"cube.mesh", "tet.mesh", "cut_corner.mesh", "prism.mesh"}) {
    const Mesh m = test::data_mesh(name);
    for (int k = 1; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const ElementBases& eb = c.element_bases(0);
      const MatrixXd& Pc = pot.curl_potential(0);
      const VectorXd v = random_vector(static_cast<int>(Pc.cols()), rng);
      const VectorXd p = Pc * v;
      const QuadRule r = quad_points(m, EntityKind::Element, 0, 2 * k + 2);
      const int nR = static_cast<int>(eb.Rkm1.cols()), nRp = static_cast<int>(eb.Rperpk.cols());
      const int start = static_cast<int>(v.size()) - nR - nRp;
      for (int j = 0; j < nR + nRp; ++j) {
        const bool perp = j >= nR;
        const VectorXd col = perp ? VectorXd(eb.Rperpk.col(j - nR)) : VectorXd(eb.Rkm1.col(j));
        double s = 0.;
        for (size_t q = 0; q < r.size(); ++q)
          s += r.weights[q] * eval_vector(eb.P, perp ? k : k - 1, col, r.points[q]).dot(eval_vector(eb.P, k, p, r.points[q]));
        EXPECT_NEAR(s, v[start + j], 1e-12) << name << " k=" << k << " j=" << j;
      }
    }
  }
}

TEST(Potentials, LinkBetweenDivPotentialAndCurl)
{
  std::mt19937_64 rng(33);
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const VectorXd z = random_vector(static_cast<int>(c.local_curl(0).cols()), rng);
      const VectorXd lhs = pot.div_potential(0) * (c.local_curl(0) * z);
      const VectorXd rhs = c.element_operators(0).C * z;
      EXPECT_LT((lhs - rhs).norm(), 1e-12 * std::max(1., rhs.norm())) << name << " k=" << k;
    }
  }
}

TEST(Potentials, StabilizationsVanishOnInterpolates)
{
  std::mt19937_64 rng(34);
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const test::RandomField v(k, rng);
      const VectorXd Ic = gather(c.interpolate_curl(v), element_dofs(m, c.curl_space(), 0));
      const VectorXd Id = gather(c.interpolate_div(v), element_dofs(m, c.div_space(), 0));
      EXPECT_LT((pot.curl_difference(0) * Ic).squaredNorm(), 1e-18) << name << " k=" << k;
      EXPECT_LT((pot.div_difference(0) * Id).squaredNorm(), 1e-18) << name << " k=" << k;
      EXPECT_LT((pot.curl_stabilization(0) - pot.curl_difference(0).transpose() * pot.curl_difference(0)).norm(), 1e-12);
    }
  }
}

TEST(Potentials, StabilizationsSeeSingleDofs)
{
  for (const auto& name : {"cube.mesh", "tet.mesh", "hex_prism.mesh"}) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      VectorXd e = VectorXd::Zero(pot.curl_stabilization(0).cols());
      e[0] = 1.;  // first edge dof
      EXPECT_GT(e.dot(pot.curl_stabilization(0) * e), 1e-6) << name << " k=" << k;
      VectorXd f = VectorXd::Zero(pot.div_stabilization(0).cols());
      f[0] = 1.;  // first face dof
      EXPECT_GT(f.dot(pot.div_stabilization(0) * f), 1e-6) << name << " k=" << k;
    }
  }
}

TEST(Potentials, DivStabilizationMatchesQuadrature)
{
  std::mt19937_64 rng(35);
  for (const auto& name : {"cube.mesh", "cut_corner.mesh", "pyramid.mesh"}) {
    const Mesh m = test::data_mesh(name);
    const Element& T = m.element(0);
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const ElementBases& eb = c.element_bases(0);
      const VectorXd w = random_vector(static_cast<int>(pot.div_stabilization(0).cols()), rng);
      const VectorXd p = pot.div_potential(0) * w;
      const int fb = c.div_space().face_block;
      double s = 0.;
      // Element G^{k-1} component.
      const QuadRule r = quad_points(m, EntityKind::Element, 0, 2 * k);
      const int elem = static_cast<int>(T.faces.size()) * fb;
      for (int j = 0; j < eb.Gkm1.cols(); ++j) {
        const VectorXd col = eb.Gkm1.col(j);
        double proj = 0.;
        for (size_t q = 0; q < r.size(); ++q)
          proj += r.weights[q] * eval_vector(eb.P, k - 1, col, r.points[q]).dot(eval_vector(eb.P, k, p, r.points[q]));
        s += std::pow(proj - w[elem + j], 2);
      }
      // Face normal components weighted by h_F.
      for (size_t i = 0; i < T.faces.size(); ++i) {
        const int iF = T.faces[i];
        const Face& F = m.face(iF);
        const QuadRule rf = quad_points(m, EntityKind::Face, iF, 2 * k);
        const VectorXd wF = w.segment(static_cast<int>(i) * fb, fb);
        double e = 0.;
        for (size_t q = 0; q < rf.size(); ++q) {
          const double d = eval_vector(eb.P, k, p, rf.points[q]).dot(F.normal) -
                           eval_scalar(c.face_bases(iF).P, k, wF, rf.points[q]);
          e += rf.weights[q] * d * d;
        }
        s += F.diameter * e;
      }
      EXPECT_NEAR(w.dot(pot.div_stabilization(0) * w), s, 1e-12 * std::max(1., s)) << name << " k=" << k;
    }
  }
}

TEST(Potentials, StabilizationScaling)
{
  // Interpolates of v on T and of v(./2) on 2T have matching components, and
  // every stabilization term scales like a volume.
  const VectorFunction v = [](const Vec3& x) {
    return Vec3(std::sin(x[1] + 0.3) + x[0] * x[0], std::cos(x[0] * x[2]), std::exp(0.5 * x[0]) - x[1] * x[1]);
  };
  const VectorFunction v2 = [&](const Vec3& x) { return v(0.5 * x); };
  for (const auto& name : {"tet.mesh", "cut_corner.mesh"}) {
    const Mesh m = test::data_mesh(name), m2 = scaled(m, 2.);
    for (int k = 0; k <= 1; ++k) {
      const DDRCore c(m, k), c2(m2, k);
      const Potentials p(c), p2(c2);
      const VectorXd I = gather(c.interpolate_curl(v), element_dofs(m, c.curl_space(), 0));
      const VectorXd I2 = gather(c2.interpolate_curl(v2), element_dofs(m2, c2.curl_space(), 0));
      const double s = I.dot(p.curl_stabilization(0) * I), s2 = I2.dot(p2.curl_stabilization(0) * I2);
      EXPECT_GT(s, 1e-8);
      EXPECT_NEAR(s2, 8. * s, 1e-9 * s2) << name << " k=" << k;
      const VectorXd J = gather(c.interpolate_div(v), element_dofs(m, c.div_space(), 0));
      const VectorXd J2 = gather(c2.interpolate_div(v2), element_dofs(m2, c2.div_space(), 0));
      const double t = J.dot(p.div_stabilization(0) * J), t2 = J2.dot(p2.div_stabilization(0) * J2);
      EXPECT_GT(t, 1e-8);
      EXPECT_NEAR(t2, 8. * t, 1e-9 * t2) << name << " k=" << k;
    }
  }
}

TEST(Potentials, ProductsOfConstants)
{
  const Vec3 cst(1., -2., 0.5);
  const auto f = [&](const Vec3&) { return cst; };
  Permeability three;
  three.name = "three";
  three.mu = [](const Vec3&) { return 3.; };
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    const double vol = m.element(0).volume;
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      const VectorXd Ic = gather(c.interpolate_curl(f), element_dofs(m, c.curl_space(), 0));
      const VectorXd Id = gather(c.interpolate_div(f), element_dofs(m, c.div_space(), 0));
      const double e = vol * cst.squaredNorm();
      EXPECT_NEAR(Ic.dot(pot.curl_product(0, Permeability::unit()) * Ic), e, 1e-11 * e) << name;
      EXPECT_NEAR(Ic.dot(pot.curl_product(0, three) * Ic), 3. * e, 3e-11 * e) << name;
      EXPECT_NEAR(Id.dot(pot.div_product(0) * Id), e, 1e-11 * e) << name;
    }
  }
  // Pointwise affine permeability on the unit cube: int (1 + x + y + z) = 5/2.
  const Mesh cube = test::data_mesh("cube.mesh");
  const DDRCore c(cube, 1);
  const Potentials pot(c);
  const VectorXd Ic = gather(c.interpolate_curl(f), element_dofs(cube, c.curl_space(), 0));
  EXPECT_NEAR(Ic.dot(pot.curl_product(0, Permeability::affine()) * Ic), 2.5 * cst.squaredNorm(), 1e-11);
  EXPECT_NEAR(pot.mean(0, Permeability::affine().mu), 2.5, 1e-13);
}

TEST(Potentials, ProductsAreSymmetricPositiveDefinite)
{
  for (const auto& name : test::element_meshes()) {
    const Mesh m = test::data_mesh(name);
    for (int k = 0; k <= 2; ++k) {
      const DDRCore c(m, k);
      const Potentials pot(c);
      for (const MatrixXd& M : {pot.curl_product(0, Permeability::unit()), pot.curl_product(0, Permeability::affine()),
                                pot.div_product(0)}) {
        EXPECT_LT((M - M.transpose()).cwiseAbs().maxCoeff(), 1e-12 * M.cwiseAbs().maxCoeff());
        const VectorXd ev = Eigen::SelfAdjointEigenSolver<MatrixXd>(M).eigenvalues();
        EXPECT_GT(ev.minCoeff(), 1e-8 * ev.maxCoeff()) << name << " k=" << k;
      }
    }
  }
}

TEST(Potentials, GlobalProductsMatchLocal)
{
  const Mesh m = generate_mesh(MeshFamily::KuhnTet, 1);
  const DDRCore c(m, 1);
  const Potentials pot(c);
  const Vec3 cst(0.2, 0.7, -0.4);
  const VectorXd I = c.interpolate_curl([&](const Vec3&) { return cst; });
  const VectorXd J = c.interpolate_div([&](const Vec3&) { return cst; });
  EXPECT_NEAR(I.dot(assemble_curl_product(pot, Permeability::unit()) * I), cst.squaredNorm(), 1e-12);
  EXPECT_NEAR(J.dot(assemble_div_product(pot) * J), cst.squaredNorm(), 1e-12);
}

TEST(DiscreteNorms, TildeDivOnCube)
{
  // Frozen from tests/oracles/oracles.py. With k = 0 the element block is empty.
  const Mesh cube = test::data_mesh("cube.mesh");
  const Vec3 cst(1., -2., 0.5);
  const double expected[4] = {3.853471474517166, 4.483217862754106, 4.483217862754106, 4.483217862754106};
  for (int k = 0; k <= 3; ++k) {
    const DDRCore c(cube, k);
    const Potentials pot(c);
    const DiscreteNorms norms(pot, Permeability::unit());
    EXPECT_NEAR(norms.div_tilde(c.interpolate_div([&](const Vec3&) { return cst; })), expected[k], 1e-12) << k;
  }
}

TEST(DiscreteNorms, ZeroAndConstants)
{
  const Mesh m = generate_mesh(MeshFamily::Cartesian, 2);
  const DDRCore c(m, 1);
  const Potentials pot(c);
  const DiscreteNorms n(pot, Permeability::unit());
  const VectorXd zc = VectorXd::Zero(c.curl_space().dimension()), zd = VectorXd::Zero(c.div_space().dimension());
  EXPECT_EQ(n.curl(zc), 0.);
  EXPECT_EQ(n.curl_tilde(zc), 0.);
  EXPECT_EQ(n.curl_graph(zc), 0.);
  EXPECT_EQ(n.div(zd), 0.);
  EXPECT_EQ(n.div_tilde(zd), 0.);
  EXPECT_EQ(n.div_graph(zd), 0.);
  // Constants have zero curl and divergence, so graph and product norms agree.
  const Vec3 cst(1., 2., -1.);
  const VectorXd I = c.interpolate_curl([&](const Vec3&) { return cst; });
  const VectorXd J = c.interpolate_div([&](const Vec3&) { return cst; });
  EXPECT_NEAR(n.curl(I), cst.norm(), 1e-12);
  EXPECT_NEAR(n.curl_graph(I), cst.norm(), 1e-12);
  EXPECT_NEAR(n.div(J), cst.norm(), 1e-12);
  EXPECT_NEAR(n.div_graph(J), cst.norm(), 1e-12);
}

TEST(DiscreteNorms, EquivalenceRatiosBounded)
{
  std::mt19937_64 rng(36);
  double lo = 1e300, hi = 0.;
  for (int nx : {1, 2, 4}) {
    const Mesh m = generate_mesh(MeshFamily::Cartesian, nx);
    const DDRCore c(m, 0);
    const Potentials pot(c);
    const DiscreteNorms n(pot, Permeability::unit());
    for (int s = 0; s < 5; ++s) {
      const VectorXd v = random_vector(c.curl_space().dimension(), rng);
      const double r = n.curl(v) / n.curl_tilde(v);
      lo = std::min(lo, r);
      hi = std::max(hi, r);
    }
  }
  EXPECT_GT(lo, 0.);
  EXPECT_LT(hi / lo, 3.);
}
