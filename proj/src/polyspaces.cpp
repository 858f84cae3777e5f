#include <ddr/polyspaces.hpp>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>

namespace ddr {

int poly_dim(int n, int l)
{
  if (l < 0) return 0;
  switch (n) {
  case 0: return 1;
  case 1: return l + 1;
  case 2: return (l + 1) * (l + 2) / 2;
  case 3: return (l + 1) * (l + 2) * (l + 3) / 6;
  }
  throw std::invalid_argument("poly_dim: unsupported dimension");
}

std::vector<std::array<int, 3>> monomial_exponents(int n, int degree)
{
  std::vector<std::array<int, 3>> out;
  for (int d = 0; d <= degree; ++d) {
    if (n == 1) {
      out.push_back({d, 0, 0});
    } else if (n == 2) {
      for (int a = d; a >= 0; --a) out.push_back({a, d - a, 0});
    } else {
      for (int a = d; a >= 0; --a)
        for (int b = d - a; b >= 0; --b) out.push_back({a, b, d - a - b});
    }
  }
  return out;
}

LocalFrame element_frame(const Mesh& mesh, int iT)
{
  const Element& T = mesh.element(iT);
  LocalFrame f;
  f.dim = 3;
  f.origin = T.center;
  f.axes = Eigen::Matrix3d::Identity();
  f.scale = T.diameter;
  return f;
}

LocalFrame face_frame(const Mesh& mesh, int iF)
{
  const Face& F = mesh.face(iF);
  int axis = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(F.normal[i]) < std::abs(F.normal[axis])) axis = i;
  Vec3 a1 = Vec3::Unit(axis) - F.normal[axis] * F.normal;
  a1.normalize();
  Vec3 a2 = F.normal.cross(a1);
  LocalFrame f;
  f.dim = 2;
  f.origin = F.center;
  f.axes.resize(3, 2);
  f.axes.col(0) = a1;
  f.axes.col(1) = a2;
  f.scale = F.diameter;
  return f;
}

LocalFrame edge_frame(const Mesh& mesh, int iE)
{
  const Edge& E = mesh.edge(iE);
  LocalFrame f;
  f.dim = 1;
  f.origin = mesh.vertex(E.vertices[0]).x;
  f.axes = E.tangent;
  f.scale = E.length;
  return f;
}

namespace {

VectorXd monomial_values(const std::vector<std::array<int, 3>>& exps, const VectorXd& xi)
{
  VectorXd m(exps.size());
  for (size_t i = 0; i < exps.size(); ++i) {
    double v = 1.;
    for (int d = 0; d < xi.size(); ++d) v *= std::pow(xi[d], exps[i][d]);
    m[i] = v;
  }
  return m;
}

}  // namespace

ScalarBasis::ScalarBasis(const LocalFrame& frame, int degree, const QuadRule& rule)
    : m_frame(frame), m_degree(degree)
{
  if (degree < 0) {
    m_C.resize(0, 0);
    return;
  }
  const auto exps = monomial_exponents(frame.dim, degree);
  const int N = static_cast<int>(exps.size());

  MatrixXd V(N, rule.size());
  for (size_t q = 0; q < rule.size(); ++q) V.col(q) = monomial_values(exps, frame.coords(rule.points[q]));
  const Eigen::Map<const VectorXd> w(rule.weights.data(), rule.weights.size());
  const MatrixXd M = V * w.asDiagonal() * V.transpose();
  // Two Cholesky passes. The second Gram matrix is recomputed from the values
  // of the first-pass basis, which restores orthogonality to rounding level.
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw std::runtime_error("scalar_basis: singular monomial Gram matrix");
  MatrixXd L = llt.matrixL();
  m_C = L.triangularView<Eigen::Lower>().solve(MatrixXd::Identity(N, N));
  m_C.triangularView<Eigen::StrictlyUpper>().setZero();
  const MatrixXd V1 = m_C * V;
  MatrixXd M2 = V1 * w.asDiagonal() * V1.transpose();
  M2 = 0.5 * (M2 + M2.transpose()).eval();
  Eigen::LLT<MatrixXd> llt2(M2);
  if (llt2.info() != Eigen::Success) throw std::runtime_error("scalar_basis: orthonormalization failed");
  MatrixXd L2 = llt2.matrixL();
  m_C = L2.triangularView<Eigen::Lower>().solve(m_C).eval();
  m_C.triangularView<Eigen::StrictlyUpper>().setZero();

  std::map<std::array<int, 3>, int> index;
  for (int i = 0; i < N; ++i) index[exps[i]] = i;
  m_D.assign(frame.dim, MatrixXd::Zero(N, N));
  for (int d = 0; d < frame.dim; ++d)
    for (int i = 0; i < N; ++i) {
      if (exps[i][d] == 0) continue;
      auto e = exps[i];
      --e[d];
      m_D[d](i, index.at(e)) = exps[i][d] / frame.scale;
    }
}

VectorXd ScalarBasis::values(const Vec3& x) const
{
  if (m_degree < 0) return VectorXd();
  return m_C * monomial_values(monomial_exponents(m_frame.dim, m_degree), m_frame.coords(x));
}

MatrixXd ScalarBasis::values(const QuadRule& rule, int n) const
{
  MatrixXd out(n, rule.size());
  if (n == 0) return out;
  const auto exps = monomial_exponents(m_frame.dim, m_degree);
  for (size_t q = 0; q < rule.size(); ++q) {
    VectorXd m = monomial_values(exps, m_frame.coords(rule.points[q]));
    out.col(q) = m_C.topLeftCorner(n, n) * m.head(n);
  }
  return out;
}

MatrixXd ScalarBasis::derivative(int axis, int l) const
{
  if (l > m_degree) throw std::out_of_range("ScalarBasis::derivative: degree exceeds basis degree");
  const int n = size(l), n1 = size(l - 1);
  if (n1 == 0) return MatrixXd::Zero(0, n);
  // d phi = C_l Dm C_{l-1}^{-1} phi_{l-1}
  MatrixXd Y = m_C.topLeftCorner(n, n) * m_D[axis].topLeftCorner(n, n1);
  MatrixXd Xt = m_C.topLeftCorner(n1, n1).transpose().triangularView<Eigen::Upper>().solve(Y.transpose());
  return Xt;
}

ScalarBasis scalar_basis(const Mesh& mesh, EntityKind kind, int index, int degree)
{
  const int qdeg = 2 * std::max(degree, 0);
  switch (kind) {
  case EntityKind::Element:
    return ScalarBasis(element_frame(mesh, index), degree, quad_points(mesh, kind, index, qdeg));
  case EntityKind::Face:
    return ScalarBasis(face_frame(mesh, index), degree, quad_points(mesh, kind, index, qdeg));
  case EntityKind::Edge:
    return ScalarBasis(edge_frame(mesh, index), degree, quad_points(mesh, kind, index, qdeg));
  }
  return {};
}

MatrixXd grad_matrix(const ScalarBasis& b, int l)
{
  const int d = b.dim(), n = b.size(l), n1 = b.size(l - 1);
  MatrixXd G(d * n1, n);
  for (int c = 0; c < d; ++c) G.middleRows(c * n1, n1) = b.derivative(c, l);
  return G;
}

MatrixXd div_matrix(const ScalarBasis& b, int l)
{
  const int d = b.dim(), n = b.size(l), n1 = b.size(l - 1);
  MatrixXd D(n1, d * n);
  for (int c = 0; c < d; ++c) D.middleCols(c * n, n) = b.derivative(c, l);
  return D;
}

MatrixXd curl_matrix(const ScalarBasis& b, int l)
{
  if (b.dim() != 3) throw std::invalid_argument("curl_matrix: element basis required");
  const int n = b.size(l), n1 = b.size(l - 1);
  MatrixXd C = MatrixXd::Zero(3 * n1, 3 * n);
  // curl(phi e_j)_c = eps_{c d j} d_d phi
  for (int c = 0; c < 3; ++c) {
    const int d1 = (c + 1) % 3, d2 = (c + 2) % 3;
    C.block(c * n1, d2 * n, n1, n) += b.derivative(d1, l);
    C.block(c * n1, d1 * n, n1, n) -= b.derivative(d2, l);
  }
  return C;
}

MatrixXd vrot_matrix(const ScalarBasis& b, int l)
{
  if (b.dim() != 2) throw std::invalid_argument("vrot_matrix: face basis required");
  return rotate_minus_half_pi(b.size(l - 1)) * grad_matrix(b, l);
}

MatrixXd rot_matrix(const ScalarBasis& b, int l)
{
  if (b.dim() != 2) throw std::invalid_argument("rot_matrix: face basis required");
  const int n = b.size(l), n1 = b.size(l - 1);
  MatrixXd R(n1, 2 * n);
  R.leftCols(n) = -b.derivative(1, l);
  R.rightCols(n) = b.derivative(0, l);
  return R;
}

MatrixXd rotate_minus_half_pi(int n)
{
  MatrixXd R = MatrixXd::Zero(2 * n, 2 * n);
  R.block(0, n, n, n).setIdentity();
  R.block(n, 0, n, n) = -MatrixXd::Identity(n, n);
  return R;
}

MatrixXd embed(const ScalarBasis& b, int from, int to, int components)
{
  const int nf = b.size(from), nt = b.size(to);
  MatrixXd E = MatrixXd::Zero(components * nt, components * nf);
  for (int c = 0; c < components; ++c)
    for (int i = 0; i < std::min(nf, nt); ++i) E(c * nt + i, c * nf + i) = 1.;
  return E;
}

void orthonormal_span(const MatrixXd& A, int expected, MatrixXd& span, MatrixXd& complement,
                      const char* what)
{
  const int m = static_cast<int>(A.rows());
  if (A.cols() == 0 || m == 0) {
    if (expected != 0)
      throw std::runtime_error(std::string("subspace ") + what + ": expected dimension " +
                               std::to_string(expected) + ", got 0");
    span.resize(m, 0);
    complement = MatrixXd::Identity(m, m);
    return;
  }
  Eigen::JacobiSVD<MatrixXd> svd(A, Eigen::ComputeFullU);
  const auto& s = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < s.size(); ++i)
    if (s[i] > 1e-10 * s[0]) ++rank;
  if (rank != expected)
    throw std::runtime_error(std::string("subspace ") + what + ": expected dimension " +
                             std::to_string(expected) + ", got " + std::to_string(rank));
  span = svd.matrixU().leftCols(rank);
  complement = svd.matrixU().rightCols(m - rank);
}

void gradient_subspaces(const ScalarBasis& b, int l, MatrixXd& G, MatrixXd& Gperp)
{
  if (b.degree() < l + 1) throw std::invalid_argument("gradient_subspaces: scalar basis degree too low");
  MatrixXd Gm = grad_matrix(b, l + 1);
  const int dimG = std::max(0, b.size(l + 1) - 1);
  orthonormal_span(Gm.rightCols(std::max<int>(0, Gm.cols() - 1)), dimG, G, Gperp, "G");
}

SubspaceBasis subspace_bases(const ScalarBasis& b, int l)
{
  const int d = b.dim();
  SubspaceBasis S;
  S.degree = l;
  if (d != 2 && d != 3) throw std::invalid_argument("subspace_bases: face or element basis required");
  if (b.degree() < l + (d == 3 ? 2 : 1))
    throw std::invalid_argument("subspace_bases: scalar basis degree too low");
  const int n = b.size(l);
  const int dimG = std::max(0, b.size(l + 1) - 1);

  auto gradients = [&](int ll) -> MatrixXd {
    MatrixXd Gm = grad_matrix(b, ll + 1);
    return Gm.rightCols(std::max<int>(0, Gm.cols() - 1));
  };
  orthonormal_span(gradients(l), dimG, S.G, S.Gperp, "G");
  if (S.Gperp.cols() != d * n - dimG) throw std::runtime_error("subspace G-perp: dimension mismatch");

  if (d == 2) {
    MatrixXd V = vrot_matrix(b, l + 1);
    orthonormal_span(V.rightCols(std::max<int>(0, V.cols() - 1)), dimG, S.R, S.Rperp, "R(F)");
  } else {
    MatrixXd G1, G1perp;
    const int dimG1 = std::max(0, b.size(l + 2) - 1);
    orthonormal_span(gradients(l + 1), dimG1, G1, G1perp, "G");
    const int dimR = 3 * b.size(l + 1) - dimG1;
    orthonormal_span(curl_matrix(b, l + 1) * G1perp, l < 0 ? 0 : dimR, S.R, S.Rperp, "R(T)");
  }
  return S;
}

VectorXd project(const std::function<double(const Vec3&)>& f, const ScalarBasis& b, int l,
                 const QuadRule& rule)
{
  const int n = b.size(l);
  MatrixXd phi = b.values(rule, n);
  VectorXd out = VectorXd::Zero(n);
  for (size_t q = 0; q < rule.size(); ++q) out += rule.weights[q] * f(rule.points[q]) * phi.col(q);
  return out;
}

VectorXd project_vector(const std::function<Vec3(const Vec3&)>& f, const ScalarBasis& b, int l,
                        const QuadRule& rule)
{
  const int n = b.size(l), d = b.dim();
  MatrixXd phi = b.values(rule, n);
  VectorXd out = VectorXd::Zero(d * n);
  for (size_t q = 0; q < rule.size(); ++q) {
    VectorXd fl = b.frame().axes.transpose() * f(rule.points[q]);
    for (int c = 0; c < d; ++c) out.segment(c * n, n) += rule.weights[q] * fl[c] * phi.col(q);
  }
  return out;
}

MatrixXd gram(const ScalarBasis& A, int lA, const ScalarBasis& B, int lB, const QuadRule& rule)
{
  MatrixXd a = A.values(rule, A.size(lA));
  MatrixXd bv = B.values(rule, B.size(lB));
  Eigen::Map<const VectorXd> w(rule.weights.data(), rule.weights.size());
  return a * w.asDiagonal() * bv.transpose();
}

}  // namespace ddr
