#include <ddr/potentials.hpp>
#include <ddr/parallel.hpp>

#include <Eigen/LU>

#include <cmath>
#include <stdexcept>

namespace ddr {

Permeability Permeability::unit() { return {}; }

Permeability Permeability::affine()
{
  Permeability p;
  p.name = "affine";
  p.mu = [](const Vec3& x) { return 1. + x[0] + x[1] + x[2]; };
  p.pointwise = true;
  return p;
}

namespace {

// Rows of the identity picking local dofs pos[0..n) out of a layout of size ncols.
MatrixXd selection(const std::vector<int>& pos, int ncols)
{
  MatrixXd S = MatrixXd::Zero(static_cast<int>(pos.size()), ncols);
  for (size_t i = 0; i < pos.size(); ++i) S(i, pos[i]) = 1.;
  return S;
}

std::vector<int> range(int begin, int n)
{
  std::vector<int> r(n);
  for (int i = 0; i < n; ++i) r[i] = begin + i;
  return r;
}

MatrixXd solve_square(const MatrixXd& A, const MatrixXd& B, const char* what)
{
  Eigen::PartialPivLU<MatrixXd> lu(A);
  if (!(lu.rcond() > 1e-14)) throw std::runtime_error(std::string(what) + ": singular local system");
  return lu.solve(B);
}

MatrixXd stack(const std::vector<MatrixXd>& blocks, int ncols)
{
  int n = 0;
  for (const auto& b : blocks) n += static_cast<int>(b.rows());
  MatrixXd S(n, ncols);
  int r = 0;
  for (const auto& b : blocks) {
    S.middleRows(r, b.rows()) = b;
    r += static_cast<int>(b.rows());
  }
  return S;
}

}  // namespace

Potentials::Potentials(const DDRCore& core) : m_core(core), m_local(core.mesh().n_elements())
{
  parallel_for(core.mesh().n_elements(), [this](int i) { build(i); });
}

void Potentials::build(int iT)
{
  const DDRCore& c = m_core;
  const Mesh& mesh = c.mesh();
  const int k = c.degree();
  const Element& T = mesh.element(iT);
  const ElementBases& eb = c.element_bases(iT);
  const ScalarBasis& P = eb.P;
  const ElementOperators& op = c.element_operators(iT);
  const int nk = P.size(k), nk1 = P.size(k + 1);
  const DofSpace& Xc = c.curl_space();
  const DofSpace& Xd = c.div_space();
  Local& L = m_local[iT];

  // Curl potential.
  const int nC = static_cast<int>(op.C.cols());
  const int elemC = nC - Xc.element_block;
  const int nR = static_cast<int>(eb.Rkm1.cols()), nRp = static_cast<int>(eb.Rperpk.cols());
  const int nG1p = static_cast<int>(eb.Gperpk1.cols());
  {
    MatrixXd test(3 * nk, 3 * nk);
    test << curl_matrix(P, k + 1) * eb.Gperpk1, eb.Rperpk;
    MatrixXd rhs = MatrixXd::Zero(3 * nk, nC);
    MatrixXd top = eb.Gperpk1.transpose() * embed(P, k, k + 1, 3) * op.C;
    for (size_t i = 0; i < T.faces.size(); ++i) {
      const int iF = T.faces[i];
      const MatrixXd g = T.face_orientation[i] * eb.Gperpk1.transpose() * c.tangential_cross(iF, iT, k + 1) *
                         c.face_operators(iF).gammat;
      const std::vector<int> pos = c.face_in_element(SpaceKind::Curl, iF, iT);
      for (size_t j = 0; j < pos.size(); ++j) top.col(pos[j]) -= g.col(j);
    }
    rhs.topRows(nG1p) = top;
    rhs.bottomRows(nRp) = selection(range(elemC + nR, nRp), nC);
    const MatrixXd Phat = solve_square(test.transpose(), rhs, "curl potential");
    const MatrixXd Remb = embed(P, k - 1, k, 3) * eb.Rkm1;
    L.Pcurl = Phat - Remb * (Remb.transpose() * Phat) + Remb * selection(range(elemC, nR), nC);
  }

  // Div potential.
  const int nD = static_cast<int>(op.D.cols());
  const int elemD = nD - Xd.element_block;
  const int nG = static_cast<int>(eb.Gkm1.cols()), nGp = static_cast<int>(eb.Gperpk.cols());
  {
    MatrixXd test(3 * nk, 3 * nk);
    test << grad_matrix(P, k + 1).rightCols(nk1 - 1), eb.Gperpk;
    MatrixXd rhs = MatrixXd::Zero(3 * nk, nD);
    rhs.topRows(nk - 1) = -op.D.bottomRows(nk - 1);
    for (size_t i = 0; i < T.faces.size(); ++i) {
      const MatrixXd M = c.face_element_gram(T.faces[i], k, iT, k + 1);
      rhs.block(0, static_cast<int>(i) * Xd.face_block, nk1 - 1, Xd.face_block) +=
          T.face_orientation[i] * M.rightCols(nk1 - 1).transpose();
    }
    rhs.bottomRows(nGp) = selection(range(elemD + nG, nGp), nD);
    L.Pdiv = solve_square(test.transpose(), rhs, "div potential");
  }

  // Stabilizations, stored as weighted stacked difference operators so that
  // s(v, v) = |Delta v|^2 can be evaluated without cancellation.
  std::vector<MatrixXd> rows;
  for (int iF : T.faces) {
    const FaceBases& fb = c.face_bases(iF);
    const MatrixXd trace = c.tangential_trace(iF, iT) * L.Pcurl;
    const std::vector<int> pos = c.face_in_element(SpaceKind::Curl, iF, iT);
    const int nRF = static_cast<int>(fb.Rkm1.cols());
    const int start = static_cast<int>(pos.size()) - Xc.face_block;
    const std::vector<int> posR(pos.begin() + start, pos.begin() + start + nRF);
    const std::vector<int> posRp(pos.begin() + start + nRF, pos.end());
    const double w = std::sqrt(mesh.face(iF).diameter);
    rows.push_back(w * ((embed(fb.P, k - 1, k, 2) * fb.Rkm1).transpose() * trace - selection(posR, nC)));
    rows.push_back(w * (fb.Rperpk.transpose() * trace - selection(posRp, nC)));
  }
  for (size_t j = 0; j < T.edges.size(); ++j) {
    const int iE = T.edges[j];
    rows.push_back(mesh.edge(iE).length *
                   (c.edge_tangent_trace(iE, iT) * L.Pcurl -
                    selection(range(static_cast<int>(j) * Xc.edge_block, Xc.edge_block), nC)));
  }
  L.Dcurl = stack(rows, nC);

  rows.clear();
  rows.push_back((embed(P, k - 1, k, 3) * eb.Gkm1).transpose() * L.Pdiv - selection(range(elemD, nG), nD));
  for (size_t i = 0; i < T.faces.size(); ++i) {
    const int iF = T.faces[i];
    rows.push_back(std::sqrt(mesh.face(iF).diameter) *
                   (c.normal_trace(iF, iT) * L.Pdiv -
                    selection(range(static_cast<int>(i) * Xd.face_block, Xd.face_block), nD)));
  }
  L.Ddiv = stack(rows, nD);
  L.Scurl = L.Dcurl.transpose() * L.Dcurl;
  L.Sdiv = L.Ddiv.transpose() * L.Ddiv;
}

double Potentials::mean(int iT, const ScalarFunction& mu) const
{
  const QuadRule rule = quad_points(m_core.mesh(), EntityKind::Element, iT, m_core.interpolation_degree());
  double s = 0.;
  for (size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * mu(rule.points[q]);
  return s / rule.measure();
}

MatrixXd Potentials::curl_product(int iT, const Permeability& mu) const
{
  const Local& L = m_local[iT];
  if (!mu.pointwise) {
    const double muT = mean(iT, mu.mu);
    return muT * (L.Pcurl.transpose() * L.Pcurl + L.Scurl);
  }
  const int k = m_core.degree();
  const ScalarBasis& P = m_core.element_bases(iT).P;
  const int nk = P.size(k);
  const QuadRule rule = quad_points(m_core.mesh(), EntityKind::Element, iT, m_core.interpolation_degree());
  const MatrixXd phi = P.values(rule, nk);
  VectorXd wmu(rule.size());
  for (size_t q = 0; q < rule.size(); ++q) wmu[q] = rule.weights[q] * mu.mu(rule.points[q]);
  const MatrixXd Ms = phi * wmu.asDiagonal() * phi.transpose();
  MatrixXd M = MatrixXd::Zero(3 * nk, 3 * nk);
  for (int a = 0; a < 3; ++a) M.block(a * nk, a * nk, nk, nk) = Ms;
  return L.Pcurl.transpose() * M * L.Pcurl + mean(iT, mu.mu) * L.Scurl;
}

MatrixXd Potentials::div_product(int iT) const
{
  const Local& L = m_local[iT];
  return L.Pdiv.transpose() * L.Pdiv + L.Sdiv;
}

MatrixXd Potentials::local_b(int iT) const
{
  const Local& L = m_local[iT];
  const Element& T = m_core.mesh().element(iT);
  const MatrixXd& Cdot = m_core.element_operators(iT).C;
  const int nD = static_cast<int>(L.Pdiv.cols()), nC = static_cast<int>(Cdot.cols());
  const int nf = m_core.div_space().face_block;
  MatrixXd B = L.Pdiv.transpose() * Cdot;
  for (size_t i = 0; i < T.faces.size(); ++i) {
    const int iF = T.faces[i];
    const MatrixXd Tn = m_core.normal_trace(iF, iT);
    const MatrixXd dW = Tn * L.Pdiv - selection(range(static_cast<int>(i) * nf, nf), nD);
    MatrixXd CF = MatrixXd::Zero(nf, nC);
    const std::vector<int> pos = m_core.face_in_element(SpaceKind::Curl, iF, iT);
    const MatrixXd& CFloc = m_core.face_operators(iF).C;
    for (size_t j = 0; j < pos.size(); ++j) CF.col(pos[j]) += CFloc.col(j);
    B += m_core.mesh().face(iF).diameter * dW.transpose() * (Tn * Cdot - CF);
  }
  return B;
}

//------------------------------------------------------------------------------

SparseMatrix assemble_curl_product(const Potentials& pot, const Permeability& mu)
{
  const DDRCore& c = pot.core();
  const int nT = c.mesh().n_elements();
  std::vector<MatrixXd> blocks(nT);
  std::vector<std::vector<int>> dofs(nT);
  parallel_for(nT, [&](int i) {
    blocks[i] = pot.curl_product(i, mu);
    dofs[i] = element_dofs(c.mesh(), c.curl_space(), i);
  });
  const int n = c.curl_space().dimension();
  return assemble_scattered(n, n, blocks, dofs, dofs);
}

SparseMatrix assemble_div_product(const Potentials& pot)
{
  const DDRCore& c = pot.core();
  const int nT = c.mesh().n_elements();
  std::vector<MatrixXd> blocks(nT);
  std::vector<std::vector<int>> dofs(nT);
  parallel_for(nT, [&](int i) {
    blocks[i] = pot.div_product(i);
    dofs[i] = element_dofs(c.mesh(), c.div_space(), i);
  });
  const int n = c.div_space().dimension();
  return assemble_scattered(n, n, blocks, dofs, dofs);
}

DiscreteNorms::DiscreteNorms(const Potentials& pot, const Permeability& mu)
    : m_curl(assemble_curl_product(pot, mu)),
      m_div(assemble_div_product(pot)),
      m_C(pot.core().curl_operator()),
      m_D(pot.core().div_operator())
{
  const DDRCore& c = pot.core();
  const Mesh& mesh = c.mesh();
  const DofSpace& Xc = c.curl_space();
  const DofSpace& Xd = c.div_space();
  m_curl_w = VectorXd::Zero(Xc.dimension());
  m_div_w = VectorXd::Zero(Xd.dimension());
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const Element& T = mesh.element(iT);
    m_curl_w.segment(Xc.element_offset(iT), Xc.element_block).array() += 1.;
    m_div_w.segment(Xd.element_offset(iT), Xd.element_block).array() += 1.;
    for (int iF : T.faces) {
      const Face& F = mesh.face(iF);
      m_curl_w.segment(Xc.face_offset(iF), Xc.face_block).array() += F.diameter;
      m_div_w.segment(Xd.face_offset(iF), Xd.face_block).array() += F.diameter;
      for (int iE : F.edges)
        m_curl_w.segment(Xc.edge_offset(iE), Xc.edge_block).array() += F.diameter * mesh.edge(iE).length;
    }
  }
}

double DiscreteNorms::curl(const VectorXd& v) const { return std::sqrt(std::max(0., v.dot(m_curl * v))); }
double DiscreteNorms::div(const VectorXd& w) const { return std::sqrt(std::max(0., w.dot(m_div * w))); }

double DiscreteNorms::curl_tilde(const VectorXd& v) const
{
  return std::sqrt((m_curl_w.array() * v.array().square()).sum());
}

double DiscreteNorms::div_tilde(const VectorXd& w) const
{
  return std::sqrt((m_div_w.array() * w.array().square()).sum());
}

double DiscreteNorms::curl_graph(const VectorXd& v) const
{
  const double a = curl(v), b = div(m_C * v);
  return std::sqrt(a * a + b * b);
}

double DiscreteNorms::div_graph(const VectorXd& w) const
{
  const double a = div(w);
  return std::sqrt(a * a + (m_D * w).squaredNorm());
}

}  // namespace ddr
