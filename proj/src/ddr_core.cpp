#include <ddr/ddr_core.hpp>
#include <ddr/parallel.hpp>

#include <Eigen/LU>
#include <spdlog/spdlog.h>

#include <iomanip>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

namespace ddr {

DofSpace dof_space(const Mesh& mesh, SpaceKind kind, int k)
{
  if (k < 0) throw std::invalid_argument("dof_space: k must be >= 0");
  DofSpace s;
  s.kind = kind;
  s.k = k;
  s.n_vertices = mesh.n_vertices();
  s.n_edges = mesh.n_edges();
  s.n_faces = mesh.n_faces();
  s.n_elements = mesh.n_elements();
  auto NE = [](int l) { return poly_dim(1, l); };
  auto NF = [](int l) { return poly_dim(2, l); };
  auto NT = [](int l) { return poly_dim(3, l); };
  switch (kind) {
  case SpaceKind::Grad:
    s.vertex_block = 1;
    s.edge_block = NE(k - 1);
    s.face_block = NF(k - 1);
    s.element_block = NT(k - 1);
    break;
  case SpaceKind::Curl: {
    // dim R^{k-1}(F) = NF(k) - 1, dim R^k(F)-perp = 2 NF(k) - NF(k+1) + 1;
    // dim R^{k-1}(T) = 3 NT(k) - NT(k+1) + 1, dim R^k(T)-perp = 3 NT(k) - dim R^k(T).
    const int rF = k >= 1 ? NF(k) - 1 : 0;
    const int rpF = 2 * NF(k) - (NF(k + 1) - 1);
    const int rT = k >= 1 ? 3 * NT(k) - (NT(k + 1) - 1) : 0;
    const int rpT = 3 * NT(k) - (3 * NT(k + 1) - (NT(k + 2) - 1));
    s.edge_block = NE(k);
    s.face_block = rF + rpF;
    s.element_block = rT + rpT;
    break;
  }
  case SpaceKind::Div: {
    const int gT = k >= 1 ? NT(k) - 1 : 0;
    const int gpT = 3 * NT(k) - (NT(k + 1) - 1);
    s.face_block = NF(k);
    s.element_block = gT + gpT;
    break;
  }
  }
  return s;
}

std::vector<int> element_dofs(const Mesh& mesh, const DofSpace& space, int iT)
{
  const Element& T = mesh.element(iT);
  std::vector<int> dofs;
  auto push = [&dofs](int offset, int n) {
    for (int i = 0; i < n; ++i) dofs.push_back(offset + i);
  };
  for (int v : T.vertices) push(space.vertex_offset(v), space.vertex_block);
  for (int e : T.edges) push(space.edge_offset(e), space.edge_block);
  for (int f : T.faces) push(space.face_offset(f), space.face_block);
  push(space.element_offset(iT), space.element_block);
  return dofs;
}

std::vector<int> face_dofs(const Mesh& mesh, const DofSpace& space, int iF)
{
  const Face& F = mesh.face(iF);
  std::vector<int> dofs;
  auto push = [&dofs](int offset, int n) {
    for (int i = 0; i < n; ++i) dofs.push_back(offset + i);
  };
  for (int v : F.vertices) push(space.vertex_offset(v), space.vertex_block);
  for (int e : F.edges) push(space.edge_offset(e), space.edge_block);
  push(space.face_offset(iF), space.face_block);
  return dofs;
}

namespace {

std::vector<int> positions(const std::vector<int>& within, const std::vector<int>& sub)
{
  std::unordered_map<int, int> where;
  for (size_t i = 0; i < within.size(); ++i) where[within[i]] = static_cast<int>(i);
  std::vector<int> pos(sub.size());
  for (size_t i = 0; i < sub.size(); ++i) pos[i] = where.at(sub[i]);
  return pos;
}

// dst.col(pos[j]) += src.col(j)
void scatter_cols(MatrixXd& dst, const MatrixXd& src, const std::vector<int>& pos)
{
  for (size_t j = 0; j < pos.size(); ++j) dst.col(pos[j]) += src.col(j);
}

MatrixXd solve_square(const MatrixXd& A, const MatrixXd& B, const char* what)
{
  Eigen::PartialPivLU<MatrixXd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) throw std::runtime_error(std::string(what) + ": singular local system");
  if (rc < 1e-12) spdlog::warn("{}: local system condition estimate {:.3e}", what, 1. / rc);
  return lu.solve(B);
}

}  // namespace

DDRCore::DDRCore(const Mesh& mesh, int k, QuadratureDegrees degrees)
    : m_mesh(mesh), m_k(k), m_degrees(degrees)
{
  if (k < 0) throw std::invalid_argument("DDRCore: k must be >= 0");
  if (m_degrees.construction < 0) m_degrees.construction = 2 * k + 4;
  if (m_degrees.interpolation < 0) m_degrees.interpolation = 2 * k + 5;
  if (m_degrees.construction < 2 * k + 4)
    throw std::invalid_argument("DDRCore: construction quadrature degree must be >= 2k+4");
  m_grad = dof_space(mesh, SpaceKind::Grad, k);
  m_curl = dof_space(mesh, SpaceKind::Curl, k);
  m_div = dof_space(mesh, SpaceKind::Div, k);

  build_bases();
  m_edge_ops.resize(mesh.n_edges());
  m_face_ops.resize(mesh.n_faces());
  m_elem_ops.resize(mesh.n_elements());
  parallel_for(mesh.n_edges(), [this](int i) { build_edge(i); });
  parallel_for(mesh.n_faces(), [this](int i) { build_face(i); });
  parallel_for(mesh.n_elements(), [this](int i) { build_element(i); });
  spdlog::debug("DDRCore: k={} dims grad={} curl={} div={}", k, m_grad.dimension(), m_curl.dimension(),
                m_div.dimension());
}

void DDRCore::build_bases()
{
  const int q = m_degrees.construction;
  const int k = m_k;
  m_elem_rules.resize(m_mesh.n_elements());
  m_face_rules.resize(m_mesh.n_faces());
  m_edge_rules.resize(m_mesh.n_edges());
  m_elem_bases.resize(m_mesh.n_elements());
  m_face_bases.resize(m_mesh.n_faces());
  m_edge_bases.resize(m_mesh.n_edges());

  parallel_for(m_mesh.n_edges(), [&](int i) {
    m_edge_rules[i] = quad_points(m_mesh, EntityKind::Edge, i, q);
    m_edge_bases[i] = ScalarBasis(edge_frame(m_mesh, i), k + 1, m_edge_rules[i]);
  });
  parallel_for(m_mesh.n_faces(), [&](int i) {
    m_face_rules[i] = quad_points(m_mesh, EntityKind::Face, i, q);
    FaceBases& fb = m_face_bases[i];
    fb.P = ScalarBasis(face_frame(m_mesh, i), k + 1, m_face_rules[i]);
    fb.Rkm1 = subspace_bases(fb.P, k - 1).R;
    fb.Rperpk = subspace_bases(fb.P, k).Rperp;
  });
  parallel_for(m_mesh.n_elements(), [&](int i) {
    m_elem_rules[i] = quad_points(m_mesh, EntityKind::Element, i, q);
    ElementBases& eb = m_elem_bases[i];
    eb.P = ScalarBasis(element_frame(m_mesh, i), k + 2, m_elem_rules[i]);
    SubspaceBasis s0 = subspace_bases(eb.P, k - 1);
    SubspaceBasis s1 = subspace_bases(eb.P, k);
    eb.Gkm1 = s0.G;
    eb.Rkm1 = s0.R;
    eb.Gperpk = s1.Gperp;
    eb.Rperpk = s1.Rperp;
    MatrixXd G1;
    gradient_subspaces(eb.P, k + 1, G1, eb.Gperpk1);
  });
}

MatrixXd DDRCore::face_element_gram(int iF, int lF, int iT, int lT) const
{
  return gram(m_face_bases[iF].P, lF, m_elem_bases[iT].P, lT, m_face_rules[iF]);
}

MatrixXd DDRCore::edge_face_gram(int iE, int lE, int iF, int lF) const
{
  return gram(m_edge_bases[iE], lE, m_face_bases[iF].P, lF, m_edge_rules[iE]);
}

MatrixXd DDRCore::edge_element_gram(int iE, int lE, int iT, int lT) const
{
  return gram(m_edge_bases[iE], lE, m_elem_bases[iT].P, lT, m_edge_rules[iE]);
}

MatrixXd DDRCore::tangential_cross(int iF, int iT, int lT) const
{
  const MatrixXd M = face_element_gram(iF, m_k, iT, lT);
  const int nF = static_cast<int>(M.rows()), nT = static_cast<int>(M.cols());
  const auto& axes = m_face_bases[iF].P.frame().axes;
  const Vec3& n = m_mesh.face(iF).normal;
  MatrixXd W(3 * nT, 2 * nF);
  for (int c = 0; c < 3; ++c)
    for (int a = 0; a < 2; ++a) {
      const double s = axes.col(a).dot(Vec3::Unit(c).cross(n));
      W.block(c * nT, a * nF, nT, nF) = s * M.transpose();
    }
  return W;
}

MatrixXd DDRCore::tangential_trace(int iF, int iT) const
{
  const MatrixXd M = face_element_gram(iF, m_k, iT, m_k);
  const int nF = static_cast<int>(M.rows()), nT = static_cast<int>(M.cols());
  const auto& axes = m_face_bases[iF].P.frame().axes;
  MatrixXd T(2 * nF, 3 * nT);
  for (int a = 0; a < 2; ++a)
    for (int c = 0; c < 3; ++c) T.block(a * nF, c * nT, nF, nT) = axes(c, a) * M;
  return T;
}

MatrixXd DDRCore::normal_trace(int iF, int iT) const
{
  const MatrixXd M = face_element_gram(iF, m_k, iT, m_k);
  const int nF = static_cast<int>(M.rows()), nT = static_cast<int>(M.cols());
  const Vec3& n = m_mesh.face(iF).normal;
  MatrixXd T(nF, 3 * nT);
  for (int c = 0; c < 3; ++c) T.middleCols(c * nT, nT) = n[c] * M;
  return T;
}

MatrixXd DDRCore::edge_tangent_trace(int iE, int iT) const
{
  const MatrixXd M = edge_element_gram(iE, m_k, iT, m_k);
  const int nT = static_cast<int>(M.cols());
  const Vec3& t = m_mesh.edge(iE).tangent;
  MatrixXd T(M.rows(), 3 * nT);
  for (int c = 0; c < 3; ++c) T.middleCols(c * nT, nT) = t[c] * M;
  return T;
}

std::vector<int> DDRCore::face_in_element(SpaceKind kind, int iF, int iT) const
{
  const DofSpace& s = kind == SpaceKind::Grad ? m_grad : kind == SpaceKind::Curl ? m_curl : m_div;
  if (kind == SpaceKind::Div) {
    // Face-local div layout is the face block only.
    std::vector<int> sub;
    for (int i = 0; i < s.face_block; ++i) sub.push_back(s.face_offset(iF) + i);
    return positions(element_dofs(m_mesh, s, iT), sub);
  }
  return positions(element_dofs(m_mesh, s, iT), face_dofs(m_mesh, s, iF));
}

//------------------------------------------------------------------------------
// Local operators
//------------------------------------------------------------------------------

void DDRCore::build_edge(int iE)
{
  const int k = m_k;
  const Edge& E = m_mesh.edge(iE);
  const ScalarBasis& b = m_edge_bases[iE];
  const int n1 = b.size(k + 1), nm1 = b.size(k - 1);
  MatrixXd A = MatrixXd::Zero(n1, n1);
  A.row(0) = b.values(m_mesh.vertex(E.vertices[0]).x).transpose();
  A.row(1) = b.values(m_mesh.vertex(E.vertices[1]).x).transpose();
  for (int i = 0; i < nm1; ++i) A(2 + i, i) = 1.;
  EdgeOperators& op = m_edge_ops[iE];
  op.gamma = solve_square(A, MatrixXd::Identity(n1, 2 + nm1), "edge potential");
  op.G = b.derivative(0, k + 1) * op.gamma;
}

void DDRCore::build_face(int iF)
{
  const int k = m_k;
  const Face& F = m_mesh.face(iF);
  const FaceBases& fb = m_face_bases[iF];
  const ScalarBasis& P = fb.P;
  const int nk = P.size(k), nk1 = P.size(k + 1), nkm1 = P.size(k - 1);
  FaceOperators& op = m_face_ops[iF];

  // Gradient and scalar potential.
  const std::vector<int> gdofs = face_dofs(m_mesh, m_grad, iF);
  const int nG = static_cast<int>(gdofs.size());
  const int face_block_G = nG - nkm1;
  op.G = MatrixXd::Zero(2 * nk, nG);
  if (nkm1 > 0) op.G.middleCols(face_block_G, nkm1) = -div_matrix(P, k).transpose();

  MatrixXd bnd_lhs = MatrixXd::Zero(1, nk1);
  MatrixXd bnd_rhs = MatrixXd::Zero(1, nG);
  for (size_t i = 0; i < F.edges.size(); ++i) {
    const int iE = F.edges[i];
    const Edge& E = m_mesh.edge(iE);
    const double w = F.edge_orientation[i];
    const Vec3& nFE = F.edge_normals[i];
    std::vector<int> edge_global{m_grad.vertex_offset(E.vertices[0]), m_grad.vertex_offset(E.vertices[1])};
    for (int j = 0; j < m_grad.edge_block; ++j) edge_global.push_back(m_grad.edge_offset(iE) + j);
    const std::vector<int> pos = positions(gdofs, edge_global);
    const MatrixXd& gammaE = m_edge_ops[iE].gamma;

    const MatrixXd MEF = edge_face_gram(iE, k + 1, iF, k);
    for (int a = 0; a < 2; ++a) {
      MatrixXd contrib = w * P.frame().axes.col(a).dot(nFE) * MEF.transpose() * gammaE;
      MatrixXd rows = MatrixXd::Zero(nk, nG);
      scatter_cols(rows, contrib, pos);
      op.G.middleRows(a * nk, nk) += rows;
    }
    // Boundary-mean closure: sum_E int_E gamma_tilde = sum_E int_E gamma_E.
    const QuadRule& rule = m_edge_rules[iE];
    const MatrixXd phiF = P.values(rule, nk1);
    const MatrixXd phiE = m_edge_bases[iE].values(rule, m_edge_bases[iE].size(k + 1));
    Eigen::Map<const VectorXd> wq(rule.weights.data(), rule.weights.size());
    bnd_lhs += (phiF * wq).transpose();
    MatrixXd e_rhs = (phiE * wq).transpose() * gammaE;
    MatrixXd rows = MatrixXd::Zero(1, nG);
    scatter_cols(rows, e_rhs, pos);
    bnd_rhs += rows;
  }
  const MatrixXd Gr = grad_matrix(P, k + 1);
  MatrixXd A = Gr.transpose() * Gr;
  MatrixXd rhs = Gr.transpose() * op.G;
  A.row(0) = bnd_lhs;
  rhs.row(0) = bnd_rhs;
  op.gamma = solve_square(A, rhs, "face potential");
  if (nkm1 > 0) {
    op.gamma.topRows(nkm1).setZero();
    op.gamma.block(0, face_block_G, nkm1, nkm1).setIdentity();
  }

  // Face curl and tangential potential.
  const std::vector<int> cdofs = face_dofs(m_mesh, m_curl, iF);
  const int nC = static_cast<int>(cdofs.size());
  const int nR = static_cast<int>(fb.Rkm1.cols()), nRp = static_cast<int>(fb.Rperpk.cols());
  const int face_block_C = nC - nR - nRp;
  const int nEk = m_curl.edge_block;
  op.C = MatrixXd::Zero(nk, nC);
  if (nR > 0) op.C.middleCols(face_block_C, nR) = vrot_matrix(P, k).transpose() * fb.Rkm1;
  MatrixXd edge_rhs = MatrixXd::Zero(nk1, nC);
  for (size_t i = 0; i < F.edges.size(); ++i) {
    const int iE = F.edges[i];
    const double w = F.edge_orientation[i];
    const MatrixXd MEF = edge_face_gram(iE, k, iF, k + 1);  // N^k(E) x N^{k+1}(F)
    op.C.middleCols(i * nEk, nEk) -= w * MEF.topRows(nEk).leftCols(nk).transpose();
    edge_rhs.middleCols(i * nEk, nEk) += w * MEF.transpose();
  }

  const MatrixXd V = vrot_matrix(P, k + 1);
  MatrixXd test(2 * nk, 2 * nk);
  test << V.rightCols(nk1 - 1), fb.Rperpk;
  MatrixXd trhs = MatrixXd::Zero(2 * nk, nC);
  trhs.topRows(nk1 - 1) = edge_rhs.bottomRows(nk1 - 1);
  trhs.topRows(nk - 1) += op.C.bottomRows(nk - 1);
  if (nRp > 0) trhs.block(nk1 - 1, face_block_C + nR, nRp, nRp).setIdentity();
  op.gammat = solve_square(test.transpose(), trhs, "tangential face potential");
}

void DDRCore::build_element(int iT)
{
  const int k = m_k;
  const Element& T = m_mesh.element(iT);
  const ElementBases& eb = m_elem_bases[iT];
  const ScalarBasis& P = eb.P;
  const int nk = P.size(k), nkm1 = P.size(k - 1);
  ElementOperators& op = m_elem_ops[iT];

  // Gradient.
  const int nG = static_cast<int>(element_dofs(m_mesh, m_grad, iT).size());
  op.G = MatrixXd::Zero(3 * nk, nG);
  if (nkm1 > 0) op.G.rightCols(nkm1) = -div_matrix(P, k).transpose();
  // Curl.
  const int nC = static_cast<int>(element_dofs(m_mesh, m_curl, iT).size());
  const int nR = static_cast<int>(eb.Rkm1.cols());
  op.C = MatrixXd::Zero(3 * nk, nC);
  if (nR > 0) op.C.middleCols(nC - m_curl.element_block, nR) = curl_matrix(P, k).transpose() * eb.Rkm1;
  // Divergence.
  const int nD = static_cast<int>(element_dofs(m_mesh, m_div, iT).size());
  const int nGk = static_cast<int>(eb.Gkm1.cols());
  op.D = MatrixXd::Zero(nk, nD);
  if (nGk > 0) op.D.middleCols(nD - m_div.element_block, nGk) = -grad_matrix(P, k).transpose() * eb.Gkm1;

  for (size_t i = 0; i < T.faces.size(); ++i) {
    const int iF = T.faces[i];
    const double w = T.face_orientation[i];
    const Vec3& n = m_mesh.face(iF).normal;
    const FaceOperators& fop = m_face_ops[iF];

    const MatrixXd MFT1 = face_element_gram(iF, k + 1, iT, k);  // N^{k+1}(F) x N^k(T)
    MatrixXd g = MatrixXd::Zero(3 * nk, fop.gamma.cols());
    for (int c = 0; c < 3; ++c) g.middleRows(c * nk, nk) = w * n[c] * MFT1.transpose() * fop.gamma;
    scatter_cols(op.G, g, face_in_element(SpaceKind::Grad, iF, iT));

    scatter_cols(op.C, w * tangential_cross(iF, iT, k) * fop.gammat, face_in_element(SpaceKind::Curl, iF, iT));

    const MatrixXd MFT = MFT1.topRows(m_div.face_block);
    scatter_cols(op.D, w * MFT.transpose(), face_in_element(SpaceKind::Div, iF, iT));
  }
}

//------------------------------------------------------------------------------
// Interpolators
//------------------------------------------------------------------------------

VectorXd DDRCore::interpolate_grad(const ScalarFunction& r) const
{
  const int k = m_k, q = m_degrees.interpolation;
  VectorXd out = VectorXd::Zero(m_grad.dimension());
  for (int i = 0; i < m_mesh.n_vertices(); ++i) out[m_grad.vertex_offset(i)] = r(m_mesh.vertex(i).x);
  if (k == 0) return out;
  parallel_for(m_mesh.n_edges(), [&](int i) {
    out.segment(m_grad.edge_offset(i), m_grad.edge_block) =
        project(r, m_edge_bases[i], k - 1, quad_points(m_mesh, EntityKind::Edge, i, q));
  });
  parallel_for(m_mesh.n_faces(), [&](int i) {
    out.segment(m_grad.face_offset(i), m_grad.face_block) =
        project(r, m_face_bases[i].P, k - 1, quad_points(m_mesh, EntityKind::Face, i, q));
  });
  parallel_for(m_mesh.n_elements(), [&](int i) {
    out.segment(m_grad.element_offset(i), m_grad.element_block) =
        project(r, m_elem_bases[i].P, k - 1, quad_points(m_mesh, EntityKind::Element, i, q));
  });
  return out;
}

VectorXd DDRCore::interpolate_curl(const VectorFunction& v) const
{
  const int k = m_k, q = m_degrees.interpolation;
  VectorXd out = VectorXd::Zero(m_curl.dimension());
  parallel_for(m_mesh.n_edges(), [&](int i) {
    const Vec3 t = m_mesh.edge(i).tangent;
    out.segment(m_curl.edge_offset(i), m_curl.edge_block) =
        project([&](const Vec3& x) { return v(x).dot(t); }, m_edge_bases[i], k,
                quad_points(m_mesh, EntityKind::Edge, i, q));
  });
  parallel_for(m_mesh.n_faces(), [&](int i) {
    const FaceBases& fb = m_face_bases[i];
    VectorXd p = project_vector(v, fb.P, k, quad_points(m_mesh, EntityKind::Face, i, q));
    VectorXd blk(m_curl.face_block);
    blk << (embed(fb.P, k - 1, k, 2) * fb.Rkm1).transpose() * p, fb.Rperpk.transpose() * p;
    out.segment(m_curl.face_offset(i), m_curl.face_block) = blk;
  });
  parallel_for(m_mesh.n_elements(), [&](int i) {
    const ElementBases& eb = m_elem_bases[i];
    VectorXd p = project_vector(v, eb.P, k, quad_points(m_mesh, EntityKind::Element, i, q));
    VectorXd blk(m_curl.element_block);
    blk << (embed(eb.P, k - 1, k, 3) * eb.Rkm1).transpose() * p, eb.Rperpk.transpose() * p;
    out.segment(m_curl.element_offset(i), m_curl.element_block) = blk;
  });
  return out;
}

VectorXd DDRCore::interpolate_div(const VectorFunction& v) const
{
  const int k = m_k, q = m_degrees.interpolation;
  VectorXd out = VectorXd::Zero(m_div.dimension());
  parallel_for(m_mesh.n_faces(), [&](int i) {
    const Vec3 n = m_mesh.face(i).normal;
    out.segment(m_div.face_offset(i), m_div.face_block) =
        project([&](const Vec3& x) { return v(x).dot(n); }, m_face_bases[i].P, k,
                quad_points(m_mesh, EntityKind::Face, i, q));
  });
  parallel_for(m_mesh.n_elements(), [&](int i) {
    const ElementBases& eb = m_elem_bases[i];
    VectorXd p = project_vector(v, eb.P, k, quad_points(m_mesh, EntityKind::Element, i, q));
    VectorXd blk(m_div.element_block);
    blk << (embed(eb.P, k - 1, k, 3) * eb.Gkm1).transpose() * p, eb.Gperpk.transpose() * p;
    out.segment(m_div.element_offset(i), m_div.element_block) = blk;
  });
  return out;
}

VectorXd DDRCore::project_broken(const ScalarFunction& f) const
{
  const int nk = poly_dim(3, m_k);
  VectorXd out(nk * m_mesh.n_elements());
  parallel_for(m_mesh.n_elements(), [&](int i) {
    out.segment(i * nk, nk) = project(f, m_elem_bases[i].P, m_k,
                                      quad_points(m_mesh, EntityKind::Element, i, m_degrees.interpolation));
  });
  return out;
}

//------------------------------------------------------------------------------
// Global operators
//------------------------------------------------------------------------------

SparseMatrix assemble_blocks(int n_rows, int n_cols, const std::vector<MatrixXd>& blocks,
                             const std::vector<int>& row_offsets,
                             const std::vector<std::vector<int>>& cols)
{
  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const MatrixXd& B = blocks[b];
    for (int j = 0; j < B.cols(); ++j)
      for (int i = 0; i < B.rows(); ++i)
        if (B(i, j) != 0.) triplets.emplace_back(row_offsets[b] + i, cols[b][j], B(i, j));
  }
  SparseMatrix A(n_rows, n_cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

SparseMatrix assemble_scattered(int n_rows, int n_cols, const std::vector<MatrixXd>& blocks,
                                const std::vector<std::vector<int>>& rows,
                                const std::vector<std::vector<int>>& cols)
{
  std::vector<Eigen::Triplet<double>> triplets;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const MatrixXd& B = blocks[b];
    for (int j = 0; j < B.cols(); ++j)
      for (int i = 0; i < B.rows(); ++i)
        if (B(i, j) != 0.) triplets.emplace_back(rows[b][i], cols[b][j], B(i, j));
  }
  SparseMatrix A(n_rows, n_cols);
  A.setFromTriplets(triplets.begin(), triplets.end());
  return A;
}

SparseMatrix DDRCore::grad_operator() const
{
  const int k = m_k;
  const int nE = m_mesh.n_edges(), nF = m_mesh.n_faces(), nT = m_mesh.n_elements();
  std::vector<MatrixXd> blocks(nE + nF + nT);
  std::vector<int> offs(blocks.size());
  std::vector<std::vector<int>> cols(blocks.size());
  parallel_for(nE, [&](int i) {
    const Edge& E = m_mesh.edge(i);
    blocks[i] = m_edge_ops[i].G;
    offs[i] = m_curl.edge_offset(i);
    cols[i] = {m_grad.vertex_offset(E.vertices[0]), m_grad.vertex_offset(E.vertices[1])};
    for (int j = 0; j < m_grad.edge_block; ++j) cols[i].push_back(m_grad.edge_offset(i) + j);
  });
  parallel_for(nF, [&](int i) {
    const FaceBases& fb = m_face_bases[i];
    const MatrixXd& G = m_face_ops[i].G;
    MatrixXd B(m_curl.face_block, G.cols());
    B << (embed(fb.P, k - 1, k, 2) * fb.Rkm1).transpose() * G, fb.Rperpk.transpose() * G;
    blocks[nE + i] = B;
    offs[nE + i] = m_curl.face_offset(i);
    cols[nE + i] = face_dofs(m_mesh, m_grad, i);
  });
  parallel_for(nT, [&](int i) {
    const ElementBases& eb = m_elem_bases[i];
    const MatrixXd& G = m_elem_ops[i].G;
    MatrixXd B(m_curl.element_block, G.cols());
    B << (embed(eb.P, k - 1, k, 3) * eb.Rkm1).transpose() * G, eb.Rperpk.transpose() * G;
    blocks[nE + nF + i] = B;
    offs[nE + nF + i] = m_curl.element_offset(i);
    cols[nE + nF + i] = element_dofs(m_mesh, m_grad, i);
  });
  return assemble_blocks(m_curl.dimension(), m_grad.dimension(), blocks, offs, cols);
}

MatrixXd DDRCore::local_curl(int iT) const
{
  const int k = m_k;
  const Element& T = m_mesh.element(iT);
  const ElementBases& eb = m_elem_bases[iT];
  const MatrixXd& C = m_elem_ops[iT].C;
  const int nD = static_cast<int>(T.faces.size()) * m_div.face_block + m_div.element_block;
  MatrixXd out = MatrixXd::Zero(nD, C.cols());
  for (size_t i = 0; i < T.faces.size(); ++i) {
    MatrixXd rows = MatrixXd::Zero(m_div.face_block, C.cols());
    scatter_cols(rows, m_face_ops[T.faces[i]].C, face_in_element(SpaceKind::Curl, T.faces[i], iT));
    out.middleRows(i * m_div.face_block, m_div.face_block) = rows;
  }
  out.bottomRows(m_div.element_block) << (embed(eb.P, k - 1, k, 3) * eb.Gkm1).transpose() * C,
      eb.Gperpk.transpose() * C;
  return out;
}

SparseMatrix DDRCore::curl_operator() const
{
  const int k = m_k;
  const int nF = m_mesh.n_faces(), nT = m_mesh.n_elements();
  std::vector<MatrixXd> blocks(nF + nT);
  std::vector<int> offs(blocks.size());
  std::vector<std::vector<int>> cols(blocks.size());
  parallel_for(nF, [&](int i) {
    blocks[i] = m_face_ops[i].C;
    offs[i] = m_div.face_offset(i);
    cols[i] = face_dofs(m_mesh, m_curl, i);
  });
  parallel_for(nT, [&](int i) {
    const ElementBases& eb = m_elem_bases[i];
    const MatrixXd& C = m_elem_ops[i].C;
    MatrixXd B(m_div.element_block, C.cols());
    B << (embed(eb.P, k - 1, k, 3) * eb.Gkm1).transpose() * C, eb.Gperpk.transpose() * C;
    blocks[nF + i] = B;
    offs[nF + i] = m_div.element_offset(i);
    cols[nF + i] = element_dofs(m_mesh, m_curl, i);
  });
  return assemble_blocks(m_div.dimension(), m_curl.dimension(), blocks, offs, cols);
}

SparseMatrix DDRCore::div_operator() const
{
  const int nT = m_mesh.n_elements(), nk = poly_dim(3, m_k);
  std::vector<MatrixXd> blocks(nT);
  std::vector<int> offs(nT);
  std::vector<std::vector<int>> cols(nT);
  parallel_for(nT, [&](int i) {
    blocks[i] = m_elem_ops[i].D;
    offs[i] = i * nk;
    cols[i] = element_dofs(m_mesh, m_div, i);
  });
  return assemble_blocks(nT * nk, m_div.dimension(), blocks, offs, cols);
}

void write_coo(const SparseMatrix& A, std::ostream& out)
{
  const auto old_flags = out.flags();
  const auto old_prec = out.precision();
  out << std::setprecision(17);
  for (int j = 0; j < A.outerSize(); ++j)
    for (SparseMatrix::InnerIterator it(A, j); it; ++it) out << it.row() << " " << it.col() << " " << it.value() << "\n";
  out.flags(old_flags);
  out.precision(old_prec);
}

}  // namespace ddr
