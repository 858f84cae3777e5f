// Discrete spaces X_grad, X_curl, X_div, their interpolators, and the full
// local operators (gradients, curls, divergence, potentials on edges/faces).
//
// Local dof layouts:
//  - element, grad: [vertices (ascending), edges (ascending), faces (element order), element block]
//  - element, curl: [edges (ascending), faces (element order), element block]
//  - element, div:  [faces (element order), element block]
//  - face, grad:    [face vertices (loop order), face edges (loop order), face block]
//  - face, curl:    [face edges (loop order), face block]
//  - edge, grad:    [lower vertex, upper vertex, edge block]
// Element and face curl blocks are (R^{k-1}, R^k-perp); element div blocks are
// (G^{k-1}, G^k-perp). Global numbering follows the same entity order with
// ascending entity index.

#ifndef DDR_DDR_CORE_HPP
#define DDR_DDR_CORE_HPP

#include <ddr/mesh.hpp>
#include <ddr/polyspaces.hpp>

#include <Eigen/Sparse>

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddr {

using SparseMatrix = Eigen::SparseMatrix<double>;
using ScalarFunction = std::function<double(const Vec3&)>;
using VectorFunction = std::function<Vec3(const Vec3&)>;

enum class SpaceKind { Grad, Curl, Div };

struct DofSpace {
  SpaceKind kind = SpaceKind::Grad;
  int k = 0;
  int vertex_block = 0, edge_block = 0, face_block = 0, element_block = 0;
  int n_vertices = 0, n_edges = 0, n_faces = 0, n_elements = 0;

  int vertex_offset(int i) const { return i * vertex_block; }
  int edge_offset(int i) const { return n_vertices * vertex_block + i * edge_block; }
  int face_offset(int i) const { return edge_offset(n_edges) + i * face_block; }
  int element_offset(int i) const { return face_offset(n_faces) + i * element_block; }
  int dimension() const { return element_offset(n_elements); }
};

DofSpace dof_space(const Mesh& mesh, SpaceKind kind, int k);

/// Global indices of the element-local (resp. face-local) dof layout.
std::vector<int> element_dofs(const Mesh& mesh, const DofSpace& space, int iT);
std::vector<int> face_dofs(const Mesh& mesh, const DofSpace& space, int iF);

/// Quadrature-degree policy.
struct QuadratureDegrees {
  int construction = -1;   // bases and operators; default 2k+4
  int interpolation = -1;  // non-polynomial data; default 2k+5
};

// Per-entity bases. Element scalar bases reach degree k+2, faces k+1, edges k+1.
struct ElementBases {
  ScalarBasis P;
  MatrixXd Gkm1, Gperpk, Gperpk1;  // G^{k-1}, G^k-perp, G^{k+1}-perp
  MatrixXd Rkm1, Rperpk;           // R^{k-1}, R^k-perp
};
struct FaceBases {
  ScalarBasis P;
  MatrixXd Rkm1, Rperpk;
};

// Local operators on one edge/face/element; columns follow the local layouts.
struct EdgeOperators {
  MatrixXd gamma;  // P^{k+1}(E) x 3-ish grad layout
  MatrixXd G;      // P^k(E)
};
struct FaceOperators {
  MatrixXd G;       // G.F : P^k(F)^2 x face grad layout
  MatrixXd gamma;   // gamma_F^{k+1} : P^{k+1}(F)
  MatrixXd C;       // C_F : P^k(F) x face curl layout
  MatrixXd gammat;  // gamma_t,F : P^k(F)^2 x face curl layout
};
struct ElementOperators {
  MatrixXd G;  // G.T : P^k(T)^3 x element grad layout
  MatrixXd C;  // C.T : P^k(T)^3 x element curl layout
  MatrixXd D;  // D_T : P^k(T) x element div layout
};

class DDRCore {
public:
  DDRCore(const Mesh& mesh, int k, QuadratureDegrees degrees = {});
  // The core keeps a reference to the mesh.
  DDRCore(Mesh&&, int, QuadratureDegrees = {}) = delete;

  const Mesh& mesh() const { return m_mesh; }
  int degree() const { return m_k; }
  const QuadratureDegrees& quadrature_degrees() const { return m_degrees; }

  const DofSpace& grad_space() const { return m_grad; }
  const DofSpace& curl_space() const { return m_curl; }
  const DofSpace& div_space() const { return m_div; }

  const ElementBases& element_bases(int iT) const { return m_elem_bases[iT]; }
  const FaceBases& face_bases(int iF) const { return m_face_bases[iF]; }
  const ScalarBasis& edge_basis(int iE) const { return m_edge_bases[iE]; }

  const EdgeOperators& edge_operators(int iE) const { return m_edge_ops[iE]; }
  const FaceOperators& face_operators(int iF) const { return m_face_ops[iF]; }
  const ElementOperators& element_operators(int iT) const { return m_elem_ops[iT]; }

  // Cross Gram matrices on faces and edges: [int phi_X^i phi_Y^j].
  MatrixXd face_element_gram(int iF, int lF, int iT, int lT) const;
  MatrixXd edge_face_gram(int iE, int lE, int iF, int lF) const;
  MatrixXd edge_element_gram(int iE, int lE, int iT, int lT) const;

  /// Matrix of v -> int_F gamma . (v x n_F) over tensor bases: rows P^l(T)^3,
  /// columns P^k(F)^2.
  MatrixXd tangential_cross(int iF, int iT, int lT) const;
  /// Tangential trace P^k(T)^3 -> P^k(F)^2 and normal trace P^k(T)^3 -> P^k(F).
  MatrixXd tangential_trace(int iF, int iT) const;
  MatrixXd normal_trace(int iF, int iT) const;
  /// Tangential edge trace P^k(T)^3 -> P^k(E) of v . t_E.
  MatrixXd edge_tangent_trace(int iE, int iT) const;

  /// Positions of the face-local (or edge-local) dofs inside the element layout.
  std::vector<int> face_in_element(SpaceKind kind, int iF, int iT) const;

  // Interpolators (global vectors).
  VectorXd interpolate_grad(const ScalarFunction& r) const;
  VectorXd interpolate_curl(const VectorFunction& v) const;
  VectorXd interpolate_div(const VectorFunction& v) const;
  /// Broken projection onto P^k(T_h), element blocks of size dim P^k(T).
  VectorXd project_broken(const ScalarFunction& q) const;

  // Global discrete operators.
  SparseMatrix grad_operator() const;  // X_grad -> X_curl
  SparseMatrix curl_operator() const;  // X_curl -> X_div
  SparseMatrix div_operator() const;   // X_div -> P^k(T_h)

  /// Reduced element curl (C_T as a map X_curl,T -> X_div,T in local layouts).
  MatrixXd local_curl(int iT) const;

  int construction_degree() const { return m_degrees.construction; }
  int interpolation_degree() const { return m_degrees.interpolation; }

private:
  void build_bases();
  void build_edge(int iE);
  void build_face(int iF);
  void build_element(int iT);

  const Mesh& m_mesh;
  int m_k;
  QuadratureDegrees m_degrees;
  DofSpace m_grad, m_curl, m_div;

  std::vector<ElementBases> m_elem_bases;
  std::vector<FaceBases> m_face_bases;
  std::vector<ScalarBasis> m_edge_bases;
  std::vector<QuadRule> m_elem_rules, m_face_rules, m_edge_rules;

  std::vector<EdgeOperators> m_edge_ops;
  std::vector<FaceOperators> m_face_ops;
  std::vector<ElementOperators> m_elem_ops;
};

/// Writes `row col value` lines (0-based, 17 significant digits).
void write_coo(const SparseMatrix& A, std::ostream& out);

/// Sparse matrix from dense row blocks: rows[i] lands at global row offset
/// row_offsets[i], with columns remapped through cols[i].
SparseMatrix assemble_blocks(int n_rows, int n_cols, const std::vector<MatrixXd>& blocks,
                             const std::vector<int>& row_offsets,
                             const std::vector<std::vector<int>>& cols);

/// Sparse sum of dense local matrices scattered through row/column index maps.
SparseMatrix assemble_scattered(int n_rows, int n_cols, const std::vector<MatrixXd>& blocks,
                                const std::vector<std::vector<int>>& rows,
                                const std::vector<std::vector<int>>& cols);

}  // namespace ddr

#endif
