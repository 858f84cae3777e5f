// Orthonormal hierarchical polynomial bases on elements, faces and edges, and
// the subspaces G, G-perp, R, R-perp.
//
// Conventions used by every other module:
//  - a scalar basis of degree l on an entity of dimension d is phi = C m, where m
//    are the scaled monomials ((x - origin) . axis_j / h)^alpha in degree-then-
//    lexicographic order and C is lower triangular, so lower degrees are prefixes;
//  - the tensor vector basis of P^l(X)^d is phi^(i % N) axis_(i / N), N = dim P^l;
//  - coefficient matrices store one function per column, expressed in the tensor
//    basis (vector spaces) or in the scalar basis (scalar spaces). All bases are
//    orthonormal, so L2 products inside one entity are plain dot products.

#ifndef DDR_POLYSPACES_HPP
#define DDR_POLYSPACES_HPP

#include <ddr/mesh.hpp>
#include <ddr/quadrature.hpp>

#include <functional>
#include <vector>

namespace ddr {

using Eigen::MatrixXd;
using Eigen::VectorXd;

/// dim P^l in n variables; 0 for l < 0.
int poly_dim(int n, int l);

/// Hierarchical exponent list (degree, then lexicographic with the first
/// variable decreasing).
std::vector<std::array<int, 3>> monomial_exponents(int n, int degree);

/// Affine chart of an entity: xi = axes^T (x - origin) / scale.
struct LocalFrame {
  int dim = 3;
  Vec3 origin = Vec3::Zero();
  Eigen::Matrix<double, 3, Eigen::Dynamic> axes;
  double scale = 1.;

  VectorXd coords(const Vec3& x) const { return axes.transpose() * (x - origin) / scale; }
};

LocalFrame element_frame(const Mesh& mesh, int iT);
/// In-plane axes (a1, a2 = n_F x a1): a1 is the normalized projection of the
/// coordinate axis least aligned with n_F, so (a1, a2, n_F) is right-handed.
LocalFrame face_frame(const Mesh& mesh, int iF);
/// Arclength along t_E from the lower-index vertex, scaled by |E|.
LocalFrame edge_frame(const Mesh& mesh, int iE);

class ScalarBasis {
public:
  ScalarBasis() = default;
  /// Orthonormalizes the monomials of the frame up to `degree` with respect to
  /// the L2 product given by `rule` (which must integrate degree 2*degree).
  ScalarBasis(const LocalFrame& frame, int degree, const QuadRule& rule);

  const LocalFrame& frame() const { return m_frame; }
  int degree() const { return m_degree; }
  int dim() const { return m_frame.dim; }
  /// Number of functions of degree <= l (a prefix of the basis).
  int size(int l) const { return poly_dim(m_frame.dim, l); }
  int size() const { return size(m_degree); }
  const MatrixXd& coefficients() const { return m_C; }

  /// Values of all basis functions at x.
  VectorXd values(const Vec3& x) const;
  /// Values of the first `n` basis functions at each quadrature point: n x npts.
  MatrixXd values(const QuadRule& rule, int n) const;

  /// Derivative along frame axis `axis` of the degree-l functions, expressed in
  /// the degree-(l-1) functions: size(l-1) x size(l), one column per function.
  MatrixXd derivative(int axis, int l) const;

private:
  LocalFrame m_frame;
  int m_degree = -1;
  MatrixXd m_C;               // rows: basis functions, columns: monomials
  std::vector<MatrixXd> m_D;  // monomial derivative matrices at full degree
};

ScalarBasis scalar_basis(const Mesh& mesh, EntityKind kind, int index, int degree);

// Differential operators between tensor bases of one entity. Each returns the
// matrix mapping coefficients of degree l to coefficients of degree l-1.
MatrixXd grad_matrix(const ScalarBasis& b, int l);   // d N_{l-1} x N_l
MatrixXd div_matrix(const ScalarBasis& b, int l);    // N_{l-1} x d N_l
MatrixXd curl_matrix(const ScalarBasis& b, int l);   // 3 N_{l-1} x 3 N_l (elements)
MatrixXd vrot_matrix(const ScalarBasis& b, int l);   // 2 N_{l-1} x N_l (faces)
MatrixXd rot_matrix(const ScalarBasis& b, int l);    // N_{l-1} x 2 N_l (faces)

/// Rotation by -pi/2 in the face tangent plane, acting on 2D tensor coefficients.
MatrixXd rotate_minus_half_pi(int n);

/// Embedding of tensor coefficients of degree `from` into degree `to` (to >= from).
MatrixXd embed(const ScalarBasis& b, int from, int to, int components);

struct SubspaceBasis {
  int degree = -1;
  MatrixXd G, Gperp, R, Rperp;  // columns over the tensor basis of degree `degree`
};

/// Subspace bases of degree l; requires the scalar basis to reach degree l+2 on
/// elements and l+1 on faces. Dimensions are checked against the closed formulas.
SubspaceBasis subspace_bases(const ScalarBasis& b, int l);

/// G^l and G^l-perp only; requires the scalar basis to reach degree l+1.
void gradient_subspaces(const ScalarBasis& b, int l, MatrixXd& G, MatrixXd& Gperp);

/// Orthonormal basis of the column span of A (rank must equal `expected`) and its
/// orthogonal complement, via SVD with relative threshold 1e-10.
void orthonormal_span(const MatrixXd& A, int expected, MatrixXd& span, MatrixXd& complement,
                      const char* what);

/// Coefficients of the L2 projection of f onto the first size(l) functions.
VectorXd project(const std::function<double(const Vec3&)>& f, const ScalarBasis& b, int l,
                 const QuadRule& rule);
/// Tensor-basis coefficients of the L2 projection of the in-frame components of f.
VectorXd project_vector(const std::function<Vec3(const Vec3&)>& f, const ScalarBasis& b, int l,
                        const QuadRule& rule);

/// Gram matrix [int phi_A^i phi_B^j] over the rule; B may live on a larger entity.
MatrixXd gram(const ScalarBasis& A, int lA, const ScalarBasis& B, int lB, const QuadRule& rule);

}  // namespace ddr

#endif
