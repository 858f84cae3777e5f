// Element potentials P_curl,T and P_div,T, stabilizations, discrete L2 products
// and the norms built on them. All local matrices use the element layouts of
// ddr_core.hpp; potentials are expressed in the tensor basis of P^k(T)^3.

#ifndef DDR_POTENTIALS_HPP
#define DDR_POTENTIALS_HPP

#include <ddr/ddr_core.hpp>

#include <string>
#include <vector>

namespace ddr {

struct Permeability {
  std::string name = "unit";
  ScalarFunction mu = [](const Vec3&) { return 1.; };
  /// Integrate mu(x) inside the consistency term instead of using the element mean.
  bool pointwise = false;

  static Permeability unit();
  /// mu = 1 + x1 + x2 + x3, sampled pointwise.
  static Permeability affine();
};

class Potentials {
public:
  explicit Potentials(const DDRCore& core);
  Potentials(DDRCore&&) = delete;

  const DDRCore& core() const { return m_core; }

  const MatrixXd& curl_potential(int iT) const { return m_local[iT].Pcurl; }
  const MatrixXd& div_potential(int iT) const { return m_local[iT].Pdiv; }
  const MatrixXd& curl_stabilization(int iT) const { return m_local[iT].Scurl; }
  const MatrixXd& div_stabilization(int iT) const { return m_local[iT].Sdiv; }
  /// Weighted difference operators with S = Delta^T Delta.
  const MatrixXd& curl_difference(int iT) const { return m_local[iT].Dcurl; }
  const MatrixXd& div_difference(int iT) const { return m_local[iT].Ddiv; }

  MatrixXd curl_product(int iT, const Permeability& mu) const;
  MatrixXd div_product(int iT) const;
  /// Element contribution to b_h as a div-by-curl matrix, from the expansion
  /// through C.T and P_div,T (face-difference penalty included).
  MatrixXd local_b(int iT) const;

  /// Element mean of mu.
  double mean(int iT, const ScalarFunction& mu) const;

private:
  struct Local {
    MatrixXd Pcurl, Pdiv, Scurl, Sdiv, Dcurl, Ddiv;
  };
  void build(int iT);

  const DDRCore& m_core;
  std::vector<Local> m_local;
};

SparseMatrix assemble_curl_product(const Potentials& pot, const Permeability& mu);
SparseMatrix assemble_div_product(const Potentials& pot);

/// Norms on X_curl,h and X_div,h: the product norms, the component ("tilde")
/// norms with h_F, h_E weights, and the graph norms adding C_h resp. D_h.
class DiscreteNorms {
public:
  DiscreteNorms(const Potentials& pot, const Permeability& mu);

  double curl(const VectorXd& v) const;
  double div(const VectorXd& w) const;
  double curl_tilde(const VectorXd& v) const;
  double div_tilde(const VectorXd& w) const;
  double curl_graph(const VectorXd& v) const;
  double div_graph(const VectorXd& w) const;

  const SparseMatrix& curl_product() const { return m_curl; }
  const SparseMatrix& div_product() const { return m_div; }
  const VectorXd& curl_tilde_weights() const { return m_curl_w; }
  const VectorXd& div_tilde_weights() const { return m_div_w; }
  const SparseMatrix& curl_operator() const { return m_C; }
  const SparseMatrix& div_operator() const { return m_D; }

private:
  SparseMatrix m_curl, m_div, m_C, m_D;
  VectorXd m_curl_w, m_div_w;
};

}  // namespace ddr

#endif
