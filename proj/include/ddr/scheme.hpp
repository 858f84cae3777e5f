// Magnetostatics saddle-point problem: find (H_h, A_h) in X_curl,h x X_div,h with
//   a_h(H, z) - b_h(z, A)          = -sum_{F boundary} int_F g . gamma_t,F z
//   b_h(H, v) + c_h(A, v)          =  int J . P_div,h v
// assembled as [[A, -B^T], [B, C]] with B : X_curl -> X_div.

#ifndef DDR_SCHEME_HPP
#define DDR_SCHEME_HPP

#include <ddr/potentials.hpp>

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddr {

/// Exact solution on the unit cube: A is prescribed, H = mu^{-1} curl A,
/// J = curl H, g = A x n.
struct ManufacturedCase {
  Permeability mu;
  VectorFunction A, H, J;

  static ManufacturedCase make(const Permeability& mu);
  Vec3 g(const Vec3& x, const Vec3& n) const { return A(x).cross(n); }
};

/// Checks the closed forms against central differences of A and H; throws
/// std::runtime_error on mismatch.
void validate_case(const ManufacturedCase& mc, double step = 1e-5, double tol = 1e-6);

struct Forms {
  SparseMatrix A;  // a_h on X_curl
  SparseMatrix B;  // b_h as X_curl -> X_div
  SparseMatrix C;  // c_h on X_div
};

Forms assemble_forms(const Potentials& pot, const Permeability& mu);
VectorXd assemble_rhs(const Potentials& pot, const ManufacturedCase& mc);
SparseMatrix system_matrix(const Forms& forms);

class SolverError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct Solution {
  VectorXd H, A;
  double residual = 0.;
  std::string solver;
};

/// Sparse direct solve; throws SolverError when the relative residual exceeds `tol`.
Solution solve(const SparseMatrix& K, const VectorXd& rhs, int n_curl, double tol = 1e-10);

double energy_error(const DDRCore& core, const Forms& forms, const ManufacturedCase& mc, const Solution& sol);

/// Euler characteristic V - E + F - T; 1 for a simply connected, void-free mesh.
int euler_characteristic(const Mesh& mesh);

struct RunResult {
  double h = 0.;
  double error = 0.;
  int dim_curl = 0, dim_div = 0;
  double eoc = 0.;
  bool has_eoc = false;
  double assembly_time = 0., solve_time = 0.;
  double residual = 0.;
};

RunResult run_case(const Mesh& mesh, int k, const ManufacturedCase& mc, double solver_tol = 1e-10);
/// Runs every mesh in order and fills the EOC of each row from its predecessor.
std::vector<RunResult> convergence_run(const std::vector<Mesh>& meshes, int k, const ManufacturedCase& mc,
                                      double solver_tol = 1e-10);

/// CSV with 17 significant digits. Timing columns are written as 0 unless
/// `timings` is set, so that output is reproducible byte for byte.
void write_csv(std::ostream& out, const std::vector<RunResult>& rows, bool timings);

}  // namespace ddr

#endif
