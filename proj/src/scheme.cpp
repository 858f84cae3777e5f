#include <ddr/scheme.hpp>
#include <ddr/parallel.hpp>

#include <Eigen/SparseLU>
#ifdef DDR_HAVE_UMFPACK
#include <Eigen/UmfPackSupport>
#endif
#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace ddr {

namespace {

constexpr double pi = 3.14159265358979323846;

Vec3 vector_potential(const Vec3& x)
{
  const double s1 = std::sin(pi * x[0]), s2 = std::sin(pi * x[1]), s3 = std::sin(pi * x[2]);
  const double c1 = std::cos(pi * x[0]), c2 = std::cos(pi * x[1]), c3 = std::cos(pi * x[2]);
  return Vec3(c1 * s2 * s3, -2. * s1 * c2 * s3, s1 * s2 * c3);
}

Vec3 curl_vector_potential(const Vec3& x)
{
  const double s1 = std::sin(pi * x[0]), s3 = std::sin(pi * x[2]);
  const double c1 = std::cos(pi * x[0]), c2 = std::cos(pi * x[1]), c3 = std::cos(pi * x[2]);
  return 3. * pi * Vec3(s1 * c2 * c3, 0., -c1 * c2 * s3);
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0)
{
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

ManufacturedCase ManufacturedCase::make(const Permeability& mu)
{
  ManufacturedCase mc;
  mc.mu = mu;
  mc.A = vector_potential;
  const ScalarFunction m = mu.mu;
  mc.H = [m](const Vec3& x) { return Vec3(curl_vector_potential(x) / m(x)); };
  if (mu.name == "affine") {
    // curl(W / mu) = curl(W) / mu - grad(mu) x W / mu^2 with curl W = 3 pi^2 A.
    mc.J = [m](const Vec3& x) {
      const double mx = m(x);
      const Vec3 W = curl_vector_potential(x);
      return Vec3(3. * pi * pi * vector_potential(x) / mx - Vec3(1., 1., 1.).cross(W) / (mx * mx));
    };
  } else if (mu.name == "unit") {
    mc.J = [](const Vec3& x) { return Vec3(3. * pi * pi * vector_potential(x)); };
  } else {
    throw std::invalid_argument("no closed-form current density for permeability '" + mu.name + "'");
  }
  return mc;
}

void validate_case(const ManufacturedCase& mc, double step, double tol)
{
  auto fd_curl = [step](const VectorFunction& f, const Vec3& x) {
    Eigen::Matrix3d D;  // D(i, j) = d f_i / d x_j
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = step * Vec3::Unit(j);
      D.col(j) = (f(x + e) - f(x - e)) / (2. * step);
    }
    return Vec3(D(2, 1) - D(1, 2), D(0, 2) - D(2, 0), D(1, 0) - D(0, 1));
  };
  auto fd_div = [step](const VectorFunction& f, const Vec3& x) {
    double d = 0.;
    for (int j = 0; j < 3; ++j) {
      const Vec3 e = step * Vec3::Unit(j);
      d += (f(x + e)[j] - f(x - e)[j]) / (2. * step);
    }
    return d;
  };
  const int n = 5;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const Vec3 x((i + 0.37) / n, (j + 0.61) / n, (l + 0.23) / n);
        const Vec3 muH = mc.mu.mu(x) * mc.H(x);
        const Vec3 cA = fd_curl(mc.A, x);
        const Vec3 cH = fd_curl(mc.H, x);
        const Vec3 J = mc.J(x);
        const double dA = fd_div(mc.A, x);
        if ((cA - muH).norm() > tol * std::max(1., muH.norm()) || (cH - J).norm() > tol * std::max(1., J.norm()) ||
            std::abs(dA) > tol) {
          std::ostringstream os;
          os << "manufactured solution check failed at (" << x.transpose() << "): |curl A - mu H| = "
             << (cA - muH).norm() << ", |curl H - J| = " << (cH - J).norm() << ", |div A| = " << std::abs(dA);
          throw std::runtime_error(os.str());
        }
      }
}

Forms assemble_forms(const Potentials& pot, const Permeability& mu)
{
  const DDRCore& c = pot.core();
  const Mesh& mesh = c.mesh();
  const int nT = mesh.n_elements();
  std::vector<MatrixXd> blocks(nT);
  std::vector<std::vector<int>> cdofs(nT), ddofs(nT);
  parallel_for(nT, [&](int i) {
    blocks[i] = pot.local_b(i);
    cdofs[i] = element_dofs(mesh, c.curl_space(), i);
    ddofs[i] = element_dofs(mesh, c.div_space(), i);
  });
  Forms f;
  f.A = assemble_curl_product(pot, mu);
  f.B = assemble_scattered(c.div_space().dimension(), c.curl_space().dimension(), blocks, ddofs, cdofs);
  const SparseMatrix D = c.div_operator();
  f.C = SparseMatrix(D.transpose() * D);
  return f;
}

VectorXd assemble_rhs(const Potentials& pot, const ManufacturedCase& mc)
{
  const DDRCore& c = pot.core();
  const Mesh& mesh = c.mesh();
  const int k = c.degree(), q = c.interpolation_degree();
  const int nc = c.curl_space().dimension(), nd = c.div_space().dimension();
  VectorXd rhs = VectorXd::Zero(nc + nd);

  const std::vector<int>& bfaces = mesh.boundary_faces();
  std::vector<VectorXd> fvals(bfaces.size());
  parallel_for(static_cast<int>(bfaces.size()), [&](int b) {
    const int iF = bfaces[b];
    const Face& F = mesh.face(iF);
    const int iT = F.elements[0];
    const Vec3 n = mesh.element(iT).face_orientation[mesh.local_face_index(iT, iF)] * F.normal;
    const VectorXd gF = project_vector([&](const Vec3& x) { return mc.g(x, n); }, c.face_bases(iF).P, k,
                                       quad_points(mesh, EntityKind::Face, iF, q));
    fvals[b] = -c.face_operators(iF).gammat.transpose() * gF;
  });
  for (size_t b = 0; b < bfaces.size(); ++b) {
    const std::vector<int> dofs = face_dofs(mesh, c.curl_space(), bfaces[b]);
    for (size_t i = 0; i < dofs.size(); ++i) rhs[dofs[i]] += fvals[b][i];
  }

  std::vector<VectorXd> tvals(mesh.n_elements());
  parallel_for(mesh.n_elements(), [&](int iT) {
    const VectorXd JT =
        project_vector(mc.J, c.element_bases(iT).P, k, quad_points(mesh, EntityKind::Element, iT, q));
    tvals[iT] = pot.div_potential(iT).transpose() * JT;
  });
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const std::vector<int> dofs = element_dofs(mesh, c.div_space(), iT);
    for (size_t i = 0; i < dofs.size(); ++i) rhs[nc + dofs[i]] += tvals[iT][i];
  }
  return rhs;
}

SparseMatrix system_matrix(const Forms& forms)
{
  const int nc = static_cast<int>(forms.A.rows()), nd = static_cast<int>(forms.C.rows());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(forms.A.nonZeros() + 2 * forms.B.nonZeros() + forms.C.nonZeros());
  auto add = [&t](const SparseMatrix& M, int r0, int c0, double s, bool transpose) {
    for (int j = 0; j < M.outerSize(); ++j)
      for (SparseMatrix::InnerIterator it(M, j); it; ++it) {
        const int r = transpose ? it.col() : it.row();
        const int cc = transpose ? it.row() : it.col();
        t.emplace_back(r0 + r, c0 + cc, s * it.value());
      }
  };
  add(forms.A, 0, 0, 1., false);
  add(forms.B, 0, nc, -1., true);
  add(forms.B, nc, 0, 1., false);
  add(forms.C, nc, nc, 1., false);
  SparseMatrix K(nc + nd, nc + nd);
  K.setFromTriplets(t.begin(), t.end());
  return K;
}

Solution solve(const SparseMatrix& K, const VectorXd& rhs, int n_curl, double tol)
{
  Solution sol;
  VectorXd x;
#ifdef DDR_HAVE_UMFPACK
  sol.solver = "umfpack";
  Eigen::UmfPackLU<SparseMatrix> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverError("UMFPACK factorization failed");
  x = lu.solve(rhs);
#else
  sol.solver = "sparselu";
  Eigen::SparseLU<SparseMatrix> lu;
  lu.compute(K);
  if (lu.info() != Eigen::Success) throw SolverError("SparseLU factorization failed: " + lu.lastErrorMessage());
  x = lu.solve(rhs);
#endif
  const double bn = rhs.norm();
  sol.residual = bn > 0. ? (K * x - rhs).norm() / bn : (K * x).norm();
  if (!(sol.residual <= tol)) {
    std::ostringstream os;
    os << "relative residual " << sol.residual << " exceeds " << tol << " (" << sol.solver << ", n = " << K.rows()
       << ", nnz = " << K.nonZeros() << ")";
    throw SolverError(os.str());
  }
  sol.H = x.head(n_curl);
  sol.A = x.tail(x.size() - n_curl);
  return sol;
}

double energy_error(const DDRCore& core, const Forms& forms, const ManufacturedCase& mc, const Solution& sol)
{
  const VectorXd eH = sol.H - core.interpolate_curl(mc.H);
  const VectorXd eA = sol.A - core.interpolate_div(mc.A);
  return std::sqrt(std::max(0., eH.dot(forms.A * eH) + eA.dot(forms.C * eA)));
}

int euler_characteristic(const Mesh& mesh)
{
  return mesh.n_vertices() - mesh.n_edges() + mesh.n_faces() - mesh.n_elements();
}

RunResult run_case(const Mesh& mesh, int k, const ManufacturedCase& mc, double solver_tol)
{
  if (euler_characteristic(mesh) != 1)
    spdlog::warn("mesh Euler characteristic is {} (expected 1): the domain may not be simply connected or void-free",
                 euler_characteristic(mesh));
  RunResult r;
  const auto t0 = Clock::now();
  DDRCore core(mesh, k);
  Potentials pot(core);
  const Forms forms = assemble_forms(pot, mc.mu);
  const VectorXd rhs = assemble_rhs(pot, mc);
  const SparseMatrix K = system_matrix(forms);
  r.assembly_time = seconds_since(t0);
  const auto t1 = Clock::now();
  const Solution sol = solve(K, rhs, core.curl_space().dimension(), solver_tol);
  r.solve_time = seconds_since(t1);
  r.h = mesh.h();
  r.error = energy_error(core, forms, mc, sol);
  r.dim_curl = core.curl_space().dimension();
  r.dim_div = core.div_space().dimension();
  r.residual = sol.residual;
  spdlog::info("k={} h={:.4g} curl={} div={} error={:.6e} residual={:.2e} ({:.2f}s + {:.2f}s)", k, r.h, r.dim_curl,
               r.dim_div, r.error, r.residual, r.assembly_time, r.solve_time);
  return r;
}

std::vector<RunResult> convergence_run(const std::vector<Mesh>& meshes, int k, const ManufacturedCase& mc,
                                      double solver_tol)
{
  std::vector<RunResult> rows;
  for (const Mesh& m : meshes) {
    RunResult r = run_case(m, k, mc, solver_tol);
    if (!rows.empty()) {
      const RunResult& p = rows.back();
      r.eoc = std::log(p.error / r.error) / std::log(p.h / r.h);
      r.has_eoc = true;
    }
    rows.push_back(r);
  }
  return rows;
}

void write_csv(std::ostream& out, const std::vector<RunResult>& rows, bool timings)
{
  std::ostringstream os;
  os.imbue(std::locale::classic());
  os << std::setprecision(17);
  os << "MeshSize,EnergyError,DimXCurl,DimXDiv,EOC,AssemblyTime,SolveTime\n";
  for (const RunResult& r : rows) {
    os << r.h << "," << r.error << "," << r.dim_curl << "," << r.dim_div << ",";
    if (r.has_eoc) os << r.eoc;
    os << "," << (timings ? r.assembly_time : 0.) << "," << (timings ? r.solve_time : 0.) << "\n";
  }
  out << os.str();
}

}  // namespace ddr
