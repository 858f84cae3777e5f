#include <ddr/verify.hpp>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>
#include <sstream>

namespace ddr {

namespace {

// Random polynomial vector field of total degree `degree` in the scaled
// coordinates (x - center) / scale.
class PolyField {
public:
  PolyField(int degree, const Vec3& center, double scale, std::mt19937_64& rng)
      : m_exp(monomial_exponents(3, degree)), m_center(center), m_scale(scale)
  {
    std::uniform_real_distribution<double> U(-1., 1.);
    for (size_t i = 0; i < m_exp.size(); ++i) m_coef.emplace_back(U(rng), U(rng), U(rng));
  }

  Vec3 operator()(const Vec3& x) const
  {
    const Vec3 y = (x - m_center) / m_scale;
    Vec3 v = Vec3::Zero();
    for (size_t i = 0; i < m_exp.size(); ++i) v += m_coef[i] * monomial(y, m_exp[i]);
    return v;
  }
  double scalar(const Vec3& x) const { return (*this)(x)[0]; }
  /// J(i, j) = d v_i / d x_j.
  Eigen::Matrix3d jacobian(const Vec3& x) const
  {
    const Vec3 y = (x - m_center) / m_scale;
    Eigen::Matrix3d J = Eigen::Matrix3d::Zero();
    for (size_t i = 0; i < m_exp.size(); ++i)
      for (int j = 0; j < 3; ++j) {
        if (m_exp[i][j] == 0) continue;
        std::array<int, 3> e = m_exp[i];
        const double f = e[j] / m_scale;
        e[j] -= 1;
        J.col(j) += f * monomial(y, e) * m_coef[i];
      }
    return J;
  }
  Vec3 curl(const Vec3& x) const
  {
    const Eigen::Matrix3d J = jacobian(x);
    return Vec3(J(2, 1) - J(1, 2), J(0, 2) - J(2, 0), J(1, 0) - J(0, 1));
  }
  double div(const Vec3& x) const { return jacobian(x).trace(); }

private:
  static double monomial(const Vec3& y, const std::array<int, 3>& e)
  {
    double p = 1.;
    for (int c = 0; c < 3; ++c)
      for (int n = 0; n < e[c]; ++n) p *= y[c];
    return p;
  }

  std::vector<std::array<int, 3>> m_exp;
  std::vector<Vec3> m_coef;
  Vec3 m_center;
  double m_scale;
};

struct Box {
  Vec3 center;
  double scale;
};

Box bounding_box(const Mesh& mesh)
{
  Vec3 lo = Vec3::Constant(1e300), hi = Vec3::Constant(-1e300);
  for (const Vertex& v : mesh.vertices()) {
    lo = lo.cwiseMin(v.x);
    hi = hi.cwiseMax(v.x);
  }
  return {0.5 * (lo + hi), (hi - lo).norm()};
}

VectorXd gather(const VectorXd& global, const std::vector<int>& dofs)
{
  VectorXd r(dofs.size());
  for (size_t i = 0; i < dofs.size(); ++i) r[i] = global[dofs[i]];
  return r;
}

VectorXd random_vector(int n, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> U(-1., 1.);
  VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = U(rng);
  return v;
}

double ratio(double num, double den) { return den > 0. ? num / den : num; }

Check make_check(const std::string& name, const std::string& mesh, int k, double value, double tol,
                 const std::string& detail = {})
{
  Check c;
  c.name = name;
  c.mesh = mesh;
  c.k = k;
  c.value = value;
  c.tolerance = tol;
  c.pass = value <= tol;
  c.detail = detail;
  return c;
}

// Tracks max over samples of |err| / |ref| with |ref| taken per sample over the mesh.
struct MaxRelative {
  double value = 0.;
  void add(double err, double ref) { value = std::max(value, ratio(err, ref)); }
};

MatrixXd dense(const SparseMatrix& A) { return MatrixXd(A); }

}  // namespace

//------------------------------------------------------------------------------

bool Report::passed() const
{
  return std::all_of(m_checks.begin(), m_checks.end(), [](const Check& c) { return c.pass && !c.inconclusive; });
}

void Report::write_text(std::ostream& out) const
{
  std::ostringstream os;
  os << std::setprecision(3) << std::scientific;
  for (const Check& c : m_checks) {
    os << (c.inconclusive ? "INCONCLUSIVE" : c.pass ? "PASS" : "FAIL") << "  " << c.name << "  mesh=" << c.mesh
       << " k=" << c.k << "  value=" << c.value << " tol=" << c.tolerance;
    if (!c.detail.empty()) os << "  " << c.detail;
    os << "\n";
  }
  const auto npass = std::count_if(m_checks.begin(), m_checks.end(), [](const Check& c) { return c.pass; });
  os << npass << "/" << m_checks.size() << " checks passed\n";
  out << os.str();
}

nlohmann::json Report::to_json() const
{
  nlohmann::json j;
  j["passed"] = passed();
  j["checks"] = nlohmann::json::array();
  for (const Check& c : m_checks) {
    j["checks"].push_back({{"name", c.name},
                           {"mesh", c.mesh},
                           {"k", c.k},
                           {"status", c.inconclusive ? "inconclusive" : c.pass ? "pass" : "fail"},
                           {"value", c.value},
                           {"tolerance", c.tolerance},
                           {"detail", c.detail}});
  }
  return j;
}

//------------------------------------------------------------------------------

RankInfo numerical_rank(const MatrixXd& A, double threshold, double gap)
{
  RankInfo info;
  if (A.size() == 0) return info;
  const VectorXd s = Eigen::BDCSVD<MatrixXd>(A).singularValues();
  const double smax = s[0];
  if (smax == 0.) return info;
  int r = 0;
  while (r < s.size() && s[r] > threshold * smax) ++r;
  info.rank = r;
  if (r < s.size()) {
    info.gap = s[r] > 0. ? s[r - 1] / s[r] : std::numeric_limits<double>::infinity();
    info.conclusive = info.gap >= gap;
  } else if (r > 0) {
    info.gap = std::numeric_limits<double>::infinity();
    info.conclusive = s[r - 1] >= gap * threshold * smax;
  }
  return info;
}

std::vector<Check> check_exactness(const DDRCore& core, const std::string& label, const VerifyOptions& opt)
{
  const int k = core.degree();
  const MatrixXd G = dense(core.grad_operator());
  const MatrixXd C = dense(core.curl_operator());
  const MatrixXd D = dense(core.div_operator());
  const RankInfo rG = numerical_rank(G, opt.rank_threshold, opt.rank_gap);
  const RankInfo rC = numerical_rank(C, opt.rank_threshold, opt.rank_gap);
  const RankInfo rD = numerical_rank(D, opt.rank_threshold, opt.rank_gap);
  const int nP = static_cast<int>(D.rows());
  const int nullD = static_cast<int>(D.cols()) - rD.rank;
  const int nullC = static_cast<int>(C.cols()) - rC.rank;
  const int nullG = static_cast<int>(G.cols()) - rG.rank;

  auto rank_check = [&](const std::string& name, int got, int expected, const RankInfo& info) {
    std::ostringstream d;
    d << "rank=" << got << " expected=" << expected << " gap=" << info.gap;
    Check c = make_check(name, label, k, std::abs(got - expected), 0., d.str());
    c.inconclusive = !info.conclusive;
    return c;
  };
  std::vector<Check> out;
  out.push_back(rank_check("exactness.rank_D_eq_dim_Pk", rD.rank, nP, rD));
  out.push_back(rank_check("exactness.rank_C_eq_nullity_D", rC.rank, nullD, rC));
  out.push_back(rank_check("exactness.rank_G_eq_nullity_C", rG.rank, nullC, rG));
  out.push_back(rank_check("exactness.nullity_G_eq_1", nullG, 1, rG));
  out.push_back(make_check("complex.DC", label, k, (D * C).norm() / (D.norm() * C.norm()), opt.tol_exact));
  out.push_back(make_check("complex.CG", label, k, (C * G).norm() / (C.norm() * G.norm()), opt.tol_exact));
  std::ostringstream d;
  d << "dims grad/curl/div/P = " << G.cols() << "/" << C.cols() << "/" << D.cols() << "/" << nP << ", ranks G/C/D = "
    << rG.rank << "/" << rC.rank << "/" << rD.rank;
  out.back().detail = d.str();
  return out;
}

std::vector<Check> check_consistency(const Potentials& pot, const std::string& label, const VerifyOptions& opt)
{
  const DDRCore& c = pot.core();
  const Mesh& mesh = c.mesh();
  const int k = c.degree(), q = c.interpolation_degree();
  const Box box = bounding_box(mesh);
  std::mt19937_64 rng(opt.seed);
  MaxRelative gF, Pc, Pd, CF, DT;
  double sc = 0., sd = 0.;

  for (int s = 0; s < opt.samples; ++s) {
    const PolyField fk(k, box.center, box.scale, rng);
    const PolyField fk1(k + 1, box.center, box.scale, rng);
    const VectorXd Ig = c.interpolate_grad([&](const Vec3& x) { return fk1.scalar(x); });
    const VectorXd Ic = c.interpolate_curl(fk);
    const VectorXd Id = c.interpolate_div(fk);
    const VectorXd Ic1 = c.interpolate_curl(fk1);
    const VectorXd Id1 = c.interpolate_div(fk1);

    double eg = 0., rg = 0., ef = 0., rf = 0.;
    for (int iF = 0; iF < mesh.n_faces(); ++iF) {
      const ScalarBasis& P = c.face_bases(iF).P;
      const QuadRule rule = quad_points(mesh, EntityKind::Face, iF, q);
      const VectorXd ref = project([&](const Vec3& x) { return fk1.scalar(x); }, P, k + 1, rule);
      eg = std::max(eg, (c.face_operators(iF).gamma * gather(Ig, face_dofs(mesh, c.grad_space(), iF)) - ref).norm());
      rg = std::max(rg, ref.norm());
      const Vec3 n = mesh.face(iF).normal;
      const VectorXd cref = project([&](const Vec3& x) { return fk1.curl(x).dot(n); }, P, k, rule);
      ef = std::max(ef, (c.face_operators(iF).C * gather(Ic1, face_dofs(mesh, c.curl_space(), iF)) - cref).norm());
      rf = std::max(rf, cref.norm());
    }
    gF.add(eg, rg);
    CF.add(ef, rf);

    double ec = 0., rc = 0., ed = 0., rd = 0., et = 0., rt = 0.;
    for (int iT = 0; iT < mesh.n_elements(); ++iT) {
      const ScalarBasis& P = c.element_bases(iT).P;
      const QuadRule rule = quad_points(mesh, EntityKind::Element, iT, q);
      const VectorXd ref = project_vector(fk, P, k, rule);
      const VectorXd uc = gather(Ic, element_dofs(mesh, c.curl_space(), iT));
      const VectorXd ud = gather(Id, element_dofs(mesh, c.div_space(), iT));
      ec = std::max(ec, (pot.curl_potential(iT) * uc - ref).norm());
      ed = std::max(ed, (pot.div_potential(iT) * ud - ref).norm());
      rc = rd = std::max(rc, ref.norm());
      sc = std::max(sc, ratio((pot.curl_difference(iT) * uc).squaredNorm(), uc.squaredNorm()));
      sd = std::max(sd, ratio((pot.div_difference(iT) * ud).squaredNorm(), ud.squaredNorm()));
      const VectorXd dref = project([&](const Vec3& x) { return fk1.div(x); }, P, k, rule);
      const VectorXd ud1 = gather(Id1, element_dofs(mesh, c.div_space(), iT));
      et = std::max(et, (c.element_operators(iT).D * ud1 - dref).norm());
      rt = std::max(rt, dref.norm());
    }
    Pc.add(ec, rc);
    Pd.add(ed, rd);
    DT.add(et, rt);
  }
  return {
      make_check("consistency.gamma_F_reproduces_Pk+1", label, k, gF.value, opt.tol_consistency),
      make_check("consistency.P_curl_reproduces_Pk", label, k, Pc.value, opt.tol_consistency),
      make_check("consistency.P_div_reproduces_Pk", label, k, Pd.value, opt.tol_consistency),
      make_check("consistency.s_curl_vanishes", label, k, sc, opt.tol_stabilization),
      make_check("consistency.s_div_vanishes", label, k, sd, opt.tol_stabilization),
      make_check("commutation.C_F", label, k, CF.value, opt.tol_consistency),
      make_check("commutation.D_T", label, k, DT.value, opt.tol_commutation),
  };
}

std::vector<Check> check_link_and_projections(const Potentials& pot, const std::string& label,
                                              const VerifyOptions& opt)
{
  const DDRCore& c = pot.core();
  const Mesh& mesh = c.mesh();
  const int k = c.degree();
  std::mt19937_64 rng(opt.seed + 1);
  double link = 0., pR = 0., pRp = 0., pGp = 0., grad_image = 0.;
  const SparseMatrix G = c.grad_operator();
  for (int iT = 0; iT < mesh.n_elements(); ++iT) {
    const ElementBases& eb = c.element_bases(iT);
    const MatrixXd CT = c.local_curl(iT);
    const MatrixXd& Cdot = c.element_operators(iT).C;
    const MatrixXd& Pc = pot.curl_potential(iT);
    const MatrixXd& Pd = pot.div_potential(iT);
    const int nC = static_cast<int>(Pc.cols()), nD = static_cast<int>(Pd.cols());
    const int elemC = nC - c.curl_space().element_block, elemD = nD - c.div_space().element_block;
    const int nR = static_cast<int>(eb.Rkm1.cols()), nG = static_cast<int>(eb.Gkm1.cols());
    const MatrixXd Remb = embed(eb.P, k - 1, k, 3) * eb.Rkm1;
    for (int s = 0; s < opt.samples; ++s) {
      const VectorXd z = random_vector(nC, rng);
      const VectorXd cz = Cdot * z;
      link = std::max(link, ratio((Pd * (CT * z) - cz).norm(), cz.norm()));
      const VectorXd p = Pc * z;
      pR = std::max(pR, ratio((Remb.transpose() * p - z.segment(elemC, nR)).norm(), z.norm()));
      pRp = std::max(pRp, ratio((eb.Rperpk.transpose() * p - z.tail(nC - elemC - nR)).norm(), z.norm()));
      const VectorXd w = random_vector(nD, rng);
      pGp = std::max(pGp, ratio((eb.Gperpk.transpose() * (Pd * w) - w.tail(nD - elemD - nG)).norm(), w.norm()));
    }
  }
  for (int s = 0; s < std::min(opt.samples, 10); ++s) {
    const VectorXd gz = G * random_vector(c.grad_space().dimension(), rng);
    for (int iT = 0; iT < mesh.n_elements(); ++iT) {
      const VectorXd zT = gather(gz, element_dofs(mesh, c.curl_space(), iT));
      const MatrixXd& Cdot = c.element_operators(iT).C;
      grad_image = std::max(grad_image, ratio((Cdot * zT).norm(), Cdot.norm() * zT.norm()));
    }
  }
  return {
      make_check("link.P_div_of_C_T_eq_C_dot", label, k, link, opt.tol_link),
      make_check("projection.P_curl_R", label, k, pR, opt.tol_projection),
      make_check("projection.P_curl_Rperp", label, k, pRp, opt.tol_projection),
      make_check("projection.P_div_Gperp", label, k, pGp, opt.tol_projection),
      make_check("link.gradient_image_in_kernel", label, k, grad_image, opt.tol_projection),
  };
}

std::vector<Check> check_curl0_commutation(const DDRCore& core, const std::string& label, const VerifyOptions& opt)
{
  const Mesh& mesh = core.mesh();
  const int k = core.degree();
  const DofSpace& Xc = core.curl_space();
  const DofSpace& Xd = core.div_space();
  const SparseMatrix C = core.curl_operator();
  const SparseMatrix G = core.grad_operator();

  // Averaging functionals: mean = m . dofs over the entity block.
  std::vector<VectorXd> edge_mean(mesh.n_edges()), face_mean(mesh.n_faces());
  for (int iE = 0; iE < mesh.n_edges(); ++iE) {
    const QuadRule rule = quad_points(mesh, EntityKind::Edge, iE, core.construction_degree());
    const MatrixXd phi = core.edge_basis(iE).values(rule, Xc.edge_block);
    Eigen::Map<const VectorXd> w(rule.weights.data(), rule.weights.size());
    edge_mean[iE] = phi * w / rule.measure();
  }
  for (int iF = 0; iF < mesh.n_faces(); ++iF) {
    const QuadRule rule = quad_points(mesh, EntityKind::Face, iF, core.construction_degree());
    const MatrixXd phi = core.face_bases(iF).P.values(rule, Xd.face_block);
    Eigen::Map<const VectorXd> w(rule.weights.data(), rule.weights.size());
    face_mean[iF] = phi * w / rule.measure();
  }
  auto residual = [&](const VectorXd& v) {
    const VectorXd cv = C * v;
    VectorXd nu(mesh.n_edges());
    for (int iE = 0; iE < mesh.n_edges(); ++iE) nu[iE] = edge_mean[iE].dot(v.segment(Xc.edge_offset(iE), Xc.edge_block));
    double err = 0., ref = 0.;
    for (int iF = 0; iF < mesh.n_faces(); ++iF) {
      const Face& F = mesh.face(iF);
      double curl0 = 0.;
      for (size_t i = 0; i < F.edges.size(); ++i)
        curl0 -= F.edge_orientation[i] * mesh.edge(F.edges[i]).length * nu[F.edges[i]];
      curl0 /= F.area;
      const double lhs = face_mean[iF].dot(cv.segment(Xd.face_offset(iF), Xd.face_block));
      err = std::max(err, std::abs(lhs - curl0));
      ref = std::max({ref, std::abs(lhs), std::abs(curl0)});
    }
    return std::pair<double, double>(err, ref);
  };
  std::mt19937_64 rng(opt.seed + 2);
  MaxRelative random, gradients;
  double grad_abs = 0.;
  for (int s = 0; s < opt.samples; ++s) {
    const VectorXd v = random_vector(Xc.dimension(), rng);
    const auto [e, r] = residual(v);
    random.add(e, r);
  }
  for (int s = 0; s < std::min(opt.samples, 10); ++s) {
    const VectorXd v = G * random_vector(core.grad_space().dimension(), rng);
    const auto [e, r] = residual(v);
    // Both sides vanish on gradients: measure against the size of the input.
    grad_abs = std::max(grad_abs, ratio(e + r, v.lpNorm<Eigen::Infinity>() / mesh.h()));
  }
  return {
      make_check("curl0.commutation_random", label, k, random.value, opt.tol_curl0),
      make_check("curl0.commutation_gradients", label, k, grad_abs, opt.tol_curl0),
  };
}

//------------------------------------------------------------------------------

double NormRatios::curl_constant() const { return std::max(curl_max, 1. / curl_min); }
double NormRatios::div_constant() const { return std::max(div_max, 1. / div_min); }

NormRatios sample_norm_ratios(const Potentials& pot, const Permeability& mu, const VerifyOptions& opt)
{
  const DDRCore& c = pot.core();
  const DiscreteNorms N(pot, mu);
  std::mt19937_64 rng(opt.seed + 3);
  NormRatios r{1e300, 0., 1e300, 0.};
  auto add_curl = [&](const VectorXd& v) {
    const double t = N.curl_tilde(v);
    if (t == 0.) return;
    const double q = N.curl(v) / t;
    r.curl_min = std::min(r.curl_min, q);
    r.curl_max = std::max(r.curl_max, q);
  };
  auto add_div = [&](const VectorXd& w) {
    const double t = N.div_tilde(w);
    if (t == 0.) return;
    const double q = N.div(w) / t;
    r.div_min = std::min(r.div_min, q);
    r.div_max = std::max(r.div_max, q);
  };
  const int nc = c.curl_space().dimension(), nd = c.div_space().dimension();
  for (int s = 0; s < opt.norm_samples; ++s) {
    add_curl(random_vector(nc, rng));
    add_div(random_vector(nd, rng));
  }
  // Unit vectors on the first dof of each block kind.
  const DofSpace& Xc = c.curl_space();
  const DofSpace& Xd = c.div_space();
  for (int off : {Xc.edge_offset(0), Xc.face_offset(0), Xc.element_offset(0)})
    if (off < nc) add_curl(VectorXd::Unit(nc, off));
  for (int off : {Xd.face_offset(0), Xd.element_offset(0)})
    if (off < nd) add_div(VectorXd::Unit(nd, off));
  // Interpolates of a smooth field.
  const ManufacturedCase mc = ManufacturedCase::make(Permeability::unit());
  add_curl(c.interpolate_curl(mc.H));
  add_div(c.interpolate_div(mc.A));
  return r;
}

std::vector<Check> check_norm_equivalence(const std::vector<Mesh>& family, int k, const std::string& label,
                                          const VerifyOptions& opt)
{
  std::vector<Check> out;
  double cmin = 1e300, cmax = 0., dmin = 1e300, dmax = 0.;
  std::ostringstream det;
  det << std::setprecision(4);
  for (const Mesh& m : family) {
    const DDRCore core(m, k);
    const Potentials pot(core);
    const NormRatios r = sample_norm_ratios(pot, Permeability::unit(), opt);
    cmin = std::min(cmin, r.curl_constant());
    cmax = std::max(cmax, r.curl_constant());
    dmin = std::min(dmin, r.div_constant());
    dmax = std::max(dmax, r.div_constant());
    det << "[h=" << m.h() << " curl " << r.curl_min << ".." << r.curl_max << " div " << r.div_min << ".." << r.div_max
        << "] ";
  }
  Check cc = make_check("norm_equivalence.curl_drift", label, k, cmax / cmin, 3., det.str());
  Check cd = make_check("norm_equivalence.div_drift", label, k, dmax / dmin, 3., det.str());
  out.push_back(cc);
  out.push_back(cd);
  return out;
}

double compute_infsup(const Potentials& pot, const Permeability& mu, int cap)
{
  const DDRCore& c = pot.core();
  const int nc = c.curl_space().dimension(), nd = c.div_space().dimension();
  if (nc + nd > cap)
    throw std::invalid_argument("inf-sup: " + std::to_string(nc + nd) + " dofs exceed the dense cap " +
                                std::to_string(cap));
  const Forms forms = assemble_forms(pot, mu);
  const MatrixXd K = dense(system_matrix(forms));
  const MatrixXd Ldiv = dense(assemble_div_product(pot));
  const MatrixXd C = dense(c.curl_operator());
  const MatrixXd D = dense(c.div_operator());
  const MatrixXd Nc = dense(forms.A) + C.transpose() * Ldiv * C;
  const MatrixXd Nd = Ldiv + D.transpose() * D;
  const Eigen::LLT<MatrixXd> lc(Nc), ld(Nd);
  if (lc.info() != Eigen::Success || ld.info() != Eigen::Success)
    throw std::runtime_error("inf-sup: norm Gram matrix is not positive definite");
  MatrixXd L = MatrixXd::Zero(nc + nd, nc + nd);
  L.topLeftCorner(nc, nc) = lc.matrixL();
  L.bottomRightCorner(nd, nd) = ld.matrixL();
  const auto Lt = L.triangularView<Eigen::Lower>();
  MatrixXd M = Lt.solve(K);
  M = Lt.solve(M.transpose()).transpose();
  const VectorXd s = Eigen::BDCSVD<MatrixXd>(M).singularValues();
  return s[s.size() - 1];
}

std::vector<Check> run_battery(const Mesh& mesh, int k, const std::string& label, const VerifyOptions& opt)
{
  const DDRCore core(mesh, k);
  const Potentials pot(core);
  std::vector<Check> out = check_exactness(core, label, opt);
  for (auto part : {check_consistency(pot, label, opt), check_link_and_projections(pot, label, opt),
                    check_curl0_commutation(core, label, opt)})
    out.insert(out.end(), part.begin(), part.end());
  return out;
}

}  // namespace ddr
