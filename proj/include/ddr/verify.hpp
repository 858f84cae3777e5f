// Numerical checks of the structural properties of the discrete sequence and
// scheme. Every check yields pass/fail records with the measured value and the
// tolerance it was compared with.

#ifndef DDR_VERIFY_HPP
#define DDR_VERIFY_HPP

#include <ddr/scheme.hpp>

#include <json.hpp>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace ddr {

struct Check {
  std::string name;
  std::string mesh;
  int k = 0;
  bool pass = false;
  bool inconclusive = false;
  double value = 0.;
  double tolerance = 0.;
  std::string detail;
};

class Report {
public:
  void add(const Check& c) { m_checks.push_back(c); }
  void add(const std::vector<Check>& cs) { m_checks.insert(m_checks.end(), cs.begin(), cs.end()); }
  const std::vector<Check>& checks() const { return m_checks; }
  bool passed() const;

  void write_text(std::ostream& out) const;
  nlohmann::json to_json() const;

private:
  std::vector<Check> m_checks;
};

struct VerifyOptions {
  int samples = 50;        // random fields / dof vectors per check
  int norm_samples = 100;  // random dof vectors for norm equivalence
  std::uint64_t seed = 20210401;
  int infsup_cap = 6000;   // dense inf-sup limit on total dofs
  double rank_threshold = 1e-9;
  double rank_gap = 10.;
  double tol_exact = 1e-11;        // complex property, relative
  double tol_commutation = 1e-12;
  double tol_link = 1e-12;
  double tol_projection = 1e-11;
  double tol_consistency = 1e-10;
  double tol_stabilization = 1e-18;
  double tol_curl0 = 1e-12;
};

/// Numerical rank from singular values: relative threshold plus gap check.
struct RankInfo {
  int rank = 0;
  double gap = 0.;  // sigma_r / sigma_{r+1}
  bool conclusive = true;
};
RankInfo numerical_rank(const Eigen::MatrixXd& A, double threshold, double gap);

std::vector<Check> check_exactness(const DDRCore& core, const std::string& label, const VerifyOptions& opt = {});
std::vector<Check> check_consistency(const Potentials& pot, const std::string& label, const VerifyOptions& opt = {});
std::vector<Check> check_link_and_projections(const Potentials& pot, const std::string& label,
                                              const VerifyOptions& opt = {});
std::vector<Check> check_curl0_commutation(const DDRCore& core, const std::string& label,
                                           const VerifyOptions& opt = {});

struct NormRatios {
  double curl_min = 0., curl_max = 0., div_min = 0., div_max = 0.;
  double curl_constant() const;  // max(max, 1/min)
  double div_constant() const;
};
NormRatios sample_norm_ratios(const Potentials& pot, const Permeability& mu, const VerifyOptions& opt = {});
/// Norm equivalence over a refinement family; fails if a constant drifts by more than 3x.
std::vector<Check> check_norm_equivalence(const std::vector<Mesh>& family, int k, const std::string& label,
                                          const VerifyOptions& opt = {});

/// Smallest singular value of N^{-1/2} K N^{-1/2}; throws std::invalid_argument
/// above the dof cap.
double compute_infsup(const Potentials& pot, const Permeability& mu, int cap = 6000);

/// Exactness, consistency, link/projection and lowest-order commutation on one mesh.
std::vector<Check> run_battery(const Mesh& mesh, int k, const std::string& label, const VerifyOptions& opt = {});

}  // namespace ddr

#endif
