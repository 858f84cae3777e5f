// ddr: command-line driver for solves, verification and convergence studies.
//
//   ddr solve --family cartesian --n 4 --degree 1 --out run.csv
//   ddr verify --degree 0 --family cartesian --n 1
//   ddr convergence --family kuhn-tet --levels 1,2,4 --degree 0 --out conv.csv
//   ddr mesh-info --mesh cube.mesh
//
// Exit codes: 0 success, 1 verification failure, 2 usage or input error,
// 3 solver failure.

#include <ddr/parallel.hpp>
#include <ddr/verify.hpp>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

namespace {

constexpr int exit_verify = 1;
constexpr int exit_usage = 2;
constexpr int exit_solver = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MeshSource {
  std::string path;
  std::string family;
  int n = 1;

  void add_options(CLI::App* app, bool family_required = false)
  {
    auto* m = app->add_option("--mesh", path, "Mesh file (ddr-mesh format)");
    auto* f = app->add_option("--family", family, "Built-in family: cube, cartesian, kuhn-tet");
    m->excludes(f);
    if (family_required) f->required();
  }

  bool given() const { return !path.empty() || !family.empty(); }

  ddr::Mesh load() const
  {
    if (!path.empty()) return ddr::load_mesh(path);
    if (family == "cube") return ddr::generate_mesh(ddr::MeshFamily::Cartesian, 1);
    return ddr::generate_mesh(family_enum(), n);
  }

  ddr::MeshFamily family_enum() const
  {
    try {
      return ddr::parse_mesh_family(family);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
  }

  std::string label() const
  {
    if (!path.empty()) return path;
    if (family == "cube") return "cube";
    return family + "-" + std::to_string(n);
  }
};

struct DegreeOption {
  int k = 0;
  bool allow_high = false;

  void add_options(CLI::App* app)
  {
    app->add_option("--degree,-k", k, "Polynomial degree k")->required()->check(CLI::NonNegativeNumber);
    app->add_flag("--allow-high-degree", allow_high, "Permit k > 3");
  }

  void validate() const
  {
    if (k > 3 && !allow_high)
      throw UsageError("degree " + std::to_string(k) + " exceeds the supported cap 3 (use --allow-high-degree)");
  }
};

void configure_logging()
{
  auto logger = spdlog::stderr_color_mt("ddr");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("DDR_LOG")) {
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off")
      spdlog::warn("unknown DDR_LOG level '{}', keeping 'warn'", env);
    else
      spdlog::set_level(level);
  }
}

ddr::Permeability permeability(const std::string& name)
{
  if (name == "unit") return ddr::Permeability::unit();
  if (name == "affine") return ddr::Permeability::affine();
  throw UsageError("unknown permeability '" + name + "'");
}

void write_output(const std::string& path, const std::string& content)
{
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file " + path);
  out << content;
}

std::vector<int> parse_levels(const std::string& spec)
{
  std::vector<int> levels;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      size_t pos = 0;
      const int n = std::stoi(item, &pos);
      if (pos != item.size() || n < 1) throw std::invalid_argument(item);
      levels.push_back(n);
    } catch (const std::exception&) {
      throw UsageError("invalid level '" + item + "' in --levels");
    }
  }
  if (levels.empty()) throw UsageError("--levels is empty");
  return levels;
}

void dump_coo(const std::string& prefix, const ddr::Forms& forms, const ddr::SparseMatrix& K)
{
  const std::pair<const char*, const ddr::SparseMatrix*> items[] = {
      {"A", &forms.A}, {"B", &forms.B}, {"C", &forms.C}, {"K", &K}};
  for (const auto& [name, M] : items) {
    const std::string path = prefix + "_" + name + ".coo";
    std::ofstream out(path);
    if (!out) throw UsageError("cannot open " + path);
    ddr::write_coo(*M, out);
  }
}

int cmd_solve(const MeshSource& src, const DegreeOption& deg, const std::string& mu_name, const std::string& out,
              double solver_tol, bool timings, const std::string& coo_prefix)
{
  const ddr::Mesh mesh = src.load();
  const ddr::ManufacturedCase mc = ddr::ManufacturedCase::make(permeability(mu_name));
  ddr::validate_case(mc);

  using Clock = std::chrono::steady_clock;
  const auto t0 = Clock::now();
  const ddr::DDRCore core(mesh, deg.k);
  const ddr::Potentials pot(core);
  const ddr::Forms forms = ddr::assemble_forms(pot, mc.mu);
  const ddr::VectorXd rhs = ddr::assemble_rhs(pot, mc);
  const ddr::SparseMatrix K = ddr::system_matrix(forms);
  const auto t1 = Clock::now();
  if (!coo_prefix.empty()) dump_coo(coo_prefix, forms, K);
  const ddr::Solution sol = ddr::solve(K, rhs, core.curl_space().dimension(), solver_tol);
  const auto t2 = Clock::now();

  ddr::RunResult r;
  r.h = mesh.h();
  r.error = ddr::energy_error(core, forms, mc, sol);
  r.dim_curl = core.curl_space().dimension();
  r.dim_div = core.div_space().dimension();
  r.residual = sol.residual;
  r.assembly_time = std::chrono::duration<double>(t1 - t0).count();
  r.solve_time = std::chrono::duration<double>(t2 - t1).count();
  std::ostringstream csv;
  ddr::write_csv(csv, {r}, timings);
  write_output(out, csv.str());

  const ddr::DiscreteNorms norms(pot, mc.mu);
  std::ostringstream os;
  os << std::setprecision(6) << std::scientific;
  os << "mesh " << src.label() << "  k=" << deg.k << "  mu=" << mu_name << "  solver=" << sol.solver << "\n";
  os << "||H_h||_curl = " << norms.curl(sol.H) << "   ||A_h||_div = " << norms.div(sol.A) << "\n";
  os << "||C_h H_h|| = " << (norms.curl_operator() * sol.H).norm()
     << "   energy error = " << r.error << "   residual = " << sol.residual << "\n";
  (out.empty() || out == "-" ? std::cerr : std::cout) << os.str();
  return 0;
}

int cmd_verify(const MeshSource& src, const DegreeOption& deg, const ddr::VerifyOptions& opt,
               const std::string& report_path, bool json)
{
  struct Target {
    ddr::Mesh mesh;
    std::string label;
  };
  std::vector<Target> targets;
  std::vector<ddr::Mesh> norm_family;
  if (src.given()) {
    targets.push_back({src.load(), src.label()});
    if (src.path.empty() && src.family != "cube") {
      const auto fam = src.family_enum();
      norm_family = {ddr::generate_mesh(fam, src.n), ddr::generate_mesh(fam, 2 * src.n)};
    }
  } else {
    targets.push_back({ddr::generate_mesh(ddr::MeshFamily::Cartesian, 1), "cube"});
    targets.push_back({ddr::generate_mesh(ddr::MeshFamily::Cartesian, 2), "cartesian-2"});
    targets.push_back({ddr::generate_mesh(ddr::MeshFamily::KuhnTet, 1), "kuhn-tet-1"});
    for (int n : {1, 2, 4}) norm_family.push_back(ddr::generate_mesh(ddr::MeshFamily::Cartesian, n));
  }

  ddr::Report report;
  for (const Target& t : targets) {
    report.add(ddr::run_battery(t.mesh, deg.k, t.label, opt));
    const ddr::DDRCore core(t.mesh, deg.k);
    const ddr::Potentials pot(core);
    const int ndofs = core.curl_space().dimension() + core.div_space().dimension();
    if (ndofs <= opt.infsup_cap) {
      for (const auto& mu : {ddr::Permeability::unit(), ddr::Permeability::affine()}) {
        const double beta = ddr::compute_infsup(pot, mu, opt.infsup_cap);
        report.add(ddr::Check{"infsup.beta_positive." + mu.name, t.label, deg.k, beta > 0., false, beta, 0., ""});
      }
    } else {
      spdlog::info("{}: {} dofs above inf-sup cap {}, skipped", t.label, ndofs, opt.infsup_cap);
    }
  }
  if (!norm_family.empty()) {
    const std::string label = src.given() ? src.family : "cartesian";
    report.add(ddr::check_norm_equivalence(norm_family, deg.k, label, opt));
  }

  std::ostringstream os;
  if (json)
    os << report.to_json().dump(2) << "\n";
  else
    report.write_text(os);
  if (report_path.empty()) {
    std::cout << os.str();
  } else {
    write_output(report_path, os.str());
    std::ostringstream summary;
    report.write_text(summary);
    std::string text = summary.str();
    text.pop_back();
    std::cout << text.substr(text.find_last_of('\n') + 1) << "\n";
  }
  return report.passed() ? 0 : exit_verify;
}

int cmd_convergence(const MeshSource& src, const std::string& levels_spec, const DegreeOption& deg,
                    const std::string& mu_name, const std::string& out, double solver_tol, bool timings)
{
  const auto family = src.family_enum();
  const ddr::ManufacturedCase mc = ddr::ManufacturedCase::make(permeability(mu_name));
  ddr::validate_case(mc);
  std::vector<ddr::Mesh> meshes;
  for (int n : parse_levels(levels_spec)) meshes.push_back(ddr::generate_mesh(family, n));
  const auto rows = ddr::convergence_run(meshes, deg.k, mc, solver_tol);
  std::ostringstream csv;
  ddr::write_csv(csv, rows, timings);
  write_output(out, csv.str());
  return 0;
}

int cmd_mesh_info(const MeshSource& src)
{
  const ddr::Mesh mesh = src.load();
  const ddr::MeshStats s = ddr::mesh_stats(mesh);
  const auto [fmin, fmax] = std::minmax_element(s.faces_per_element.begin(), s.faces_per_element.end());
  const auto [emin, emax] = std::minmax_element(s.edges_per_element.begin(), s.edges_per_element.end());
  std::ostringstream os;
  os << std::setprecision(6);
  os << "mesh              " << src.label() << "\n";
  os << "vertices          " << s.n_vertices << "\n";
  os << "edges             " << s.n_edges << "\n";
  os << "faces             " << s.n_faces << " (" << s.n_boundary_faces << " boundary)\n";
  os << "elements          " << s.n_elements << "\n";
  os << "h                 " << s.h << "\n";
  os << "faces/element     " << *fmin << ".." << *fmax << "\n";
  os << "edges/element     " << *emin << ".." << *emax << "\n";
  os << "max h_T/h_F       " << s.max_element_face_ratio << "\n";
  os << "max h_F/h_E       " << s.max_face_edge_ratio << "\n";
  os << "euler V-E+F-T     " << ddr::euler_characteristic(mesh) << "\n";
  std::cout << os.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv)
{
  configure_logging();

  CLI::App app{"Discrete de Rham magnetostatics solver"};
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "Worker threads for element loops")->check(CLI::PositiveNumber);

  MeshSource src;
  DegreeOption deg;
  std::string mu_name = "unit", out, levels, report_path, coo_prefix;
  double solver_tol = 1e-10;
  bool timings = false, json = false;
  ddr::VerifyOptions vopt;

  auto* solve = app.add_subcommand("solve", "Solve the manufactured problem on one mesh");
  src.add_options(solve);
  solve->add_option("--n", src.n, "Subdivisions per axis for --family")->check(CLI::PositiveNumber);
  deg.add_options(solve);
  solve->add_option("--permeability", mu_name, "unit or affine");
  solve->add_option("--out", out, "CSV output file (default stdout)");
  solve->add_option("--solver-tol", solver_tol, "Maximum relative residual");
  solve->add_flag("--timings", timings, "Write measured times to the CSV");
  solve->add_option("--dump-coo", coo_prefix, "Write A, B, C and the system matrix as PREFIX_*.coo");

  auto* verify = app.add_subcommand("verify", "Run the verification battery");
  src.add_options(verify);
  verify->add_option("--n", src.n, "Subdivisions per axis for --family")->check(CLI::PositiveNumber);
  deg.add_options(verify);
  verify->add_option("--report", report_path, "Write the report to FILE");
  verify->add_flag("--json", json, "JSON report");
  verify->add_option("--samples", vopt.samples);
  verify->add_option("--norm-samples", vopt.norm_samples);
  verify->add_option("--seed", vopt.seed);
  verify->add_option("--infsup-cap", vopt.infsup_cap);
  verify->add_option("--rank-threshold", vopt.rank_threshold);
  verify->add_option("--rank-gap", vopt.rank_gap);
  verify->add_option("--tol-exact", vopt.tol_exact);
  verify->add_option("--tol-commutation", vopt.tol_commutation);
  verify->add_option("--tol-link", vopt.tol_link);
  verify->add_option("--tol-projection", vopt.tol_projection);
  verify->add_option("--tol-consistency", vopt.tol_consistency);
  verify->add_option("--tol-stabilization", vopt.tol_stabilization);
  verify->add_option("--tol-curl0", vopt.tol_curl0);

  auto* conv = app.add_subcommand("convergence", "Run a refinement study and emit the results table");
  src.add_options(conv, true);
  conv->add_option("--levels", levels, "Comma-separated subdivisions, e.g. 2,4,8")->required();
  deg.add_options(conv);
  conv->add_option("--permeability", mu_name, "unit or affine");
  conv->add_option("--out", out, "CSV output file (default stdout)");
  conv->add_option("--solver-tol", solver_tol, "Maximum relative residual");
  conv->add_flag("--timings", timings, "Write measured times to the CSV");

  auto* info = app.add_subcommand("mesh-info", "Print mesh statistics");
  src.add_options(info);
  info->add_option("--n", src.n, "Subdivisions per axis for --family")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_usage;
  }

  try {
    ddr::set_thread_count(threads);
    if (!*info) deg.validate();
    if ((*solve || *info) && !src.given()) throw UsageError("one of --mesh or --family is required");
    if (*solve) return cmd_solve(src, deg, mu_name, out, solver_tol, timings, coo_prefix);
    if (*verify) return cmd_verify(src, deg, vopt, report_path, json);
    if (*conv) return cmd_convergence(src, levels, deg, mu_name, out, solver_tol, timings);
    return cmd_mesh_info(src);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ddr::MeshError& e) {
    std::cerr << "mesh error: " << e.what() << "\n";
    return exit_usage;
  } catch (const ddr::SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return exit_solver;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_usage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_solver;
  }
}
