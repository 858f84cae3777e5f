#include <ddr/quadrature.hpp>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ddr {

double QuadRule::measure() const { return std::accumulate(weights.begin(), weights.end(), 0.); }

// Golub-Welsch on the Jacobi matrix of the monic recurrence.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights)
{
  if (n < 1) throw std::invalid_argument("gauss_jacobi: n must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  const double ab = alpha + beta;
  for (int i = 0; i < n; ++i) {
    const double s = 2. * i + ab;
    J(i, i) = (i == 0) ? (beta - alpha) / (ab + 2.) : (beta * beta - alpha * alpha) / (s * (s + 2.));
    if (i > 0) {
      const double b = 4. * i * (i + alpha) * (i + beta) * (i + ab) / (s * s * (s + 1.) * (s - 1.));
      J(i, i - 1) = J(i - 1, i) = std::sqrt(b);
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  const double mu0 = std::pow(2., ab + 1.) * std::exp(std::lgamma(alpha + 1.) + std::lgamma(beta + 1.) -
                                                    std::lgamma(ab + 2.));
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = es.eigenvalues()(i);
    weights[i] = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
  }
}

namespace {

int points_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

// Rule on [0,1] for the weight (1-t)^alpha.
void collapsed_1d(int n, int alpha, std::vector<double>& t, std::vector<double>& w)
{
  gauss_jacobi(n, alpha, 0., t, w);
  const double scale = std::pow(0.5, alpha + 1);
  for (size_t i = 0; i < t.size(); ++i) {
    t[i] = 0.5 * (1. + t[i]);
    w[i] *= scale;
  }
}

}  // namespace

QuadRule quad_segment(const Vec3& a, const Vec3& b, int degree)
{
  const double len = (b - a).norm();
  if (len == 0.) throw std::runtime_error("quadrature: degenerate segment");
  std::vector<double> t, w;
  collapsed_1d(points_for_degree(degree), 0, t, w);
  QuadRule rule;
  rule.exact_degree = degree;
  for (size_t i = 0; i < t.size(); ++i) {
    rule.points.push_back(a + t[i] * (b - a));
    rule.weights.push_back(w[i] * len);
  }
  return rule;
}

QuadRule quad_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int degree)
{
  const double area = 0.5 * (b - a).cross(c - a).norm();
  if (area == 0.) throw std::runtime_error("quadrature: degenerate triangle");
  const int n = points_for_degree(degree);
  std::vector<double> s, ws, t, wt;
  collapsed_1d(n, 0, s, ws);
  collapsed_1d(n, 1, t, wt);
  QuadRule rule;
  rule.exact_degree = degree;
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back((1. - t[j]) * ((1. - s[i]) * a + s[i] * b) + t[j] * c);
      rule.weights.push_back(2. * area * ws[i] * wt[j]);
    }
  return rule;
}

QuadRule quad_tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int degree)
{
  const double vol = std::abs((b - a).dot((c - a).cross(d - a))) / 6.;
  if (vol == 0.) throw std::runtime_error("quadrature: degenerate tetrahedron");
  const int n = points_for_degree(degree);
  std::vector<double> s, ws, u, wu, t, wt;
  collapsed_1d(n, 0, s, ws);
  collapsed_1d(n, 1, u, wu);
  collapsed_1d(n, 2, t, wt);
  QuadRule rule;
  rule.exact_degree = degree;
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        Vec3 base = (1. - u[j]) * ((1. - s[i]) * a + s[i] * b) + u[j] * c;
        rule.points.push_back((1. - t[l]) * base + t[l] * d);
        rule.weights.push_back(6. * vol * ws[i] * wu[j] * wt[l]);
      }
  return rule;
}

namespace {

void append(QuadRule& into, const QuadRule& from)
{
  into.points.insert(into.points.end(), from.points.begin(), from.points.end());
  into.weights.insert(into.weights.end(), from.weights.begin(), from.weights.end());
}

// Triangles (with the face center fanned in when the face is not a triangle).
std::vector<std::array<Vec3, 3>> face_triangles(const Mesh& mesh, int iF)
{
  const Face& F = mesh.face(iF);
  std::vector<std::array<Vec3, 3>> tris;
  const size_t n = F.vertices.size();
  if (n == 3) {
    tris.push_back({mesh.vertex(F.vertices[0]).x, mesh.vertex(F.vertices[1]).x, mesh.vertex(F.vertices[2]).x});
    return tris;
  }
  for (size_t i = 0; i < n; ++i)
    tris.push_back({F.center, mesh.vertex(F.vertices[i]).x, mesh.vertex(F.vertices[(i + 1) % n]).x});
  return tris;
}

}  // namespace

QuadRule quad_points(const Mesh& mesh, EntityKind kind, int index, int degree)
{
  if (degree < 0) throw std::invalid_argument("quad_points: negative degree");
  QuadRule rule;
  rule.exact_degree = degree;
  switch (kind) {
  case EntityKind::Edge: {
    const Edge& E = mesh.edge(index);
    return quad_segment(mesh.vertex(E.vertices[0]).x, mesh.vertex(E.vertices[1]).x, degree);
  }
  case EntityKind::Face:
    for (const auto& tri : face_triangles(mesh, index)) append(rule, quad_triangle(tri[0], tri[1], tri[2], degree));
    return rule;
  case EntityKind::Element: {
    const Element& T = mesh.element(index);
    if (T.faces.size() == 4 && T.vertices.size() == 4) {
      const auto& v = T.vertices;
      return quad_tetrahedron(mesh.vertex(v[0]).x, mesh.vertex(v[1]).x, mesh.vertex(v[2]).x,
                              mesh.vertex(v[3]).x, degree);
    }
    for (int f : T.faces)
      for (const auto& tri : face_triangles(mesh, f))
        append(rule, quad_tetrahedron(tri[0], tri[1], tri[2], T.center, degree));
    return rule;
  }
  }
  return rule;
}

double integrate(const std::function<double(const Vec3&)>& f, const Mesh& mesh, EntityKind kind,
                 int index, int degree)
{
  const QuadRule rule = quad_points(mesh, kind, index, degree);
  double sum = 0.;
  for (size_t i = 0; i < rule.size(); ++i) sum += rule.weights[i] * f(rule.points[i]);
  return sum;
}

}  // namespace ddr
