// Positive-weight quadrature on edges, polygonal faces and polyhedral elements.
//
// Simplices use collapsed (Duffy) tensor Gauss-Jacobi rules, so every weight is
// positive and the rule on a simplex is exact up to the requested degree.
// Non-triangular faces are fanned from their center, elements are split into
// (face triangle, element center) tetrahedra.

#ifndef DDR_QUADRATURE_HPP
#define DDR_QUADRATURE_HPP

#include <ddr/mesh.hpp>

#include <functional>
#include <vector>

namespace ddr {

enum class EntityKind { Element, Face, Edge };

struct QuadRule {
  std::vector<Vec3> points;
  std::vector<double> weights;
  int exact_degree = 0;

  size_t size() const { return points.size(); }
  double measure() const;
};

/// Gauss-Jacobi nodes/weights on [-1,1] for the weight (1-x)^alpha (1+x)^beta.
void gauss_jacobi(int n, double alpha, double beta, std::vector<double>& nodes,
                  std::vector<double>& weights);

QuadRule quad_segment(const Vec3& a, const Vec3& b, int degree);
QuadRule quad_triangle(const Vec3& a, const Vec3& b, const Vec3& c, int degree);
QuadRule quad_tetrahedron(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d, int degree);

QuadRule quad_points(const Mesh& mesh, EntityKind kind, int index, int degree);

double integrate(const std::function<double(const Vec3&)>& f, const Mesh& mesh, EntityKind kind,
                 int index, int degree);

}  // namespace ddr

#endif
