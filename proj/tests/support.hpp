// Shared helpers for the unit tests: data paths and random polynomial fields
// with analytic derivatives, written independently of the library.

#ifndef DDR_TESTS_SUPPORT_HPP
#define DDR_TESTS_SUPPORT_HPP

#include <ddr/mesh.hpp>

#include <array>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace ddr::test {

inline std::string data_path(const std::string& name) { return std::string(DDR_TEST_DATA) + "/" + name; }

inline Mesh data_mesh(const std::string& name) { return load_mesh(data_path(name)); }

/// Single-element meshes covering the element shapes in tests/data.
inline const std::vector<std::string>& element_meshes()
{
  static const std::vector<std::string> names = {"cube.mesh",      "tet.mesh",      "prism.mesh",
                                                 "pyramid.mesh",   "cut_corner.mesh", "hex_prism.mesh",
                                                 "parallelepiped.mesh", "cube_reversed.mesh"};
  return names;
}

/// Random vector polynomial of total degree <= d, coefficients in [-1, 1].
class RandomField {
public:
  RandomField(int degree, std::mt19937_64& rng)
  {
    std::uniform_real_distribution<double> U(-1., 1.);
    for (int a = 0; a <= degree; ++a)
      for (int b = 0; a + b <= degree; ++b)
        for (int c = 0; a + b + c <= degree; ++c) {
          m_exp.push_back({a, b, c});
          m_coef.emplace_back(U(rng), U(rng), U(rng));
        }
  }

  Vec3 operator()(const Vec3& x) const
  {
    Vec3 v = Vec3::Zero();
    for (size_t i = 0; i < m_exp.size(); ++i) v += m_coef[i] * mono(x, m_exp[i]);
    return v;
  }

  double scalar(const Vec3& x) const { return (*this)(x)[0]; }

  Vec3 grad_scalar(const Vec3& x) const
  {
    Vec3 g = Vec3::Zero();
    for (size_t i = 0; i < m_exp.size(); ++i)
      for (int j = 0; j < 3; ++j) g[j] += m_coef[i][0] * dmono(x, m_exp[i], j);
    return g;
  }

  /// d v_i / d x_j
  double partial(const Vec3& x, int i, int j) const
  {
    double s = 0.;
    for (size_t n = 0; n < m_exp.size(); ++n) s += m_coef[n][i] * dmono(x, m_exp[n], j);
    return s;
  }

  Vec3 curl(const Vec3& x) const
  {
    return {partial(x, 2, 1) - partial(x, 1, 2), partial(x, 0, 2) - partial(x, 2, 0),
            partial(x, 1, 0) - partial(x, 0, 1)};
  }

  double div(const Vec3& x) const { return partial(x, 0, 0) + partial(x, 1, 1) + partial(x, 2, 2); }

private:
  static double mono(const Vec3& x, const std::array<int, 3>& e)
  {
    return std::pow(x[0], e[0]) * std::pow(x[1], e[1]) * std::pow(x[2], e[2]);
  }
  static double dmono(const Vec3& x, std::array<int, 3> e, int j)
  {
    if (e[j] == 0) return 0.;
    const double f = e[j];
    --e[j];
    return f * mono(x, e);
  }

  std::vector<std::array<int, 3>> m_exp;
  std::vector<Vec3> m_coef;
};

}  // namespace ddr::test

#endif
