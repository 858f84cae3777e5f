#include "support.hpp"

#include <ddr/mesh.hpp>
#include <ddr/scheme.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace ddr;

namespace {

MeshError::Kind parse_error_kind(const std::string& text)
{
  std::istringstream in(text);
  try {
    parse_mesh(in);
  } catch (const MeshError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised for:\n" << text;
  return MeshError::Kind::Parse;
}

// Sum over the boundary of T of omega_TF |F| n_F; zero for a closed element.
Vec3 closure_defect(const Mesh& m, int iT)
{
  const Element& T = m.element(iT);
  Vec3 s = Vec3::Zero();
  for (size_t i = 0; i < T.faces.size(); ++i) s += T.face_orientation[i] * m.face(T.faces[i]).area * m.face(T.faces[i]).normal;
  return s;
}

const char* cube_text =
    "ddr-mesh 1\n"
    "vertices 8\n0 0 0\n1 0 0\n0 1 0\n1 1 0\n0 0 1\n1 0 1\n0 1 1\n1 1 1\n"
    "faces 6\n0 2 3 1\n4 5 7 6\n0 1 5 4\n2 6 7 3\n0 4 6 2\n1 3 7 5\n"
    "elements 1\n0 1 2 3 4 5\n";

}  // namespace

TEST(Mesh, UnitCubeFile)
{
  const Mesh m = test::data_mesh("cube.mesh");
  EXPECT_EQ(m.n_vertices(), 8);
  EXPECT_EQ(m.n_edges(), 12);
  EXPECT_EQ(m.n_faces(), 6);
  EXPECT_EQ(m.n_elements(), 1);
  EXPECT_EQ(m.boundary_faces().size(), 6u);
  EXPECT_NEAR(m.h(), std::sqrt(3.), 1e-15);
  EXPECT_NEAR(m.element(0).volume, 1., 1e-14);
}

TEST(Mesh, ReversedLoopsFlipFaceOrientation)
{
  const Mesh a = test::data_mesh("cube.mesh");
  const Mesh b = test::data_mesh("cube_reversed.mesh");
  ASSERT_EQ(a.n_faces(), b.n_faces());
  for (int i = 0; i < a.n_faces(); ++i) {
    const double flip = a.face(i).normal.dot(b.face(i).normal);
    EXPECT_NEAR(std::abs(flip), 1., 1e-14);
    EXPECT_EQ(a.element(0).face_orientation[i] * flip > 0., b.element(0).face_orientation[i] > 0);
    // Outward normal is a geometric property.
    const Vec3 na = a.element(0).face_orientation[i] * a.face(i).normal;
    const Vec3 nb = b.element(0).face_orientation[i] * b.face(i).normal;
    EXPECT_LT((na - nb).norm(), 1e-14);
  }
  EXPECT_LT(closure_defect(b, 0).norm(), 1e-14);
  EXPECT_NEAR(b.element(0).volume, 1., 1e-14);
}

TEST(Mesh, OutwardNormalsAndClosedBoundaries)
{
  for (const auto& name : test::element_meshes()) {
    SCOPED_TRACE(name);
    const Mesh m = test::data_mesh(name);
    for (int iT = 0; iT < m.n_elements(); ++iT) {
      EXPECT_LT(closure_defect(m, iT).norm(), 1e-13);
      const Element& T = m.element(iT);
      for (size_t i = 0; i < T.faces.size(); ++i) {
        const Face& F = m.face(T.faces[i]);
        EXPECT_GT(T.face_orientation[i] * F.normal.dot(F.center - T.center), 0.);
      }
    }
    for (int iF = 0; iF < m.n_faces(); ++iF) {
      const Face& F = m.face(iF);
      Vec3 s = Vec3::Zero();
      for (size_t j = 0; j < F.edges.size(); ++j) {
        const Edge& E = m.edge(F.edges[j]);
        EXPECT_NEAR(F.edge_normals[j].dot(F.normal), 0., 1e-14);
        EXPECT_NEAR(F.edge_normals[j].dot(E.tangent), 0., 1e-14);
        EXPECT_GT(F.edge_orientation[j] * F.edge_normals[j].dot(E.center - F.center), 0.);
        s += F.edge_orientation[j] * E.length * F.edge_normals[j];
      }
      EXPECT_LT(s.norm(), 1e-14);
    }
  }
}

TEST(Mesh, EdgeTangentsPointToHigherIndex)
{
  const Mesh m = generate_mesh(MeshFamily::KuhnTet, 2);
  for (const Edge& E : m.edges()) {
    ASSERT_LT(E.vertices[0], E.vertices[1]);
    const Vec3 d = m.vertex(E.vertices[1]).x - m.vertex(E.vertices[0]).x;
    EXPECT_LT((d / d.norm() - E.tangent).norm(), 1e-15);
    EXPECT_NEAR(E.length, d.norm(), 1e-15);
  }
}

TEST(Mesh, InternalFaceSeenWithOppositeOrientations)
{
  const Mesh m = test::data_mesh("two_prisms.mesh");
  ASSERT_EQ(m.n_elements(), 2);
  int internal = 0;
  for (int iF = 0; iF < m.n_faces(); ++iF) {
    if (m.is_boundary_face(iF)) continue;
    ++internal;
    const auto& els = m.face(iF).elements;
    ASSERT_EQ(els.size(), 2u);
    const int w0 = m.element(els[0]).face_orientation[m.local_face_index(els[0], iF)];
    const int w1 = m.element(els[1]).face_orientation[m.local_face_index(els[1], iF)];
    EXPECT_EQ(w0, -w1);
  }
  EXPECT_EQ(internal, 1);
  EXPECT_NEAR(m.element(0).volume + m.element(1).volume, 1., 1e-14);
}

TEST(Mesh, CartesianCounts)
{
  // (n+1)^3 vertices, 3n(n+1)^2 edges, 3n^2(n+1) faces, n^3 elements.
  const Mesh m = generate_mesh(MeshFamily::Cartesian, 2);
  EXPECT_EQ(m.n_vertices(), 27);
  EXPECT_EQ(m.n_edges(), 54);
  EXPECT_EQ(m.n_faces(), 36);
  EXPECT_EQ(m.n_elements(), 8);
  EXPECT_EQ(m.boundary_faces().size(), 24u);
  for (int n = 1; n <= 4; ++n) EXPECT_NEAR(generate_mesh(MeshFamily::Cartesian, n).h(), std::sqrt(3.) / n, 1e-14);
}

TEST(Mesh, KuhnSubdivision)
{
  const Mesh m = generate_mesh(MeshFamily::KuhnTet, 1);
  EXPECT_EQ(m.n_elements(), 6);
  EXPECT_EQ(m.n_vertices(), 8);
  EXPECT_EQ(m.n_edges(), 19);
  EXPECT_EQ(m.n_faces(), 18);
  int origin = -1, opposite = -1;
  for (int i = 0; i < m.n_vertices(); ++i) {
    if (m.vertex(i).x.norm() < 1e-14) origin = i;
    if ((m.vertex(i).x - Vec3(1, 1, 1)).norm() < 1e-14) opposite = i;
  }
  ASSERT_GE(origin, 0);
  ASSERT_GE(opposite, 0);
  for (const Element& T : m.elements()) {
    EXPECT_EQ(T.faces.size(), 4u);
    EXPECT_EQ(T.vertices.size(), 4u);
    EXPECT_NE(std::find(T.vertices.begin(), T.vertices.end(), origin), T.vertices.end());
    EXPECT_NE(std::find(T.vertices.begin(), T.vertices.end(), opposite), T.vertices.end());
    EXPECT_NEAR(T.diameter, std::sqrt(3.), 1e-14);
    EXPECT_NEAR(T.volume, 1. / 6., 1e-15);
  }
  const Mesh m2 = generate_mesh(MeshFamily::KuhnTet, 2);
  EXPECT_EQ(m2.n_vertices(), 27);
  EXPECT_EQ(m2.n_edges(), 98);
  EXPECT_EQ(m2.n_faces(), 120);
  EXPECT_EQ(m2.n_elements(), 48);
}

TEST(Mesh, EulerCharacteristic)
{
  for (int n = 1; n <= 3; ++n) {
    EXPECT_EQ(euler_characteristic(generate_mesh(MeshFamily::Cartesian, n)), 1);
    EXPECT_EQ(euler_characteristic(generate_mesh(MeshFamily::KuhnTet, n)), 1);
  }
  for (const auto& name : test::element_meshes()) EXPECT_EQ(euler_characteristic(test::data_mesh(name)), 1) << name;
}

TEST(Mesh, VolumesSumToDomain)
{
  for (auto fam : {MeshFamily::Cartesian, MeshFamily::KuhnTet}) {
    const Mesh m = generate_mesh(fam, 3);
    double v = 0.;
    for (const Element& T : m.elements()) v += T.volume;
    EXPECT_NEAR(v, 1., 1e-13);
  }
}

TEST(Mesh, Stats)
{
  const MeshStats s = mesh_stats(test::data_mesh("cube.mesh"));
  EXPECT_NEAR(s.h, std::sqrt(3.), 1e-15);
  ASSERT_EQ(s.element_face_ratios.size(), 1u);
  for (double r : s.element_face_ratios[0]) EXPECT_NEAR(r, std::sqrt(3.) / std::sqrt(2.), 1e-14);
  EXPECT_EQ(s.faces_per_element[0], 6);
  EXPECT_EQ(s.edges_per_element[0], 12);
  EXPECT_NEAR(s.max_face_edge_ratio, std::sqrt(2.), 1e-14);
}

TEST(Mesh, RoundTrip)
{
  const Mesh a = test::data_mesh("cut_corner.mesh");
  std::stringstream ss;
  write_mesh(a, ss);
  const Mesh b = parse_mesh(ss);
  ASSERT_EQ(a.n_vertices(), b.n_vertices());
  ASSERT_EQ(a.n_edges(), b.n_edges());
  ASSERT_EQ(a.n_faces(), b.n_faces());
  for (int i = 0; i < a.n_vertices(); ++i) EXPECT_EQ(a.vertex(i).x, b.vertex(i).x);
  for (int i = 0; i < a.n_faces(); ++i) EXPECT_EQ(a.face(i).vertices, b.face(i).vertices);
  EXPECT_EQ(a.element(0).volume, b.element(0).volume);
}

TEST(Mesh, CommentsAndBlankLines)
{
  std::istringstream in(std::string("# header comment\n\n") + cube_text + "  # trailing comment\n");
  EXPECT_EQ(parse_mesh(in).n_edges(), 12);
}

TEST(Mesh, ParseErrors)
{
  using K = MeshError::Kind;
  const std::string cube = cube_text;
  EXPECT_EQ(parse_error_kind(""), K::Parse);
  EXPECT_EQ(parse_error_kind("ddr-mesh 2\n" + cube.substr(cube.find('\n') + 1)), K::Parse);
  EXPECT_EQ(parse_error_kind(cube + "extra\n"), K::Parse);
  // Truncated inside the vertex block.
  EXPECT_EQ(parse_error_kind(cube.substr(0, cube.find("0 1 1"))), K::Parse);
  // Non-numeric coordinate.
  std::string bad = cube;
  bad.replace(bad.find("1 0 0"), 5, "1 x 0");
  EXPECT_EQ(parse_error_kind(bad), K::Parse);
  // Negative index.
  bad = cube;
  bad.replace(bad.find("0 2 3 1"), 7, "0 2 3 -1");
  EXPECT_EQ(parse_error_kind(bad), K::Parse);
}

TEST(Mesh, TopologyErrors)
{
  using K = MeshError::Kind;
  const std::string cube = cube_text;
  // Element omitting one face: open boundary.
  std::string open = cube;
  open.replace(open.find("0 1 2 3 4 5"), 11, "0 1 2 3 4");
  std::istringstream in(open);
  try {
    parse_mesh(in);
    FAIL() << "open element accepted";
  } catch (const MeshError& e) {
    EXPECT_EQ(e.kind(), K::Topology);
    EXPECT_NE(std::string(e.what()).find("open boundary"), std::string::npos);
  }
  // Vertex index out of range.
  std::string oob = cube;
  oob.replace(oob.find("0 2 3 1"), 7, "0 2 3 9");
  EXPECT_EQ(parse_error_kind(oob), K::Topology);
  // Face referenced by no element.
  std::string orphan = cube;
  orphan.replace(orphan.find("faces 6"), 7, "faces 7");
  orphan.insert(orphan.find("elements"), "0 1 2\n");
  EXPECT_EQ(parse_error_kind(orphan), K::Topology);
}

TEST(Mesh, GeometryErrors)
{
  std::string warped = cube_text;
  warped.replace(warped.find("1 1 1"), 5, "1 1 1.2");
  EXPECT_EQ(parse_error_kind(warped), MeshError::Kind::Geometry);
}

TEST(Mesh, FamilyNames)
{
  EXPECT_EQ(parse_mesh_family("cartesian"), MeshFamily::Cartesian);
  EXPECT_EQ(parse_mesh_family("kuhn-tet"), MeshFamily::KuhnTet);
  EXPECT_EQ(to_string(MeshFamily::KuhnTet), "kuhn-tet");
  EXPECT_THROW(parse_mesh_family("voronoi"), std::invalid_argument);
}
