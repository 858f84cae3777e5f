// Polyhedral mesh with derived edges, orientations and normals.
//
// A mesh is built once (from a file or a generator) and is immutable afterwards.
// Conventions:
//  - edge tangents point from the lower to the higher global vertex index;
//  - face normals follow the vertex loop (Newell's formula);
//  - omega_TF = +1 iff n_F points out of T, omega_FE = +1 iff omega_FE n_FE points out of F,
//    with n_FE = n_F x t_E so that (t_E, n_FE, n_F) is right-handed.

#ifndef DDR_MESH_HPP
#define DDR_MESH_HPP

#include <Eigen/Dense>

#include <array>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace ddr {

using Vec3 = Eigen::Vector3d;

/// Errors raised while reading or deriving a mesh.
class MeshError : public std::runtime_error {
public:
  enum class Kind { Parse, Topology, Geometry };

  MeshError(Kind kind, const std::string& what) : std::runtime_error(what), m_kind(kind) {}
  Kind kind() const noexcept { return m_kind; }

private:
  Kind m_kind;
};

struct Vertex {
  Vec3 x;
};

struct Edge {
  std::array<int, 2> vertices;  // vertices[0] < vertices[1]
  Vec3 tangent;
  Vec3 center;
  double length = 0.;
};

struct Face {
  std::vector<int> vertices;       // loop order as read
  std::vector<int> edges;          // edges[i] joins vertices[i] and vertices[i+1]
  std::vector<int> edge_orientation;  // omega_FE
  std::vector<Vec3> edge_normals;     // n_FE
  Vec3 normal;
  Vec3 center;  // arithmetic mean of the vertices
  double area = 0.;
  double diameter = 0.;
  std::vector<int> elements;  // one (boundary) or two (internal) elements
};

struct Element {
  std::vector<int> faces;
  std::vector<int> face_orientation;  // omega_TF
  std::vector<int> edges;             // ascending global index
  std::vector<int> vertices;          // ascending global index
  Vec3 center;                        // arithmetic mean of the vertices
  double volume = 0.;
  double diameter = 0.;
};

class Mesh {
public:
  /// Builds all derived data from raw vertex/face/element lists.
  /// Throws MeshError on any topology or geometry inconsistency.
  Mesh(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces,
       std::vector<std::vector<int>> elements);

  const std::vector<Vertex>& vertices() const { return m_vertices; }
  const std::vector<Edge>& edges() const { return m_edges; }
  const std::vector<Face>& faces() const { return m_faces; }
  const std::vector<Element>& elements() const { return m_elements; }

  const Vertex& vertex(int i) const { return m_vertices[i]; }
  const Edge& edge(int i) const { return m_edges[i]; }
  const Face& face(int i) const { return m_faces[i]; }
  const Element& element(int i) const { return m_elements[i]; }

  int n_vertices() const { return static_cast<int>(m_vertices.size()); }
  int n_edges() const { return static_cast<int>(m_edges.size()); }
  int n_faces() const { return static_cast<int>(m_faces.size()); }
  int n_elements() const { return static_cast<int>(m_elements.size()); }

  bool is_boundary_face(int iF) const { return m_faces[iF].elements.size() == 1; }
  const std::vector<int>& boundary_faces() const { return m_boundary_faces; }

  /// Global mesh size h = max_T h_T.
  double h() const { return m_h; }

  /// Position of face iF inside the face list of element iT, or -1.
  int local_face_index(int iT, int iF) const;

private:
  void derive();

  std::vector<Vertex> m_vertices;
  std::vector<Edge> m_edges;
  std::vector<Face> m_faces;
  std::vector<Element> m_elements;
  std::vector<int> m_boundary_faces;
  double m_h = 0.;
};

/// Mesh families that can be generated on the unit cube.
enum class MeshFamily { Cartesian, KuhnTet };

MeshFamily parse_mesh_family(const std::string& name);
std::string to_string(MeshFamily family);

/// Reads a mesh in the "ddr-mesh 1" text format.
Mesh load_mesh(const std::filesystem::path& path);
Mesh parse_mesh(std::istream& in);

/// Writes a mesh in the "ddr-mesh 1" text format (face loops as stored).
void save_mesh(const Mesh& mesh, const std::filesystem::path& path);
void write_mesh(const Mesh& mesh, std::ostream& out);

/// Mesh of (0,1)^3 with n subdivisions per axis.
Mesh generate_mesh(MeshFamily family, int n);

struct MeshStats {
  double h = 0.;
  int n_vertices = 0, n_edges = 0, n_faces = 0, n_elements = 0, n_boundary_faces = 0;
  std::vector<std::vector<double>> element_face_ratios;  // h_T / h_F per element face
  std::vector<std::vector<double>> face_edge_ratios;     // h_F / h_E per face edge
  std::vector<int> faces_per_element;
  std::vector<int> edges_per_element;
  double max_element_face_ratio = 0., max_face_edge_ratio = 0.;
};

MeshStats mesh_stats(const Mesh& mesh);

}  // namespace ddr

#endif
