#include <ddr/mesh.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

namespace ddr {

namespace {

MeshError topology_error(const std::string& what) { return {MeshError::Kind::Topology, what}; }
MeshError geometry_error(const std::string& what) { return {MeshError::Kind::Geometry, what}; }

double max_pairwise_distance(const std::vector<Vec3>& points)
{
  double d = 0.;
  for (size_t i = 0; i < points.size(); ++i)
    for (size_t j = i + 1; j < points.size(); ++j)
      d = std::max(d, (points[i] - points[j]).norm());
  return d;
}

}  // namespace

Mesh::Mesh(std::vector<Vec3> vertices, std::vector<std::vector<int>> faces,
           std::vector<std::vector<int>> elements)
{
  m_vertices.reserve(vertices.size());
  for (const auto& x : vertices) m_vertices.push_back(Vertex{x});

  const int nV = static_cast<int>(vertices.size());
  m_faces.resize(faces.size());
  for (size_t iF = 0; iF < faces.size(); ++iF) {
    if (faces[iF].size() < 3)
      throw topology_error("face " + std::to_string(iF) + " has fewer than 3 vertices");
    std::set<int> unique(faces[iF].begin(), faces[iF].end());
    if (unique.size() != faces[iF].size())
      throw topology_error("face " + std::to_string(iF) + " repeats a vertex");
    for (int v : faces[iF])
      if (v < 0 || v >= nV)
        throw topology_error("face " + std::to_string(iF) + " references vertex " + std::to_string(v));
    m_faces[iF].vertices = faces[iF];
  }

  const int nF = static_cast<int>(faces.size());
  m_elements.resize(elements.size());
  for (size_t iT = 0; iT < elements.size(); ++iT) {
    std::set<int> unique(elements[iT].begin(), elements[iT].end());
    if (unique.size() != elements[iT].size())
      throw topology_error("element " + std::to_string(iT) + " repeats a face");
    if (elements[iT].size() < 4)
      throw topology_error("element " + std::to_string(iT) + " has an open boundary (fewer than 4 faces)");
    for (int f : elements[iT])
      if (f < 0 || f >= nF)
        throw topology_error("element " + std::to_string(iT) + " references face " + std::to_string(f));
    m_elements[iT].faces = elements[iT];
  }

  derive();
}

void Mesh::derive()
{
  // Edges, numbered by first appearance while walking the face loops
  std::map<std::pair<int, int>, int> edge_ids;
  for (auto& F : m_faces) {
    const size_t n = F.vertices.size();
    F.edges.resize(n);
    for (size_t i = 0; i < n; ++i) {
      int a = F.vertices[i], b = F.vertices[(i + 1) % n];
      auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace({key.first, key.second}, static_cast<int>(m_edges.size()));
      if (inserted) {
        Edge E;
        E.vertices = {key.first, key.second};
        Vec3 d = m_vertices[key.second].x - m_vertices[key.first].x;
        E.length = d.norm();
        if (E.length == 0.) throw geometry_error("zero-length edge");
        E.tangent = d / E.length;
        E.center = 0.5 * (m_vertices[key.first].x + m_vertices[key.second].x);
        m_edges.push_back(E);
      }
      F.edges[i] = it->second;
    }
  }

  // Faces: Newell normal, planarity, edge orientations
  for (size_t iF = 0; iF < m_faces.size(); ++iF) {
    auto& F = m_faces[iF];
    const size_t n = F.vertices.size();
    std::vector<Vec3> pts;
    for (int v : F.vertices) pts.push_back(m_vertices[v].x);
    F.center = Vec3::Zero();
    for (const auto& p : pts) F.center += p;
    F.center /= static_cast<double>(n);
    Vec3 area_vector = Vec3::Zero();
    for (size_t i = 0; i < n; ++i) area_vector += 0.5 * pts[i].cross(pts[(i + 1) % n]);
    F.diameter = max_pairwise_distance(pts);
    F.area = area_vector.norm();
    if (F.area <= 1e-14 * F.diameter * F.diameter)
      throw geometry_error("face " + std::to_string(iF) + " is degenerate");
    F.normal = area_vector / F.area;
    for (const auto& p : pts)
      if (std::abs((p - F.center).dot(F.normal)) > 1e-10 * F.diameter)
        throw geometry_error("face " + std::to_string(iF) + " is not planar");

    F.edge_orientation.resize(n);
    F.edge_normals.resize(n);
    for (size_t i = 0; i < n; ++i) {
      const Edge& E = m_edges[F.edges[i]];
      Vec3 nFE = F.normal.cross(E.tangent);
      F.edge_normals[i] = nFE;
      double s = nFE.dot(E.center - F.center);
      if (std::abs(s) <= 1e-12 * F.diameter)
        throw geometry_error("face " + std::to_string(iF) + " is not star-shaped w.r.t. its center");
      F.edge_orientation[i] = s > 0 ? 1 : -1;
    }
  }

  // Elements
  m_h = 0.;
  for (size_t iT = 0; iT < m_elements.size(); ++iT) {
    auto& T = m_elements[iT];
    std::set<int> vset, eset;
    std::map<int, int> edge_use;
    for (int f : T.faces) {
      for (int v : m_faces[f].vertices) vset.insert(v);
      for (int e : m_faces[f].edges) {
        eset.insert(e);
        ++edge_use[e];
      }
    }
    for (const auto& [e, count] : edge_use)
      if (count != 2)
        throw topology_error("element " + std::to_string(iT) + " has an open boundary (edge " +
                             std::to_string(e) + " used by " + std::to_string(count) + " faces)");
    T.vertices.assign(vset.begin(), vset.end());
    T.edges.assign(eset.begin(), eset.end());

    std::vector<Vec3> pts;
    T.center = Vec3::Zero();
    for (int v : T.vertices) {
      pts.push_back(m_vertices[v].x);
      T.center += m_vertices[v].x;
    }
    T.center /= static_cast<double>(T.vertices.size());
    T.diameter = max_pairwise_distance(pts);
    m_h = std::max(m_h, T.diameter);

    T.face_orientation.resize(T.faces.size());
    Vec3 closure = Vec3::Zero();
    T.volume = 0.;
    for (size_t i = 0; i < T.faces.size(); ++i) {
      const Face& F = m_faces[T.faces[i]];
      double s = F.normal.dot(F.center - T.center);
      if (std::abs(s) <= 1e-12 * T.diameter)
        throw geometry_error("element " + std::to_string(iT) + " is not star-shaped w.r.t. its center");
      T.face_orientation[i] = s > 0 ? 1 : -1;
      closure += T.face_orientation[i] * F.area * F.normal;
      T.volume += T.face_orientation[i] * F.area * F.normal.dot(F.center - T.center) / 3.;
    }
    if (closure.norm() > 1e-10 * T.diameter * T.diameter)
      throw topology_error("element " + std::to_string(iT) + " has an open boundary");
  }

  // Face-element adjacency
  for (size_t iT = 0; iT < m_elements.size(); ++iT)
    for (int f : m_elements[iT].faces) m_faces[f].elements.push_back(static_cast<int>(iT));
  m_boundary_faces.clear();
  for (size_t iF = 0; iF < m_faces.size(); ++iF) {
    const auto& F = m_faces[iF];
    if (F.elements.empty())
      throw topology_error("face " + std::to_string(iF) + " belongs to no element");
    if (F.elements.size() > 2)
      throw topology_error("face " + std::to_string(iF) + " is non-manifold (shared by more than 2 elements)");
    if (F.elements.size() == 1) {
      m_boundary_faces.push_back(static_cast<int>(iF));
    } else {
      int o0 = m_elements[F.elements[0]].face_orientation[local_face_index(F.elements[0], static_cast<int>(iF))];
      int o1 = m_elements[F.elements[1]].face_orientation[local_face_index(F.elements[1], static_cast<int>(iF))];
      if (o0 + o1 != 0)
        throw topology_error("face " + std::to_string(iF) + " has inconsistent orientations (overlapping elements)");
    }
  }
}

int Mesh::local_face_index(int iT, int iF) const
{
  const auto& faces = m_elements[iT].faces;
  auto it = std::find(faces.begin(), faces.end(), iF);
  return it == faces.end() ? -1 : static_cast<int>(it - faces.begin());
}

//------------------------------------------------------------------------------
// ddr-mesh v1 text format
//------------------------------------------------------------------------------

namespace {

struct LineReader {
  std::istream& in;
  int line_no = 0;

  // Next non-empty line with comments stripped; false at end of input.
  bool next(std::string& line)
  {
    while (std::getline(in, line)) {
      ++line_no;
      if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
      if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
    }
    return false;
  }

  MeshError error(const std::string& what) const
  {
    return {MeshError::Kind::Parse, "line " + std::to_string(line_no) + ": " + what};
  }
};

int read_block_header(LineReader& reader, const std::string& keyword)
{
  std::string line;
  if (!reader.next(line)) throw reader.error("expected block '" + keyword + "'");
  std::istringstream ss(line);
  std::string word;
  long count = -1;
  std::string extra;
  if (!(ss >> word >> count) || word != keyword || count < 0 || (ss >> extra))
    throw reader.error("expected '" + keyword + " <count>'");
  return static_cast<int>(count);
}

std::vector<int> read_indices(LineReader& reader, const std::string& what)
{
  std::string line;
  if (!reader.next(line)) throw reader.error("unexpected end of file in " + what + " block");
  std::istringstream ss(line);
  std::vector<int> idx;
  std::string tok;
  while (ss >> tok) {
    size_t used = 0;
    long v = 0;
    try {
      v = std::stol(tok, &used);
    } catch (const std::exception&) {
      throw reader.error("invalid index '" + tok + "'");
    }
    if (used != tok.size() || v < 0) throw reader.error("invalid index '" + tok + "'");
    idx.push_back(static_cast<int>(v));
  }
  return idx;
}

}  // namespace

Mesh parse_mesh(std::istream& in)
{
  LineReader reader{in};
  std::string line;
  if (!reader.next(line)) throw reader.error("empty file");
  {
    std::istringstream ss(line);
    std::string magic, extra;
    int version = 0;
    if (!(ss >> magic >> version) || magic != "ddr-mesh" || version != 1 || (ss >> extra))
      throw reader.error("expected header 'ddr-mesh 1'");
  }

  const int nV = read_block_header(reader, "vertices");
  std::vector<Vec3> vertices(nV);
  for (int i = 0; i < nV; ++i) {
    if (!reader.next(line)) throw reader.error("unexpected end of file in vertices block");
    std::istringstream ss(line);
    std::string extra;
    if (!(ss >> vertices[i][0] >> vertices[i][1] >> vertices[i][2]) || (ss >> extra))
      throw reader.error("expected three coordinates");
  }

  const int nF = read_block_header(reader, "faces");
  std::vector<std::vector<int>> faces(nF);
  for (int i = 0; i < nF; ++i) faces[i] = read_indices(reader, "faces");

  const int nT = read_block_header(reader, "elements");
  std::vector<std::vector<int>> elements(nT);
  for (int i = 0; i < nT; ++i) elements[i] = read_indices(reader, "elements");

  if (reader.next(line)) throw reader.error("trailing content after elements block");

  return Mesh(std::move(vertices), std::move(faces), std::move(elements));
}

Mesh load_mesh(const std::filesystem::path& path)
{
  std::ifstream in(path);
  if (!in) throw MeshError(MeshError::Kind::Parse, "cannot open mesh file " + path.string());
  return parse_mesh(in);
}

void write_mesh(const Mesh& mesh, std::ostream& out)
{
  out << "ddr-mesh 1\n";
  out << "vertices " << mesh.n_vertices() << "\n";
  out << std::setprecision(17);
  for (const auto& V : mesh.vertices()) out << V.x[0] << " " << V.x[1] << " " << V.x[2] << "\n";
  out << "faces " << mesh.n_faces() << "\n";
  for (const auto& F : mesh.faces()) {
    for (size_t i = 0; i < F.vertices.size(); ++i) out << (i ? " " : "") << F.vertices[i];
    out << "\n";
  }
  out << "elements " << mesh.n_elements() << "\n";
  for (const auto& T : mesh.elements()) {
    for (size_t i = 0; i < T.faces.size(); ++i) out << (i ? " " : "") << T.faces[i];
    out << "\n";
  }
}

void save_mesh(const Mesh& mesh, const std::filesystem::path& path)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write mesh file " + path.string());
  write_mesh(mesh, out);
}

//------------------------------------------------------------------------------
// Generators
//------------------------------------------------------------------------------

MeshFamily parse_mesh_family(const std::string& name)
{
  if (name == "cartesian") return MeshFamily::Cartesian;
  if (name == "kuhn-tet") return MeshFamily::KuhnTet;
  throw std::invalid_argument("unknown mesh family '" + name + "' (expected cartesian or kuhn-tet)");
}

std::string to_string(MeshFamily family)
{
  return family == MeshFamily::Cartesian ? "cartesian" : "kuhn-tet";
}

namespace {

std::vector<Vec3> lattice_vertices(int n)
{
  std::vector<Vec3> vertices;
  vertices.reserve((n + 1) * (n + 1) * (n + 1));
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i <= n; ++i)
        vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);
  return vertices;
}

Mesh cartesian_mesh(int n)
{
  auto vid = [n](int i, int j, int k) { return i + (n + 1) * (j + (n + 1) * k); };
  std::vector<std::vector<int>> faces;
  // x-normal faces: index (i, j, k) with i in [0,n], j,k in [0,n)
  auto fx = [n](int i, int j, int k) { return i + (n + 1) * (j + n * k); };
  const int nfx = (n + 1) * n * n;
  auto fy = [n, nfx](int i, int j, int k) { return nfx + i + n * (j + (n + 1) * k); };
  auto fz = [n, nfx](int i, int j, int k) { return 2 * nfx + i + n * (j + n * k); };
  faces.resize(3 * nfx);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i <= n; ++i)
        faces[fx(i, j, k)] = {vid(i, j, k), vid(i, j + 1, k), vid(i, j + 1, k + 1), vid(i, j, k + 1)};
  for (int k = 0; k < n; ++k)
    for (int j = 0; j <= n; ++j)
      for (int i = 0; i < n; ++i)
        faces[fy(i, j, k)] = {vid(i, j, k), vid(i, j, k + 1), vid(i + 1, j, k + 1), vid(i + 1, j, k)};
  for (int k = 0; k <= n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        faces[fz(i, j, k)] = {vid(i, j, k), vid(i + 1, j, k), vid(i + 1, j + 1, k), vid(i, j + 1, k)};

  std::vector<std::vector<int>> elements;
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        elements.push_back({fx(i, j, k), fx(i + 1, j, k), fy(i, j, k), fy(i, j + 1, k), fz(i, j, k), fz(i, j, k + 1)});

  return Mesh(lattice_vertices(n), std::move(faces), std::move(elements));
}

Mesh kuhn_mesh(int n)
{
  auto vid = [n](int i, int j, int k) { return i + (n + 1) * (j + (n + 1) * k); };
  std::map<std::array<int, 3>, int> face_ids;
  std::vector<std::vector<int>> faces;
  std::vector<std::vector<int>> elements;
  auto face_of = [&](int a, int b, int c) {
    std::array<int, 3> key{a, b, c};
    std::sort(key.begin(), key.end());
    auto [it, inserted] = face_ids.try_emplace(key, static_cast<int>(faces.size()));
    if (inserted) faces.push_back({a, b, c});
    return it->second;
  };

  std::array<int, 3> perm{0, 1, 2};
  std::vector<std::array<int, 3>> perms;
  do perms.push_back(perm);
  while (std::next_permutation(perm.begin(), perm.end()));

  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        for (const auto& p : perms) {
          std::array<int, 3> c{i, j, k};
          std::array<int, 4> v;
          v[0] = vid(c[0], c[1], c[2]);
          for (int s = 0; s < 3; ++s) {
            ++c[p[s]];
            v[s + 1] = vid(c[0], c[1], c[2]);
          }
          elements.push_back({face_of(v[1], v[2], v[3]), face_of(v[0], v[2], v[3]),
                              face_of(v[0], v[1], v[3]), face_of(v[0], v[1], v[2])});
        }

  return Mesh(lattice_vertices(n), std::move(faces), std::move(elements));
}

}  // namespace

Mesh generate_mesh(MeshFamily family, int n)
{
  if (n < 1) throw std::invalid_argument("generate_mesh: n must be >= 1");
  return family == MeshFamily::Cartesian ? cartesian_mesh(n) : kuhn_mesh(n);
}

MeshStats mesh_stats(const Mesh& mesh)
{
  MeshStats s;
  s.h = mesh.h();
  s.n_vertices = mesh.n_vertices();
  s.n_edges = mesh.n_edges();
  s.n_faces = mesh.n_faces();
  s.n_elements = mesh.n_elements();
  s.n_boundary_faces = static_cast<int>(mesh.boundary_faces().size());
  for (const auto& T : mesh.elements()) {
    std::vector<double> r;
    for (int f : T.faces) {
      r.push_back(T.diameter / mesh.face(f).diameter);
      s.max_element_face_ratio = std::max(s.max_element_face_ratio, r.back());
    }
    s.element_face_ratios.push_back(std::move(r));
    s.faces_per_element.push_back(static_cast<int>(T.faces.size()));
    s.edges_per_element.push_back(static_cast<int>(T.edges.size()));
  }
  for (const auto& F : mesh.faces()) {
    std::vector<double> r;
    for (int e : F.edges) {
      r.push_back(F.diameter / mesh.edge(e).length);
      s.max_face_edge_ratio = std::max(s.max_face_edge_ratio, r.back());
    }
    s.face_edge_ratios.push_back(std::move(r));
  }
  return s;
}

}  // namespace ddr
