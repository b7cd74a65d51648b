#include "finrot/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "finrot/platonic.hpp"

namespace finrot {

namespace {

using QKey = std::array<long long, 3>;

QKey qkey(const Vec3& v) {
  auto q = [](double x) { return std::llround(x * 1e9); };
  return {q(v.x), q(v.y), q(v.z)};
}

// Appends v if unseen, returns its index either way.
int intern(std::vector<Vec3>& verts, std::map<QKey, int>& seen, const Vec3& v) {
  auto [it, fresh] = seen.emplace(qkey(v), static_cast<int>(verts.size()));
  if (fresh) verts.push_back(v);
  return it->second;
}

// Reorders a convex face so its winding is counter-clockwise from outside
// (normal pointing away from the origin).
void orient_outward(std::vector<Vec3>& pts) {
  Vec3 centroid{0, 0, 0};
  for (const Vec3& p : pts) centroid = centroid + p;
  centroid = centroid * (1.0 / static_cast<double>(pts.size()));
  Vec3 n = cross(pts[1] - pts[0], pts[2] - pts[0]);
  if (dot(n, centroid) < 0) std::reverse(pts.begin(), pts.end());
}

// Face centers around vertex v, sorted by angle about the v axis so
// consecutive entries belong to adjacent faces.
std::vector<Vec3> ring_around(const Vec3& v, const std::vector<Vec3>& centers) {
  std::vector<Vec3> ring;
  for (const Vec3& c : centers)
    if (dot(c, v) > 0.7) ring.push_back(c); // incident faces: cos angle ~ 0.795
  if (ring.size() != 5) throw std::logic_error("icosahedron vertex without 5 incident faces");
  Vec3 a = normalized(ring[0] - v * dot(ring[0], v));
  Vec3 b = cross(v, a);
  std::sort(ring.begin(), ring.end(), [&](const Vec3& p, const Vec3& q) {
    return std::atan2(dot(p, b), dot(p, a)) < std::atan2(dot(q, b), dot(q, a));
  });
  return ring;
}

} // namespace

PolyMesh pentakis_mesh(const FiniteGroup& g) {
  if (g.order != 60) throw std::invalid_argument("pentakis_mesh: needs the order-60 group");
  const std::vector<Vec3> verts = icosahedron_vertices();
  const std::vector<Vec3> centers = icosahedron_face_centers();

  // Reference triangle at the north pole: the pole vertex and two adjacent
  // incident face centers. Every group element moves it to a distinct face.
  std::vector<Vec3> ring = ring_around(verts[0], centers);
  std::vector<Vec3> ref{verts[0], ring[0], ring[1]};
  orient_outward(ref);

  PolyMesh mesh;
  std::map<QKey, int> seen;
  for (int e = 0; e < g.order; ++e) {
    const Mat3& m = g.elements[static_cast<size_t>(e)].m;
    std::vector<int> face;
    for (const Vec3& p : ref) face.push_back(intern(mesh.vertices, seen, m * p));
    mesh.faces.push_back(std::move(face));
  }
  if (mesh.vertices.size() != 32) throw std::logic_error("pentakis mesh should have 32 vertices");
  return mesh;
}

PolyMesh dodecahedron_mesh() {
  const std::vector<Vec3> verts = icosahedron_vertices();
  const std::vector<Vec3> centers = icosahedron_face_centers();
  PolyMesh mesh;
  std::map<QKey, int> seen;
  for (const Vec3& v : verts) {
    std::vector<Vec3> ring = ring_around(v, centers);
    orient_outward(ring);
    std::vector<int> face;
    for (const Vec3& p : ring) face.push_back(intern(mesh.vertices, seen, p));
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

PolyMesh icosahedron_mesh() {
  const std::vector<Vec3> verts = icosahedron_vertices();
  PolyMesh mesh;
  mesh.vertices = verts;
  for (const auto& tri : icosahedron_faces()) {
    std::vector<Vec3> pts{verts[static_cast<size_t>(tri[0])], verts[static_cast<size_t>(tri[1])],
                          verts[static_cast<size_t>(tri[2])]};
    std::vector<int> face{tri[0], tri[1], tri[2]};
    Vec3 n = cross(pts[1] - pts[0], pts[2] - pts[0]);
    Vec3 centroid = (pts[0] + pts[1] + pts[2]) * (1.0 / 3.0);
    if (dot(n, centroid) < 0) std::swap(face[1], face[2]);
    mesh.faces.push_back(std::move(face));
  }
  return mesh;
}

void write_ply(const std::string& path, const PolyMesh& mesh, const Tensor& colors) {
  if (colors.shape.size() != 2 || colors.dim(0) != static_cast<int>(mesh.faces.size()) ||
      colors.dim(1) != 3)
    throw std::invalid_argument("write_ply: colors must be [|faces|, 3]");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_ply: cannot open " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << mesh.vertices.size() << "\n";
  out << "property float x\nproperty float y\nproperty float z\n";
  out << "element face " << mesh.faces.size() << "\n";
  out << "property list uchar int vertex_indices\n";
  out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char buf[96];
  for (const Vec3& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", v.x, v.y, v.z);
    out << buf;
  }
  for (size_t f = 0; f < mesh.faces.size(); ++f) {
    out << mesh.faces[f].size();
    for (int idx : mesh.faces[f]) out << ' ' << idx;
    for (int k = 0; k < 3; ++k) {
      double c = colors.data[f * 3 + static_cast<size_t>(k)];
      int byte = static_cast<int>(std::lround(255.0 * std::min(1.0, std::max(0.0, c))));
      out << ' ' << byte;
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("write_ply: write failed for " + path);
}

} // namespace finrot
