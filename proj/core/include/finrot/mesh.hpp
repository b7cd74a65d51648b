#pragma once

#include <string>
#include <vector>

#include "finrot/group.hpp"
#include "finrot/tensor.hpp"

namespace finrot {

// Polygonal mesh on the unit sphere. Faces are counter-clockwise seen from
// outside; vertices are deduplicated to 1e-9.
struct PolyMesh {
  std::vector<Vec3> vertices;
  std::vector<std::vector<int>> faces;
};

// 60 triangles, one per element of the order-60 rotation group: face i is
// element i applied to a reference triangle (the north-pole vertex plus the
// centers of two adjacent faces meeting there). A 60-row signal therefore
// paints face i with the value at element i.
PolyMesh pentakis_mesh(const FiniteGroup& g);

// 12 pentagons in icosahedron-vertex order, each spanned by the five face
// centers around its vertex. Matches the 12-point homogeneous space.
PolyMesh dodecahedron_mesh();

// 20 triangles in face-center order. Matches the 20-point homogeneous space.
PolyMesh icosahedron_mesh();

// ASCII PLY with one uchar RGB per face. colors is [|faces|, 3] in [0, 1].
void write_ply(const std::string& path, const PolyMesh& mesh, const Tensor& colors);

} // namespace finrot
