#pragma once

#include <array>
#include <vector>

#include "finrot/rotation.hpp"

namespace finrot {

// Unit icosahedron with a vertex on the +z axis: golden-ratio coordinates
// (0, ±1, ±phi) cyclic, normalized, then rotated about x by atan(1/phi) so
// that the vertex (0, 1, phi) lands on the pole. Vertices sorted by (z, y, x)
// descending, so index 0 is the north pole and index 11 the south pole.
std::vector<Vec3> icosahedron_vertices();

// The 20 triangular faces as vertex index triples (each triple sorted
// ascending), ordered to match icosahedron_face_centers.
std::vector<std::array<int, 3>> icosahedron_faces();

// Unit centroids of the 20 faces, sorted by (z, y, x) descending.
std::vector<Vec3> icosahedron_face_centers();

} // namespace finrot
