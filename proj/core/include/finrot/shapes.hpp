#pragma once

#include "finrot/rotation.hpp"

#include <cstdint>
#include <vector>

namespace finrot {

// Procedural point-cloud classes for classification and retrieval demos.
// Every class is geometrically asymmetric (no rotation maps an instance to
// itself) so that pose actually matters. Several classes are deliberately
// near-twins that differ only in part arrangement, and helix_r / helix_l are
// chiral mirror images.
int shape_class_count();
const char* shape_class_name(int class_id);

// Deterministic instance: the seed jitters the defining dimensions by about
// +-10% and drives point placement. Output is centered at the origin and
// scaled so the farthest point has norm exactly 1.
std::vector<Vec3> make_shape(int class_id, std::uint64_t seed, int n_points = 256);

} // namespace finrot
