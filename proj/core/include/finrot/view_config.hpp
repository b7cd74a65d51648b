#pragma once

#include <memory>
#include <string>
#include <vector>

#include "finrot/group.hpp"
#include "finrot/hspace.hpp"

namespace finrot {

// Camera on the viewing sphere, looking at the origin.
//
// Invariants: |optical_axis| = |up| = 1, optical_axis . up = 0 within 1e-10,
// position = -radius * optical_axis.
struct CameraPose {
  Vec3 position;
  Vec3 optical_axis;
  Vec3 up;

  // Camera-to-world rotation; columns are [right, up, -optical_axis].
  Mat3 world_rotation() const;
};

CameraPose rotated_pose(const CameraPose& p, const Mat3& m);

enum class ConfigKind { V12x5, V20x3, V60x1, Aligned12, Aligned20, CyclicPanorama };

std::string to_string(ConfigKind k);
// "12x5", "20x3", "60x1", "a12", "a20", "pano" (CyclicPanorama needs its k
// separately). Throws std::invalid_argument on unknown names.
ConfigKind parse_config_kind(const std::string& s);

// A set of camera poses in bijection with a group or homogeneous space.
//
// The grouped kinds (V12x5, V20x3, V60x1, CyclicPanorama) are orbits of one
// reference pose under the whole group, so space is the group itself and
// rotating the scene by any element permutes the poses exactly. The aligned
// kinds place one pose per point of the 12- or 20-point space.
struct CameraConfig {
  ConfigKind kind = ConfigKind::V60x1;
  int panorama_k = 0; // CyclicPanorama only
  double radius = 0;
  std::shared_ptr<const FiniteGroup> group;
  std::shared_ptr<const HSpace> space; // the set the poses map onto
  std::vector<CameraPose> poses;
  std::vector<int> assignment; // pose i <-> space point assignment[i], bijective

  bool grouped() const { return space->kind == HSpaceKind::Group; }
  int n_views() const { return static_cast<int>(poses.size()); }
};

// radius > 0 is the viewing-sphere radius; panorama_k >= 1 applies to
// CyclicPanorama only. Pole-sited cameras (which have no meridian up) use
// up = world +x; every other aligned or reference up is the projected north.
CameraConfig gen_config(ConfigKind kind, double radius, int panorama_k = 0);

// Permutation pi with pose[pi(i)] = (rotation k of the scene) applied to
// pose[i], found by geometric nearest-pose matching and cross-checked against
// the Cayley-table prediction; any mismatch or residual > 1e-6 throws.
// Grouped kinds only.
std::vector<int> permutation_under_rotation(const CameraConfig& cfg, int k);

// Poses sharing one optical axis, ordered so consecutive members differ by
// the stabilizer generator's in-plane angle (72 or 120 degrees). V12x5 and
// V20x3 only.
struct InPlaneFamily {
  int viewpoint = 0; // index into the 12- or 20-point space
  std::vector<int> poses;
};
std::vector<InPlaneFamily> in_plane_families(const CameraConfig& cfg);

} // namespace finrot
