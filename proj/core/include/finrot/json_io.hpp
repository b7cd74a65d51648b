#pragma once

#include "finrot/group.hpp"
#include "finrot/hspace.hpp"
#include "finrot/view_config.hpp"

#include <string>

namespace finrot {

// JSON text forms of the core structures. Doubles are printed with enough
// digits to round-trip, so write-then-read is exact. Readers validate shape
// and internal consistency of the file, not the group axioms; run
// verify_group on a loaded group to re-check those.

std::string group_to_json(const FiniteGroup& g);
FiniteGroup group_from_json(const std::string& text);

std::string hspace_to_json(const HSpace& h);

std::string config_to_json(const CameraConfig& cfg);
// Rebuilds the group and space from the declared kind, then adopts the file's
// poses and assignment so checks run against the stored geometry.
CameraConfig config_from_json(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace finrot
