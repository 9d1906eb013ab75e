#pragma once

#include "whamkit/body/motion.h"

#include <filesystem>
#include <iosfwd>

namespace whamkit::body {

// NDJSON layout: a header line {"fps", "skeleton_version"} followed by one
// line per frame {"t", "gamma" (9, row-major), "tau" (3), "local" (63,
// landmark-major), "contact" (4)}. Bone scales are not stored; they are
// re-measured from the landmarks on load.
void write_motion(std::ostream& out, const MotionSequence& seq);
MotionSequence read_motion(std::istream& in, const std::string& source = "<stream>");

void save_motion(const std::filesystem::path& path, const MotionSequence& seq);
MotionSequence load_motion(const std::filesystem::path& path);

}  // namespace whamkit::body
