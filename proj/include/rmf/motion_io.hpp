#pragma once

#include <string>

#include "rmf/motion.hpp"

namespace rmf {

struct MotionFile {
  MotionSequence seq;
  Skeleton skel;
};

// JSON motion format:
//   { "fps": number, "k": int,
//     "skeleton": { "parents": [...], "offsets": [[x,y,z]...], "beta": [...] },
//     "frames": [ { "t_r": [x,y,z], "quats": [[w,x,y,z] x K],
//                   "vel": [[x,y,z] x K]?, "acc": [[x,y,z] x K]? } ] }
// Quaternions are written canonicalized (w >= 0); readers reject non-unit
// quaternions beyond 1e-6.
std::string motion_to_json(const MotionFile& m);
MotionFile motion_from_json(const std::string& text);

void write_motion_file(const std::string& path, const MotionFile& m);
MotionFile read_motion_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace rmf
