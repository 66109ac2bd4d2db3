#pragma once

#include <string>

#include "rmf/motion.hpp"

namespace rmf {

struct MetricsReport {
  double mpjpe_mm = 0.0;          // mean per-joint position error
  double geodesic_error_rad = 0.0;  // mean per-joint rotation error
  double accel_error = 0.0;       // mean angular acceleration error (rad/s^2)
};

/// Errors of a predicted sequence against a reference with the same
/// skeleton and frame count. Accelerations are re-estimated from poses on
/// both sides when missing.
MetricsReport compute_metrics(const MotionSequence& pred,
                              const MotionSequence& ref, const Skeleton& skel);

std::string metrics_to_json(const MetricsReport& m);

}  // namespace rmf
