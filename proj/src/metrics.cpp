#include "rmf/metrics.hpp"

#include <stdexcept>

#include <json.hpp>

namespace rmf {

MetricsReport compute_metrics(const MotionSequence& pred,
                              const MotionSequence& ref,
                              const Skeleton& skel) {
  if (pred.num_frames() != ref.num_frames() ||
      pred.num_joints() != ref.num_joints()) {
    throw std::invalid_argument("compute_metrics: shape mismatch");
  }
  const int t_max = pred.num_frames();
  const int k = pred.num_joints();

  MetricsReport m;
  double pos_sum = 0.0, geo_sum = 0.0;
  for (int t = 0; t < t_max; ++t) {
    const auto p_pred =
        forward_kinematics(skel, pred.states[t].t_r, pred.states[t].pose);
    const auto p_ref =
        forward_kinematics(skel, ref.states[t].t_r, ref.states[t].pose);
    for (int j = 0; j < k; ++j) {
      pos_sum += (p_pred[j] - p_ref[j]).norm();
      geo_sum += geodesic_distance(pred.states[t].pose[j], ref.states[t].pose[j]);
    }
  }
  m.mpjpe_mm = pos_sum / (t_max * k) * 1000.0;
  m.geodesic_error_rad = geo_sum / (t_max * k);

  if (t_max >= 3) {
    const auto acc_of = [](const MotionSequence& s) {
      const auto vels =
          estimate_velocity(s.poses(), s.fps, VelocityScheme::kLogCentral);
      return estimate_acceleration(vels, s.fps, AccelScheme::kCentral);
    };
    const auto a_pred = acc_of(pred);
    const auto a_ref = acc_of(ref);
    double acc_sum = 0.0;
    for (int t = 0; t < t_max; ++t) {
      for (int j = 0; j < k; ++j) {
        acc_sum += (a_pred[t][j] - a_ref[t][j]).norm();
      }
    }
    m.accel_error = acc_sum / (t_max * k);
  }
  return m;
}

std::string metrics_to_json(const MetricsReport& m) {
  nlohmann::json j;
  j["mpjpe_mm"] = m.mpjpe_mm;
  j["geodesic_error_rad"] = m.geodesic_error_rad;
  j["accel_error"] = m.accel_error;
  return j.dump(2) + "\n";
}

}  // namespace rmf
