#include "rmf/motion_io.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace rmf {

using nlohmann::json;

namespace {

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from_json(const json& j) {
  if (!j.is_array() || j.size() != 3) {
    throw std::runtime_error("motion file: expected a 3-vector");
  }
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

json vecs_to_json(const std::vector<Vec3>& vs) {
  json out = json::array();
  for (const auto& v : vs) out.push_back(vec3_to_json(v));
  return out;
}

std::vector<Vec3> vecs_from_json(const json& j) {
  std::vector<Vec3> out;
  for (const auto& e : j) out.push_back(vec3_from_json(e));
  return out;
}

}  // namespace

std::string motion_to_json(const MotionFile& m) {
  json j;
  j["fps"] = m.seq.fps;
  j["k"] = m.seq.num_joints();
  json skel;
  skel["parents"] = m.skel.parent;
  skel["offsets"] = vecs_to_json(m.skel.offsets);
  skel["beta"] = m.skel.beta;
  j["skeleton"] = skel;
  json frames = json::array();
  for (const auto& s : m.seq.states) {
    json f;
    f["t_r"] = vec3_to_json(s.t_r);
    json quats = json::array();
    for (const auto& r : s.pose) {
      const Vec4 q = quat_encode(r);
      quats.push_back(json::array({q[0], q[1], q[2], q[3]}));
    }
    f["quats"] = quats;
    if (!s.vel.empty()) f["vel"] = vecs_to_json(s.vel);
    if (!s.acc.empty()) f["acc"] = vecs_to_json(s.acc);
    frames.push_back(f);
  }
  j["frames"] = frames;
  return j.dump(2) + "\n";
}

MotionFile motion_from_json(const std::string& text) {
  const json j = json::parse(text);
  MotionFile m;
  m.seq.fps = j.at("fps").get<double>();
  if (!(m.seq.fps > 0.0)) throw std::runtime_error("motion file: fps <= 0");
  const int k = j.at("k").get<int>();
  const json& skel = j.at("skeleton");
  m.skel.parent = skel.at("parents").get<std::vector<int>>();
  m.skel.offsets = vecs_from_json(skel.at("offsets"));
  m.skel.beta = skel.at("beta").get<std::vector<double>>();
  m.skel.validate();
  if (m.skel.num_joints() != k) {
    throw std::runtime_error("motion file: skeleton size disagrees with k");
  }
  for (const auto& f : j.at("frames")) {
    MotionState s;
    s.t_r = vec3_from_json(f.at("t_r"));
    const json& quats = f.at("quats");
    if (static_cast<int>(quats.size()) != k) {
      throw std::runtime_error("motion file: frame joint count disagrees");
    }
    for (const auto& qj : quats) {
      Vec4 q(qj[0].get<double>(), qj[1].get<double>(), qj[2].get<double>(),
             qj[3].get<double>());
      if (std::abs(q.norm() - 1.0) > 1e-6) {
        throw std::runtime_error("motion file: non-unit quaternion");
      }
      s.pose.push_back(quat_decode(q));
    }
    if (f.contains("vel")) s.vel = vecs_from_json(f["vel"]);
    if (f.contains("acc")) s.acc = vecs_from_json(f["acc"]);
    m.seq.states.push_back(std::move(s));
  }
  if (m.seq.states.empty()) throw std::runtime_error("motion file: no frames");
  return m;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

void write_motion_file(const std::string& path, const MotionFile& m) {
  write_text_file(path, motion_to_json(m));
}

MotionFile read_motion_file(const std::string& path) {
  return motion_from_json(read_text_file(path));
}

}  // namespace rmf
