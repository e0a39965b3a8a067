// Copyright 2026 The CLOT Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "clot/kinematics.hpp"

namespace clot {

namespace detail {

using nlohmann::json;

inline const json& member(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) fail(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(path + "." + key + ": missing");
  return *it;
}

inline double number(const json& value, const std::string& path) {
  if (!value.is_number()) fail(path + ": expected a number");
  return value.get<double>();
}

inline Vec3 vec3(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 3) fail(path + ": expected an array of 3 numbers");
  return {number(value[0], path + "[0]"), number(value[1], path + "[1]"), number(value[2], path + "[2]")};
}

// Quaternions are serialized scalar-first: [w, x, y, z].
inline Quat quat(const json& value, const std::string& path) {
  if (!value.is_array() || value.size() != 4) fail(path + ": expected an array of 4 numbers [w,x,y,z]");
  return Quat(number(value[0], path + "[0]"), number(value[1], path + "[1]"), number(value[2], path + "[2]"),
              number(value[3], path + "[3]"));
}

inline RigidTransform transform(const json& value, const std::string& path) {
  return {quat(member(value, "quat", path), path + ".quat"), vec3(member(value, "pos", path), path + ".pos")};
}

inline json transform_to_json(const RigidTransform& t) {
  return json{{"quat", {t.rotation.w(), t.rotation.x(), t.rotation.y(), t.rotation.z()}},
              {"pos", {t.translation.x(), t.translation.y(), t.translation.z()}}};
}

inline json parse_json(const std::string& text, const std::string& context) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) fail(context + ": invalid JSON");
  return doc;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail("cannot open file for writing: " + path);
  out << content;
}

}  // namespace detail

inline RobotModel parse_model_json(const std::string& text) {
  using detail::member;
  const auto doc = detail::parse_json(text, "model");

  std::string name = member(doc, "name", "model").get<std::string>();

  std::vector<JointSpec> joints;
  const auto& jarr = member(doc, "joints", "model");
  if (!jarr.is_array()) fail("model.joints: expected an array");
  for (size_t i = 0; i < jarr.size(); ++i) {
    const std::string path = "model.joints[" + std::to_string(i) + "]";
    const auto& j = jarr[i];
    JointSpec spec;
    spec.name = member(j, "name", path).get<std::string>();
    spec.parent = member(j, "parent", path).get<int>();
    const std::string type = member(j, "type", path).get<std::string>();
    if (type == "revolute") {
      spec.type = JointType::kRevolute;
    } else if (type == "prismatic") {
      spec.type = JointType::kPrismatic;
    } else {
      fail(path + ".type: expected 'revolute' or 'prismatic', got '" + type + "'");
    }
    spec.axis = detail::vec3(member(j, "axis", path), path + ".axis");
    spec.origin = detail::transform(member(j, "origin", path), path + ".origin");
    const auto& limits = member(j, "limits", path);
    const auto& pos = member(limits, "pos", path + ".limits");
    if (!pos.is_array() || pos.size() != 2) fail(path + ".limits.pos: expected [lo, hi]");
    spec.pos_lo = detail::number(pos[0], path + ".limits.pos[0]");
    spec.pos_hi = detail::number(pos[1], path + ".limits.pos[1]");
    spec.vel_limit = detail::number(member(limits, "vel", path + ".limits"), path + ".limits.vel");
    spec.torque_limit = detail::number(member(limits, "torque", path + ".limits"), path + ".limits.torque");
    joints.push_back(std::move(spec));
  }

  std::vector<FrameSpec> frames;
  const auto& farr = member(doc, "frames", "model");
  if (!farr.is_array()) fail("model.frames: expected an array");
  for (size_t i = 0; i < farr.size(); ++i) {
    const std::string path = "model.frames[" + std::to_string(i) + "]";
    const auto& f = farr[i];
    FrameSpec spec;
    spec.name = member(f, "name", path).get<std::string>();
    spec.parent_joint = member(f, "parent", path).get<int>();
    spec.offset = detail::transform(member(f, "offset", path), path + ".offset");
    frames.push_back(std::move(spec));
  }

  return RobotModel(std::move(name), std::move(joints), std::move(frames));
}

inline std::string model_to_json(const RobotModel& model) {
  using detail::json;
  json joints = json::array();
  for (const JointSpec& j : model.joints()) {
    joints.push_back(json{{"name", j.name},
                          {"parent", j.parent},
                          {"type", j.type == JointType::kRevolute ? "revolute" : "prismatic"},
                          {"axis", {j.axis.x(), j.axis.y(), j.axis.z()}},
                          {"origin", detail::transform_to_json(j.origin)},
                          {"limits", json{{"pos", {j.pos_lo, j.pos_hi}}, {"vel", j.vel_limit}, {"torque", j.torque_limit}}}});
  }
  json frames = json::array();
  for (const FrameSpec& f : model.frames()) {
    frames.push_back(json{{"name", f.name}, {"parent", f.parent_joint}, {"offset", detail::transform_to_json(f.offset)}});
  }
  return json{{"name", model.name()}, {"joints", joints}, {"frames", frames}}.dump(2) + "\n";
}

inline RobotModel load_model(const std::string& path) { return parse_model_json(detail::read_file(path)); }

inline void save_model(const RobotModel& model, const std::string& path) {
  detail::write_file(path, model_to_json(model));
}

}  // namespace clot
