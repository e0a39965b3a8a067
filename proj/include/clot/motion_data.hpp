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

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/geometry.hpp"
#include "clot/model_io.hpp"
#include "clot/rng.hpp"

namespace clot {

enum class Category {
  kWalk, kRun, kBalance, kHighDynamic, kUnlab, kSwing, kKungfu,
  kFree, kCycle, kBoxing, kCrouching, kPick, kDance, kLateral,
};

inline constexpr std::array<std::string_view, 14> kCategoryNames = {
    "WALK", "RUN", "BALANCE", "HIGH_DYNAMIC", "UNLAB", "SWING", "KUNGFU",
    "FREE", "CYCLE", "BOXING", "CROUCHING", "PICK", "DANCE", "LATERAL",
};

inline std::string_view category_name(Category c) { return kCategoryNames[static_cast<size_t>(c)]; }

inline Category category_from_name(std::string_view name) {
  for (size_t i = 0; i < kCategoryNames.size(); ++i)
    if (kCategoryNames[i] == name) return static_cast<Category>(i);
  fail("unknown motion category: '" + std::string(name) + "'");
}

/// One captured frame: root pose, keypoints in world coordinates, and the
/// optional joint and contact channels used by retargeted references.
struct MotionFrame {
  double t = 0.0;
  RigidTransform root;
  std::vector<Vec3> keypoints;
  VecX joint_pos;               // empty when absent
  std::vector<bool> contacts;   // empty when absent
};

struct MotionClip {
  std::string id;
  Category category = Category::kUnlab;
  double fps = 0.0;
  std::vector<MotionFrame> frames;

  int keypoint_count() const { return frames.empty() ? 0 : static_cast<int>(frames[0].keypoints.size()); }
  int joint_count() const { return frames.empty() ? 0 : static_cast<int>(frames[0].joint_pos.size()); }
  int contact_count() const { return frames.empty() ? 0 : static_cast<int>(frames[0].contacts.size()); }
  double duration() const { return frames.back().t - frames.front().t; }
};

inline void validate_clip(const MotionClip& clip) {
  require(clip.fps > 0.0 && std::isfinite(clip.fps), "clip '" + clip.id + "': fps must be positive");
  require(clip.frames.size() >= 2, "clip '" + clip.id + "': needs at least 2 frames");
  const int nk = clip.keypoint_count();
  const int nj = clip.joint_count();
  const int nc = clip.contact_count();
  const double dt = 1.0 / clip.fps;
  for (size_t i = 0; i < clip.frames.size(); ++i) {
    const MotionFrame& f = clip.frames[i];
    const std::string at = "clip '" + clip.id + "' frame " + std::to_string(i);
    require(std::isfinite(f.t), at + ": non-finite timestamp");
    if (i > 0) {
      const double step = f.t - clip.frames[i - 1].t;
      require(step > 0.0, at + ": non-monotone timestamps");
      require(std::abs(step - dt) < 1e-6, at + ": timestamp step deviates from 1/fps by more than 1e-6");
    }
    check_unit_quaternion(f.root.rotation, at);
    require(f.root.translation.allFinite(), at + ": non-finite root position");
    require(static_cast<int>(f.keypoints.size()) == nk, at + ": keypoint count drifts within the clip");
    for (const Vec3& k : f.keypoints) require(k.allFinite(), at + ": non-finite keypoint");
    require(static_cast<int>(f.joint_pos.size()) == nj, at + ": joint count drifts within the clip");
    require(f.joint_pos.size() == 0 || f.joint_pos.allFinite(), at + ": non-finite joint position");
    require(static_cast<int>(f.contacts.size()) == nc, at + ": contact count drifts within the clip");
  }
}

// ---------------------------------------------------------------------------
// .clot.jsonl: one JSON header line with the identity and channel counts,
// then one CSV row per frame:
//   t, root quat (w x y z), root pos (x y z), keypoints, joints, contacts
// All floats are written in shortest round-trip form, so serialize(parse(f))
// reproduces canonical files byte-for-byte.
// ---------------------------------------------------------------------------

inline std::string serialize_clip(const MotionClip& clip) {
  validate_clip(clip);
  nlohmann::json header{{"id", clip.id},
                        {"category", std::string(category_name(clip.category))},
                        {"fps", clip.fps},
                        {"frames", clip.frames.size()},
                        {"keypoints", clip.keypoint_count()},
                        {"joints", clip.joint_count()},
                        {"contacts", clip.contact_count()}};
  std::string out = header.dump() + "\n";
  for (const MotionFrame& f : clip.frames) {
    out += format_double(f.t);
    const Quat& q = f.root.rotation;
    for (double v : {q.w(), q.x(), q.y(), q.z()}) out += "," + format_double(v);
    for (int i = 0; i < 3; ++i) out += "," + format_double(f.root.translation[i]);
    for (const Vec3& k : f.keypoints)
      for (int i = 0; i < 3; ++i) out += "," + format_double(k[i]);
    for (Eigen::Index i = 0; i < f.joint_pos.size(); ++i) out += "," + format_double(f.joint_pos[i]);
    for (bool c : f.contacts) out += c ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

inline MotionClip parse_clip(const std::string& text) {
  const size_t header_end = text.find('\n');
  if (header_end == std::string::npos) fail("clip: missing header line");
  const auto header = detail::parse_json(text.substr(0, header_end), "clip header");

  MotionClip clip;
  clip.id = detail::member(header, "id", "clip header").get<std::string>();
  clip.category = category_from_name(detail::member(header, "category", "clip header").get<std::string>());
  clip.fps = detail::number(detail::member(header, "fps", "clip header"), "clip header.fps");
  const size_t n_frames = detail::member(header, "frames", "clip header").get<size_t>();
  const int nk = detail::member(header, "keypoints", "clip header").get<int>();
  const int nj = detail::member(header, "joints", "clip header").get<int>();
  const int nc = detail::member(header, "contacts", "clip header").get<int>();
  require(nk >= 0 && nj >= 0 && nc >= 0, "clip header: negative channel count");

  const size_t expected_cols = 8 + 3 * static_cast<size_t>(nk) + nj + nc;
  clip.frames.reserve(n_frames);

  size_t pos = header_end + 1;
  size_t row = 0;
  while (pos < text.size()) {
    size_t line_end = text.find('\n', pos);
    if (line_end == std::string::npos) line_end = text.size();
    const std::string_view line(text.data() + pos, line_end - pos);
    pos = line_end + 1;
    if (line.empty()) continue;
    const std::string at = "clip '" + clip.id + "' row " + std::to_string(row);

    std::vector<double> cols;
    cols.reserve(expected_cols);
    size_t start = 0;
    while (start <= line.size()) {
      size_t comma = line.find(',', start);
      if (comma == std::string_view::npos) comma = line.size();
      cols.push_back(parse_double(line.substr(start, comma - start), at));
      start = comma + 1;
    }
    if (cols.size() != expected_cols)
      fail(at + ": expected " + std::to_string(expected_cols) + " columns, got " + std::to_string(cols.size()));

    MotionFrame f;
    f.t = cols[0];
    f.root.rotation = Quat(cols[1], cols[2], cols[3], cols[4]);
    f.root.translation = Vec3(cols[5], cols[6], cols[7]);
    size_t c = 8;
    f.keypoints.resize(nk);
    for (int k = 0; k < nk; ++k, c += 3) f.keypoints[k] = Vec3(cols[c], cols[c + 1], cols[c + 2]);
    f.joint_pos.resize(nj);
    for (int j = 0; j < nj; ++j) f.joint_pos[j] = cols[c++];
    f.contacts.resize(nc);
    for (int k = 0; k < nc; ++k) {
      const double v = cols[c++];
      if (v != 0.0 && v != 1.0) fail(at + ": contact flag must be 0 or 1");
      f.contacts[k] = v != 0.0;
    }
    clip.frames.push_back(std::move(f));
    ++row;
  }

  if (clip.frames.size() != n_frames)
    fail("clip '" + clip.id + "': header declares " + std::to_string(n_frames) + " frames, file has " +
         std::to_string(clip.frames.size()));
  validate_clip(clip);
  return clip;
}

inline MotionClip load_clip(const std::string& path) { return parse_clip(detail::read_file(path)); }

inline void save_clip(const MotionClip& clip, const std::string& path) {
  detail::write_file(path, serialize_clip(clip));
}

/// Rate conversion on the clip's own time axis: positions and joints are
/// linearly interpolated, root rotation is slerped on consistent hemispheres,
/// contacts snap to the nearer frame. Duration is preserved to within one
/// output frame.
inline MotionClip resample(const MotionClip& clip, double target_fps) {
  require(clip.frames.size() >= 2, "resample: clip shorter than 2 frames");
  require(target_fps > 0.0 && std::isfinite(target_fps), "resample: target_fps must be positive");
  validate_clip(clip);

  const double t0 = clip.frames.front().t;
  const double duration = clip.duration();
  size_t count = static_cast<size_t>(std::llround(duration * target_fps)) + 1;
  if (count < 2) count = 2;

  MotionClip out;
  out.id = clip.id;
  out.category = clip.category;
  out.fps = target_fps;
  out.frames.resize(count);

  for (size_t k = 0; k < count; ++k) {
    const double t = t0 + static_cast<double>(k) / target_fps;
    // Segment containing t; clamp to the ends.
    size_t hi = 1;
    while (hi + 1 < clip.frames.size() && clip.frames[hi].t < t) ++hi;
    const MotionFrame& a = clip.frames[hi - 1];
    const MotionFrame& b = clip.frames[hi];
    const double alpha = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);

    MotionFrame f;
    f.t = t;
    f.root.rotation = slerp_shortest(a.root.rotation, b.root.rotation, alpha);
    f.root.translation = (1.0 - alpha) * a.root.translation + alpha * b.root.translation;
    f.keypoints.resize(a.keypoints.size());
    for (size_t i = 0; i < a.keypoints.size(); ++i)
      f.keypoints[i] = (1.0 - alpha) * a.keypoints[i] + alpha * b.keypoints[i];
    f.joint_pos = (1.0 - alpha) * a.joint_pos + alpha * b.joint_pos;
    f.contacts = alpha < 0.5 ? a.contacts : b.contacts;
    out.frames[k] = std::move(f);
  }
  return out;
}

/// Interpolated frame at an arbitrary time, clamped to the clip's span.
/// Same blending rules as resample().
inline MotionFrame sample_frame(const MotionClip& clip, double t) {
  require(clip.frames.size() >= 2, "sample_frame: clip shorter than 2 frames");
  size_t hi = 1;
  while (hi + 1 < clip.frames.size() && clip.frames[hi].t < t) ++hi;
  const MotionFrame& a = clip.frames[hi - 1];
  const MotionFrame& b = clip.frames[hi];
  const double alpha = std::clamp((t - a.t) / (b.t - a.t), 0.0, 1.0);

  MotionFrame f;
  f.t = t;
  f.root.rotation = slerp_shortest(a.root.rotation, b.root.rotation, alpha);
  f.root.translation = (1.0 - alpha) * a.root.translation + alpha * b.root.translation;
  f.keypoints.resize(a.keypoints.size());
  for (size_t i = 0; i < a.keypoints.size(); ++i)
    f.keypoints[i] = (1.0 - alpha) * a.keypoints[i] + alpha * b.keypoints[i];
  f.joint_pos = (1.0 - alpha) * a.joint_pos + alpha * b.joint_pos;
  f.contacts = alpha < 0.5 ? a.contacts : b.contacts;
  return f;
}

// ---------------------------------------------------------------------------
// Dataset statistics and the difficulty-aware adaptive sampler.
// ---------------------------------------------------------------------------

struct CategoryStats {
  std::map<Category, double> seconds;
  std::map<Category, double> percent;
  double total_seconds = 0.0;
};

inline CategoryStats dataset_stats(const std::vector<MotionClip>& clips) {
  require(!clips.empty(), "dataset_stats: empty manifest");
  CategoryStats stats;
  for (const MotionClip& c : clips) {
    stats.seconds[c.category] += c.duration();
    stats.total_seconds += c.duration();
  }
  require(stats.total_seconds > 0.0, "dataset_stats: zero total duration");
  for (const auto& [cat, sec] : stats.seconds) stats.percent[cat] = 100.0 * sec / stats.total_seconds;
  return stats;
}

/// Manifest file: a JSON array of clip file paths. Relative paths resolve
/// against the manifest's directory.
inline std::vector<std::string> load_manifest(const std::string& path) {
  const auto doc = detail::parse_json(detail::read_file(path), "manifest");
  if (!doc.is_array()) fail("manifest: expected a JSON array of file paths");
  std::string dir;
  const size_t slash = path.find_last_of('/');
  if (slash != std::string::npos) dir = path.substr(0, slash + 1);
  std::vector<std::string> out;
  for (const auto& entry : doc) {
    if (!entry.is_string()) fail("manifest: entries must be strings");
    std::string p = entry.get<std::string>();
    if (!p.empty() && p[0] != '/') p = dir + p;
    out.push_back(std::move(p));
  }
  return out;
}

/// Difficulty-aware clip sampler: each clip's difficulty is an EMA of its
/// episode tracking error, sampling probabilities are proportional to
/// difficulty with a floor, and a clip-and-renormalize step bounds every
/// probability into [p_min, p_max] so easy clips keep coverage.
class AdaptiveSampler {
 public:
  static constexpr double kDifficultyFloor = 1e-6;

  AdaptiveSampler(std::vector<std::string> clip_ids, double ema_coeff, double p_min, double p_max)
      : ids_(std::move(clip_ids)), beta_(ema_coeff), p_min_(p_min), p_max_(p_max) {
    require(!ids_.empty(), "AdaptiveSampler: at least one clip required");
    require(beta_ >= 0.0 && beta_ <= 1.0, "AdaptiveSampler: EMA coefficient must be in [0,1]");
    const double n = static_cast<double>(ids_.size());
    require(p_min_ >= 0.0 && p_min_ <= p_max_ && p_max_ <= 1.0, "AdaptiveSampler: need 0 <= p_min <= p_max <= 1");
    require(n * p_min_ <= 1.0 + 1e-12 && n * p_max_ >= 1.0 - 1e-12,
            "AdaptiveSampler: bounds infeasible for this clip count");
    difficulty_.assign(ids_.size(), 0.0);
    recompute();
  }

  const std::vector<std::string>& clip_ids() const { return ids_; }
  const std::vector<double>& probabilities() const { return probs_; }
  double difficulty(const std::string& id) const { return difficulty_[index_of(id)]; }

  void update_difficulty(const std::string& id, double episode_error) {
    require(episode_error >= 0.0 && std::isfinite(episode_error),
            "update_difficulty: episode error must be finite and >= 0");
    const size_t i = index_of(id);
    difficulty_[i] = (1.0 - beta_) * difficulty_[i] + beta_ * episode_error;
    recompute();
  }

  const std::string& sample(Rng& rng) const {
    const double u = rng.uniform01();
    double acc = 0.0;
    for (size_t i = 0; i < probs_.size(); ++i) {
      acc += probs_[i];
      if (u < acc) return ids_[i];
    }
    return ids_.back();
  }

 private:
  size_t index_of(const std::string& id) const {
    for (size_t i = 0; i < ids_.size(); ++i)
      if (ids_[i] == id) return i;
    fail("AdaptiveSampler: unknown clip id '" + id + "'");
  }

  // p_i = clamp(t * max(difficulty_i, floor), p_min, p_max) where t solves
  // sum(p) == 1. The sum is continuous and nondecreasing in t, sweeping from
  // n*p_min at t=0 to n*p_max for large t; the constructor guarantees 1 lies
  // in that range, so bisection always lands on the fixed point.
  void recompute() {
    const size_t n = ids_.size();
    std::vector<double> w(n);
    double w_min = std::numeric_limits<double>::max();
    for (size_t i = 0; i < n; ++i) {
      w[i] = std::max(difficulty_[i], kDifficultyFloor);
      w_min = std::min(w_min, w[i]);
    }

    const auto mass = [&](double t) {
      double s = 0.0;
      for (double wi : w) s += std::clamp(t * wi, p_min_, p_max_);
      return s;
    };
    double lo = 0.0;
    double hi = p_max_ / w_min;  // everything saturated at p_max
    for (int iter = 0; iter < 200; ++iter) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) < 1.0 ? lo : hi) = mid;
    }

    const double t = 0.5 * (lo + hi);
    probs_.resize(n);
    double sum = 0.0;
    for (size_t i = 0; i < n; ++i) {
      probs_[i] = std::clamp(t * w[i], p_min_, p_max_);
      sum += probs_[i];
    }
    require(std::abs(sum - 1.0) < 1e-9, "AdaptiveSampler: renormalization failed to converge");
  }

  std::vector<std::string> ids_;
  double beta_;
  double p_min_, p_max_;
  std::vector<double> difficulty_;
  std::vector<double> probs_;
};

}  // namespace clot
