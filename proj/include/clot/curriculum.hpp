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

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "clot/core.hpp"
#include "clot/model_io.hpp"

namespace clot {

/// One scheduled quantity: starts at the low end of its range and grows
/// multiplicatively toward the high end each qualifying update.
struct CurriculumParam {
  std::string name;
  double value = 0.0;
  double rate = 0.0;  // per-update growth factor is (1 + rate)
  double lo = 0.0;
  double hi = 0.0;
};

/// Multiplicative curriculum: whenever the motion completion ratio eta
/// exceeds the trigger threshold, every parameter is scaled by (1 + rate) and
/// clamped into its range; otherwise nothing moves. The iteration counter
/// advances either way.
class Curriculum {
 public:
  Curriculum(std::vector<CurriculumParam> params, double eta_threshold = 0.8)
      : params_(std::move(params)), eta_threshold_(eta_threshold) {
    require(eta_threshold_ > 0.0 && eta_threshold_ < 1.0, "Curriculum: threshold must lie in (0,1)");
    for (const CurriculumParam& p : params_) {
      require(p.rate > 0.0, "Curriculum '" + p.name + "': rate must be positive");
      require(p.lo <= p.hi, "Curriculum '" + p.name + "': lo must not exceed hi");
      require(p.value >= p.lo && p.value <= p.hi, "Curriculum '" + p.name + "': value outside range");
    }
  }

  void update(double eta) {
    require(eta >= 0.0 && eta <= 1.0, "Curriculum::update: eta must lie in [0,1]");
    if (eta > eta_threshold_) {
      for (CurriculumParam& p : params_) p.value = std::clamp(p.value * (1.0 + p.rate), p.lo, p.hi);
    }
    ++iteration_;
  }

  double current(const std::string& name) const { return find(name).value; }

  const std::vector<CurriculumParam>& params() const { return params_; }
  double eta_threshold() const { return eta_threshold_; }
  long iteration() const { return iteration_; }

  std::string csv_header() const {
    std::string line = "iteration,eta";
    for (const CurriculumParam& p : params_) line += "," + p.name;
    return line + "\n";
  }

  std::string csv_row(double eta) const {
    std::string line = std::to_string(iteration_) + "," + format_double(eta);
    for (const CurriculumParam& p : params_) line += "," + format_double(p.value);
    return line + "\n";
  }

 private:
  const CurriculumParam& find(const std::string& name) const {
    for (const CurriculumParam& p : params_)
      if (p.name == name) return p;
    fail("Curriculum: unknown parameter '" + name + "'");
  }

  std::vector<CurriculumParam> params_;
  double eta_threshold_;
  long iteration_ = 0;
};

/// The stock schedule. Every parameter initializes at its range floor.
inline Curriculum default_curriculum(double eta_threshold = 0.8) {
  std::vector<CurriculumParam> params = {
      {"reward_penalty", 0.05, 3e-6, 0.05, 1.0},
      {"reward_limits", 0.9, 2.5e-7, 0.9, 0.95},
      {"push_interval", 1.0, 1.5e-5, 1.0, 50.0},
      {"observation_preshift", 1.0, 5e-6, 1.0, 2.0},
      {"termination_distance", 2.5, 3e-6, 2.5, 3.0},
      {"termination_scale", 0.8, 1e-5, 0.8, 4.0},
      {"noise", 0.05, 3e-6, 0.05, 1.0},
  };
  return Curriculum(std::move(params), eta_threshold);
}

/// Schedule file: {"eta_threshold": ..., "params": [{"name","sigma","range":[lo,hi]}...]}.
inline Curriculum parse_curriculum_json(const std::string& text) {
  const auto doc = detail::parse_json(text, "curriculum");
  const double eta0 = detail::number(detail::member(doc, "eta_threshold", "curriculum"), "curriculum.eta_threshold");
  const auto& arr = detail::member(doc, "params", "curriculum");
  if (!arr.is_array()) fail("curriculum.params: expected an array");
  std::vector<CurriculumParam> params;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "curriculum.params[" + std::to_string(i) + "]";
    const auto& entry = arr[i];
    CurriculumParam p;
    p.name = detail::member(entry, "name", path).get<std::string>();
    p.rate = detail::number(detail::member(entry, "sigma", path), path + ".sigma");
    const auto& range = detail::member(entry, "range", path);
    if (!range.is_array() || range.size() != 2) fail(path + ".range: expected [lo, hi]");
    p.lo = detail::number(range[0], path + ".range[0]");
    p.hi = detail::number(range[1], path + ".range[1]");
    p.value = p.lo;
    params.push_back(std::move(p));
  }
  return Curriculum(std::move(params), eta0);
}

inline std::string curriculum_to_json(const Curriculum& c) {
  nlohmann::json arr = nlohmann::json::array();
  for (const CurriculumParam& p : c.params())
    arr.push_back({{"name", p.name}, {"sigma", p.rate}, {"range", {p.lo, p.hi}}});
  return nlohmann::json{{"eta_threshold", c.eta_threshold()}, {"params", arr}}.dump(2) + "\n";
}

/// Motion completion ratio over a sliding window of episode outcomes:
/// the fraction of recent episodes that reached their clip's end without
/// early termination.
class CompletionTracker {
 public:
  explicit CompletionTracker(size_t window = 100) : window_(window) {}

  void record(bool completed) {
    outcomes_.push_back(completed);
    if (outcomes_.size() > window_) outcomes_.erase(outcomes_.begin());
  }

  double ratio() const {
    if (outcomes_.empty()) return 0.0;
    size_t done = 0;
    for (bool b : outcomes_) done += b ? 1 : 0;
    return static_cast<double>(done) / static_cast<double>(outcomes_.size());
  }

 private:
  size_t window_;
  std::vector<bool> outcomes_;
};

}  // namespace clot
