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

// Command-line front end. Subcommands cover the offline path (retarget,
// simulate, evaluate, dataset-stats) and the online path (stream-serve,
// stream-run). Artifacts go to --out; reports print to stdout as JSON.
// CLOT_LOG=error|warn|info|debug controls diagnostics on stderr.

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "clot/motion_data.hpp"
#include "clot/pipeline.hpp"
#include "clot/retarget.hpp"
#include "clot/stream.hpp"
#include "clot/synthetic.hpp"

namespace clot {
namespace {

std::vector<int> frame_indices(const nlohmann::json& arr, const RobotModel& model,
                               const std::string& what) {
  require(arr.is_array(), what + ": expected an array of frame names or indices");
  std::vector<int> out;
  for (const auto& e : arr)
    out.push_back(e.is_string() ? model.frame_index(e.get<std::string>()) : e.get<int>());
  return out;
}

// Pipeline settings come from one JSON file with optional sections; anything
// absent falls back to the humanoid defaults derived from the model's frame
// names, so the shipped assets run without a config file at all.
PipelineConfig load_pipeline_config(const std::string& path, const RobotModel& model) {
  PipelineConfig config;
  nlohmann::json doc;
  if (!path.empty()) {
    doc = detail::parse_json(detail::read_file(path), "pipeline config '" + path + "'");
    require(doc.is_object(), "pipeline config '" + path + "': expected a JSON object");
  }

  if (doc.contains("rates")) {
    const auto& r = doc.at("rates");
    if (r.contains("mocap_hz")) config.rates.mocap_hz = r.at("mocap_hz").get<int>();
    if (r.contains("control_hz")) config.rates.control_hz = r.at("control_hz").get<int>();
    if (r.contains("physics_hz")) config.rates.physics_hz = r.at("physics_hz").get<int>();
  }
  config.retarget = doc.contains("retarget") ? parse_retarget_json(doc.at("retarget"), model)
                                             : humanoid_retarget_config(model);
  if (doc.contains("reward")) config.reward = parse_reward_json(doc.at("reward"));
  if (doc.contains("dr")) config.dr = parse_dr_json(doc.at("dr"));
  if (doc.contains("gains")) config.gains = parse_gains_json(doc.at("gains").dump(), model);
  config.foot_frames = doc.contains("foot_frames")
                           ? frame_indices(doc.at("foot_frames"), model, "foot_frames")
                           : humanoid_foot_frames(model);
  config.vr_frames = doc.contains("vr_frames")
                         ? frame_indices(doc.at("vr_frames"), model, "vr_frames")
                         : humanoid_vr_frames(model);
  if (doc.contains("randomize")) config.randomize = doc.at("randomize").get<bool>();
  if (doc.contains("duration")) config.duration = doc.at("duration").get<double>();
  if (doc.contains("termination_distance"))
    config.termination_distance = doc.at("termination_distance").get<double>();
  if (doc.contains("termination_scale"))
    config.termination_scale = doc.at("termination_scale").get<double>();
  if (doc.contains("root_servo_kp")) config.root_servo_kp = doc.at("root_servo_kp").get<double>();
  if (doc.contains("root_servo_kp_ang"))
    config.root_servo_kp_ang = doc.at("root_servo_kp_ang").get<double>();
  if (doc.contains("warmup_retarget_frames"))
    config.warmup_retarget_frames = doc.at("warmup_retarget_frames").get<int>();
  return config;
}

// One clip frame per control step: root pose, tracked body positions as the
// keypoint channel, and the actuated joint vector.
MotionClip trajectory_to_clip(const std::vector<TrajectoryStep>& steps, double fps,
                              const std::string& id, Category category) {
  require(steps.size() >= 2, "trajectory '" + id + "': needs at least 2 control steps");
  MotionClip out;
  out.id = id;
  out.category = category;
  out.fps = fps;
  for (size_t k = 0; k < steps.size(); ++k) {
    MotionFrame f;
    f.t = static_cast<double>(k) / fps;
    f.root = steps[k].root;
    f.keypoints = steps[k].body_pos;
    f.joint_pos = steps[k].joint_pos;
    out.frames.push_back(std::move(f));
  }
  return out;
}

TrajectoryPair pair_from_clips(const MotionClip& robot, const MotionClip& reference) {
  require(robot.frames.size() == reference.frames.size(),
          "evaluate: robot and reference clips differ in frame count");
  require(robot.keypoint_count() == reference.keypoint_count(),
          "evaluate: robot and reference clips differ in body count");
  require(robot.joint_count() == reference.joint_count() && robot.joint_count() > 0,
          "evaluate: both clips must carry joint positions");
  TrajectoryPair pair;
  auto to_step = [](const MotionFrame& f) {
    TrajectoryStep s;
    s.body_pos = f.keypoints;
    s.root = f.root;
    s.joint_pos = f.joint_pos;
    return s;
  };
  for (size_t k = 0; k < robot.frames.size(); ++k) {
    pair.robot.push_back(to_step(robot.frames[k]));
    pair.reference.push_back(to_step(reference.frames[k]));
  }
  return pair;
}

struct RetargetArgs {
  std::string model, clip, config, out;
};

int cmd_retarget(const RetargetArgs& args) {
  const RobotModel model = load_model(args.model);
  const MotionClip clip = load_clip(args.clip);
  log(LogLevel::kInfo, "retarget: clip '" + clip.id + "', " + std::to_string(clip.frames.size()) +
                           " frames at " + format_double(clip.fps) + " fps");
  RetargetConfig config;
  if (args.config.empty()) {
    config = humanoid_retarget_config(model);
  } else {
    config = parse_retarget_json(
        detail::parse_json(detail::read_file(args.config), "retarget config"), model);
  }

  const ReferenceTrajectory ref = retarget_clip(model, clip, config);
  MotionClip out = clip;
  for (size_t k = 0; k < out.frames.size(); ++k) {
    out.frames[k].root = ref.frames[k].root;
    out.frames[k].joint_pos = ref.frames[k].q_ref;
  }
  save_clip(out, args.out);
  log(LogLevel::kInfo, "retarget: wrote '" + args.out + "'");
  return 0;
}

struct SimulateArgs {
  std::string model, clip, config, out, ref_out, obs_csv;
  uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& args) {
  const RobotModel model = load_model(args.model);
  const MotionClip clip = load_clip(args.clip);
  const PipelineConfig config = load_pipeline_config(args.config, model);

  TrajectoryPair trajectory;
  std::vector<VecX> observations;
  const RunReport report =
      run_closed_loop(model, clip, config, reference_follower_policy(), args.seed, &trajectory,
                      args.obs_csv.empty() ? nullptr : &observations);
  if (!args.out.empty()) {
    save_clip(trajectory_to_clip(trajectory.robot, config.rates.control_hz,
                                 clip.id + ".rollout", clip.category),
              args.out);
    log(LogLevel::kInfo, "simulate: wrote rollout '" + args.out + "'");
  }
  if (!args.ref_out.empty()) {
    save_clip(trajectory_to_clip(trajectory.reference, config.rates.control_hz,
                                 clip.id + ".reference", clip.category),
              args.ref_out);
    log(LogLevel::kInfo, "simulate: wrote reference '" + args.ref_out + "'");
  }
  if (!args.obs_csv.empty()) {
    // One row per control tick: time, then the full actor observation.
    std::string csv;
    for (size_t k = 0; k < observations.size(); ++k) {
      csv += format_double(static_cast<double>(k) / config.rates.control_hz);
      for (long i = 0; i < observations[k].size(); ++i)
        csv += "," + format_double(observations[k][i]);
      csv += "\n";
    }
    detail::write_file(args.obs_csv, csv);
    log(LogLevel::kInfo, "simulate: wrote observations '" + args.obs_csv + "'");
  }
  std::printf("%s\n", report_to_json(report).dump(2).c_str());
  return 0;
}

struct EvaluateArgs {
  std::string robot, ref, out, csv;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const MotionClip robot = load_clip(args.robot);
  const MotionClip reference = load_clip(args.ref);
  const TrajectoryPair pair = pair_from_clips(robot, reference);
  const MetricsReport metrics = compute_metrics(pair);
  const std::string text = metrics_to_json(metrics).dump(2);

  if (!args.csv.empty()) {
    // Per-step error-over-time rows for plotting.
    std::string csv = "t,e_mgbp,e_mgrp\n";
    for (size_t k = 0; k < pair.steps(); ++k) {
      TrajectoryPair step;
      step.robot.push_back(pair.robot[k]);
      step.reference.push_back(pair.reference[k]);
      csv += format_double(robot.frames[k].t) + "," + format_double(e_mgbp(step)) + "," +
             format_double(e_mgrp(step)) + "\n";
    }
    detail::write_file(args.csv, csv);
    log(LogLevel::kInfo, "evaluate: wrote per-step errors '" + args.csv + "'");
  }
  if (!args.out.empty()) detail::write_file(args.out, text + "\n");
  std::printf("%s\n", text.c_str());
  return 0;
}

struct StreamServeArgs {
  std::string clip;
  uint16_t port = 0;
};

int cmd_stream_serve(const StreamServeArgs& args) {
  const MotionClip clip = load_clip(args.clip);
  const std::vector<WireFrame> frames = clip_to_wire(clip);
  StreamServer server(args.port);
  std::printf("serving %zu frames on port %u\n", frames.size(), server.port());
  std::fflush(stdout);
  server.serve_frames(frames);
  log(LogLevel::kInfo, "stream-serve: connection finished");
  return 0;
}

struct StreamRunArgs {
  std::string host = "127.0.0.1";
  std::string model, config, out;
  uint16_t port = 0;
  double fps = 120.0;
  uint64_t seed = 0;
};

int cmd_stream_run(const StreamRunArgs& args) {
  const RobotModel model = load_model(args.model);
  const PipelineConfig config = load_pipeline_config(args.config, model);

  const std::vector<WireFrame> wire = consume_stream(args.host, args.port);
  log(LogLevel::kInfo, "stream-run: received " + std::to_string(wire.size()) + " frames");
  require(wire.size() >= 2, "stream-run: need at least 2 frames to form a clip");

  // Received frames become a clip on a uniform --fps time base; the wire
  // timestamps are producer-side and may carry rounding.
  MotionClip clip;
  clip.id = "stream";
  clip.category = Category::kUnlab;
  clip.fps = args.fps;
  for (size_t k = 0; k < wire.size(); ++k) {
    MotionFrame f = motion_from_wire(wire[k]);
    f.t = static_cast<double>(k) / args.fps;
    clip.frames.push_back(std::move(f));
  }

  const RunReport report =
      run_closed_loop(model, clip, config, reference_follower_policy(), args.seed);
  const std::string text = report_to_json(report).dump(2);
  if (!args.out.empty()) detail::write_file(args.out, text + "\n");
  std::printf("%s\n", text.c_str());
  return 0;
}

struct DatasetStatsArgs {
  std::string manifest, out;
};

int cmd_dataset_stats(const DatasetStatsArgs& args) {
  const std::vector<std::string> paths = load_manifest(args.manifest);
  std::vector<MotionClip> clips;
  for (const std::string& path : paths) clips.push_back(load_clip(path));
  const CategoryStats stats = dataset_stats(clips);

  std::vector<std::pair<Category, double>> rows(stats.seconds.begin(), stats.seconds.end());
  std::sort(rows.begin(), rows.end(),
            [](const auto& a, const auto& b) { return a.second > b.second; });
  std::string csv = "category,seconds,percent\n";
  for (const auto& [cat, sec] : rows)
    csv += std::string(category_name(cat)) + "," + format_double(sec) + "," +
           format_double(stats.percent.at(cat)) + "\n";
  csv += "total," + format_double(stats.total_seconds) + ",100\n";

  if (!args.out.empty()) detail::write_file(args.out, csv);
  std::printf("%s", csv.c_str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"closed-loop whole-body teleoperation toolkit"};
  app.require_subcommand(1);

  RetargetArgs retarget_args;
  auto* retarget = app.add_subcommand("retarget", "retarget a mocap clip onto a robot model");
  retarget->add_option("--model", retarget_args.model, "robot model JSON")->required();
  retarget->add_option("--clip", retarget_args.clip, "input .clot.jsonl clip")->required();
  retarget->add_option("--config", retarget_args.config, "retarget config JSON");
  retarget->add_option("--out", retarget_args.out, "output .clot.jsonl with joint_pos populated")
      ->required();

  SimulateArgs simulate_args;
  auto* simulate = app.add_subcommand("simulate", "run one closed-loop episode on a clip");
  simulate->add_option("--model", simulate_args.model, "robot model JSON")->required();
  simulate->add_option("--clip", simulate_args.clip, "input .clot.jsonl clip")->required();
  simulate->add_option("--config", simulate_args.config, "pipeline config JSON");
  simulate->add_option("--seed", simulate_args.seed, "episode seed");
  simulate->add_option("--out", simulate_args.out, "rollout trajectory .clot.jsonl");
  simulate->add_option("--ref-out", simulate_args.ref_out, "reference trajectory .clot.jsonl");
  simulate->add_option("--obs-csv", simulate_args.obs_csv, "per-tick actor observation CSV");

  EvaluateArgs evaluate_args;
  auto* evaluate = app.add_subcommand("evaluate", "tracking metrics for a trajectory pair");
  evaluate->add_option("--robot", evaluate_args.robot, "robot trajectory .clot.jsonl")->required();
  evaluate->add_option("--ref", evaluate_args.ref, "reference trajectory .clot.jsonl")->required();
  evaluate->add_option("--out", evaluate_args.out, "metrics JSON file");
  evaluate->add_option("--csv", evaluate_args.csv, "per-step error CSV file");

  StreamServeArgs serve_args;
  auto* serve = app.add_subcommand("stream-serve", "serve a clip's frames over TCP once");
  serve->add_option("--clip", serve_args.clip, "input .clot.jsonl clip")->required();
  serve->add_option("--port", serve_args.port, "TCP port, 0 picks a free one");

  StreamRunArgs stream_run_args;
  auto* stream_run =
      app.add_subcommand("stream-run", "consume a frame stream and run the closed loop");
  stream_run->add_option("--host", stream_run_args.host, "producer host");
  stream_run->add_option("--port", stream_run_args.port, "producer port")->required();
  stream_run->add_option("--model", stream_run_args.model, "robot model JSON")->required();
  stream_run->add_option("--config", stream_run_args.config, "pipeline config JSON");
  stream_run->add_option("--fps", stream_run_args.fps, "frame rate of the incoming stream");
  stream_run->add_option("--seed", stream_run_args.seed, "episode seed");
  stream_run->add_option("--out", stream_run_args.out, "report JSON file");

  DatasetStatsArgs stats_args;
  auto* stats = app.add_subcommand("dataset-stats", "per-category seconds for a clip manifest");
  stats->add_option("manifest", stats_args.manifest, "manifest JSON: array of clip paths")
      ->required();
  stats->add_option("--out", stats_args.out, "CSV output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (retarget->parsed()) return cmd_retarget(retarget_args);
    if (simulate->parsed()) return cmd_simulate(simulate_args);
    if (evaluate->parsed()) return cmd_evaluate(evaluate_args);
    if (serve->parsed()) return cmd_stream_serve(serve_args);
    if (stream_run->parsed()) return cmd_stream_run(stream_run_args);
    if (stats->parsed()) return cmd_dataset_stats(stats_args);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "clot: %s\n", e.what());
    return 1;
  }
  return 0;
}

}  // namespace
}  // namespace clot

int main(int argc, char** argv) { return clot::run(argc, argv); }
