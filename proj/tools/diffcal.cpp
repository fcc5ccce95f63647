// Copyright 2026 The diffcal Authors.
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

// Command-line front end: calibrate, run scenarios, inspect results.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "diffcal/diffcal.hpp"

namespace {

using namespace diffcal;
namespace fs = std::filesystem;
using nlohmann::json;

const char* kStoreKinds[] = {"not_calibrated", "checksum", "version",
                             "validation",     "format",   "io"};

void print_aggregate(const char* name, const char* unit, const json& a) {
  if (a.at("count").get<int>() == 0) return;
  std::printf("  %-20s mean %8.3f  max %8.3f %s  (n=%d)\n", name, a.at("mean").get<double>(),
              a.at("max").get<double>(), unit, a.at("count").get<int>());
}

void print_report(const json& r) {
  const std::string family = r.at("family");
  std::printf("scenario %s (%s)\n", r.at("scenario").get<std::string>().c_str(), family.c_str());
  std::printf("  %-14s %5s %7s %7s %9s %9s %9s\n", "robot", "trial", "size", "speed", "duration",
              "lin cm/m", family == "wall_bounce" ? "deg/m" : "extra");
  for (const auto& t : r.at("trials")) {
    double extra = 0.0;
    if (family == "circles") extra = t.at("diameter_drift_cm_m");
    if (family == "repeat_line") extra = t.at("rotational_drift_deg_min");
    if (family == "wall_bounce") extra = t.at("segment_curvature_deg_m");
    std::printf("  %-14s %5d %7.1f %7.1f %9.1f %9.3f %9.3f", t.at("robot").get<std::string>().c_str(),
                t.at("trial").get<int>(), t.at("size_cm").get<double>(),
                t.at("speed_cm_s").get<double>(), t.at("duration_s").get<double>(),
                t.at("linear_drift_cm_m").get<double>(), extra);
    if (family == "wall_bounce" && t.at("target_found").get<int>() >= 0) {
      std::printf("  found target %d at %.1f s", t.at("target_found").get<int>(),
                  t.at("found_time_s").get<double>());
    }
    std::printf("\n");
  }
  if (family != "wall_bounce") print_aggregate("linear drift", "cm/m", r.at("linear_drift_cm_m"));
  print_aggregate("diameter drift", "cm/m", r.at("diameter_drift_cm_m"));
  print_aggregate("rotational drift", "deg/min", r.at("rotational_drift_deg_min"));
  print_aggregate("segment curvature", "deg/m", r.at("segment_curvature_deg_m"));
}

void write_text(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

harness::Scenario load(const std::string& ref, std::optional<std::uint64_t> seed,
                       std::optional<int> trials) {
  harness::Scenario s = harness::resolve_scenario(ref);
  if (seed) s.seed = *seed;
  if (trials) s.trials = *trials;
  s.validate();
  return s;
}

int cmd_calibrate(const std::string& ref, std::size_t robot_index,
                  std::optional<std::uint64_t> seed, const std::string& out, bool quiet) {
  const harness::Scenario s = load(ref, seed, std::nullopt);
  if (robot_index >= s.robots.size()) throw DomainError("--robot out of range");
  auto robot = harness::power_on(harness::seeded_spec(s.robots[robot_index], s.seed, robot_index, 0));
  calib::CalibrationTrace trace;
  calib::CalibrationReport rep;
  try {
    rep = calib::run_full_calibration(*robot, s.calibration);
  } catch (const calib::CalibrationError& e) {
    std::fprintf(stderr, "calibration failed at %s: %s\n", e.step().c_str(), e.what());
    return 3;
  }
  if (!quiet) {
    for (const auto& ev : rep.trace) {
      std::printf("%8.2f  %-28s %s\n", ev.time, ev.step.c_str(), ev.message.c_str());
    }
    std::printf("Ku %.3f  Tu %.3f s  duration %.1f s\n", rep.tuning.ku, rep.tuning.tu,
                rep.duration);
  }
  if (!out.empty()) {
    store::save_calibration(rep.record, out);
    std::printf("saved %s\n", out.c_str());
  } else {
    std::printf("%s\n", store::record_to_json(rep.record).dump(2).c_str());
  }
  return 0;
}

int cmd_run(const std::string& ref, std::optional<std::uint64_t> seed, std::optional<int> trials,
            const std::string& out, const std::string& format) {
  const harness::Scenario s = load(ref, seed, trials);
  const harness::ScenarioResult r = harness::run_scenario(s);
  const json report = harness::to_json(r.report);
  if (!out.empty()) {
    fs::create_directories(out);
    for (const auto& run : r.runs) {
      if (format == "csv") {
        std::ostringstream text;
        harness::write_csv(text, run.log);
        write_text(fs::path(out) / (run.log.label + ".csv"), text.str());
      } else {
        write_text(fs::path(out) / (run.log.label + ".json"),
                   harness::log_to_json(run.log).dump() + "\n");
      }
    }
    write_text(fs::path(out) / "report.json", report.dump(2) + "\n");
  }
  print_report(report);
  return 0;
}

int cmd_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  print_report(json::parse(in));
  return 0;
}

int cmd_sweep(const std::string& side, double step, double dwell, std::uint64_t seed,
              const std::string& out) {
  RobotSpec spec;
  spec.gyro.seed = derive_seed(seed, 0, 0, 1);
  spec.rangefinder.seed = derive_seed(seed, 0, 0, 2);
  auto robot = harness::power_on(spec);
  calib::settle_gyro(*robot);
  const auto pts = calib::sweep_motor(*robot, side == "left" ? calib::Side::kLeft
                                                              : calib::Side::kRight,
                                      step, dwell);
  std::ostringstream text;
  text << "pwm_us,rate_rad_s\n";
  char buf[64];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.1f,%.6f\n", p.pwm, p.rate);
    text << buf;
  }
  if (out.empty()) {
    std::cout << text.str();
  } else {
    write_text(out, text.str());
  }
  return 0;
}

int cmd_inspect(const std::string& path) {
  const calib::CalibrationRecord r = store::load_calibration(path);
  std::printf("%s\n", store::record_to_json(r).dump(2).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differential-drive calibration simulator"};
  app.require_subcommand(1);

  std::string scenario = "builtin:squares";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::string format = "csv";
  std::size_t robot_index = 0;
  bool quiet = false;

  auto* cal = app.add_subcommand("calibrate", "Run the calibration routine for one robot");
  cal->add_option("--scenario", scenario, "Scenario file or builtin:<name>");
  cal->add_option("--robot", robot_index, "Robot index within the scenario");
  cal->add_option("--seed", seed, "Master seed override");
  cal->add_option("--out", out, "Calibration file to write");
  cal->add_flag("--quiet", quiet, "Suppress the step trace");

  auto* run = app.add_subcommand("run", "Run a scenario and report drift metrics");
  run->add_option("--scenario", scenario, "Scenario file or builtin:<name>")->required();
  run->add_option("--seed", seed, "Master seed override");
  run->add_option("--trials", trials, "Trials per configuration");
  run->add_option("--out", out, "Directory for trajectory logs and report.json");
  run->add_option("--format", format, "Trajectory log format")
      ->check(CLI::IsMember({"csv", "json"}));

  std::string report_path;
  auto* rep = app.add_subcommand("report", "Print a saved report.json");
  rep->add_option("report", report_path, "report.json from a previous run")->required();

  std::string side = "left";
  double step = 10.0, dwell = 0.3;
  std::uint64_t sweep_seed = 1;
  auto* sweep = app.add_subcommand("sweep-motor", "Measure rate against pulse width");
  sweep->add_option("--side", side)->check(CLI::IsMember({"left", "right"}));
  sweep->add_option("--step", step, "Pulse step in microseconds");
  sweep->add_option("--dwell", dwell, "Seconds per step");
  sweep->add_option("--seed", sweep_seed);
  sweep->add_option("--out", out, "CSV file (stdout if omitted)");

  std::string cal_path;
  auto* inspect = app.add_subcommand("inspect-calibration", "Verify and print a calibration file");
  inspect->add_option("file", cal_path)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cal) return cmd_calibrate(scenario, robot_index, seed, out, quiet);
    if (*run) return cmd_run(scenario, seed, trials, out, format);
    if (*rep) return cmd_report(report_path);
    if (*sweep) return cmd_sweep(side, step, dwell, sweep_seed, out);
    if (*inspect) return cmd_inspect(cal_path);
  } catch (const harness::ScenarioError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const store::StoreError& e) {
    std::fprintf(stderr, "calibration file error (%s): %s\n",
                 kStoreKinds[static_cast<int>(e.kind())], e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
