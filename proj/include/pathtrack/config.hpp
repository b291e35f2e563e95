#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "pathtrack/course.hpp"
#include "pathtrack/lateral.hpp"
#include "pathtrack/longitudinal.hpp"
#include "pathtrack/lqr.hpp"
#include "pathtrack/mpc.hpp"
#include "pathtrack/vehicle.hpp"

namespace pathtrack {

enum class PlantModel { Kinematic, Dynamic };
enum class CourseType { Straight, Circle, LaneChange, Sine, File };
enum class ControllerType { PurePursuit, Stanley, Pid, Lqr, Mpc };
enum class LongitudinalType { Pid, AdaptivePid, Ideal };

struct CourseSpec {
  CourseType type = CourseType::Straight;
  double spacing = 0.25;
  double laps = 1.0;  // closed courses only
  double straight_length = 200.0;
  double radius = 30.0;
  double approach = 50.0;
  double transition = 30.0;
  double offset = 3.5;
  double exit = 50.0;
  double amplitude = 3.0;
  double wavelength = 50.0;
  double sine_length = 200.0;
  std::string file;
  bool file_closed = false;

  bool operator==(const CourseSpec&) const = default;
};

struct ControllerSpec {
  ControllerType type = ControllerType::PurePursuit;
  double rate = 50.0;  // [Hz]
  PurePursuitConfig pure_pursuit;
  StanleyConfig stanley;
  SteeringPidConfig pid;
  LqrConfig lqr;
  MpcConfig mpc;

  bool operator==(const ControllerSpec&) const = default;
};

struct LongitudinalSpec {
  LongitudinalType type = LongitudinalType::Pid;
  double rate = 50.0;
  PidGains gains{0.36, 0.0005, 0.11};
  double gamma_p = 0.1;
  double gamma_i = 0.002;  // per sample, like ki
  double gamma_d = 0.1;
  double filter_tc = 0.5;

  AdaptivePidConfig adaptive() const;
  bool operator==(const LongitudinalSpec&) const = default;
};

struct InitialSpec {
  double lateral_offset = 0.0;  // [m], positive left of the path
  double heading_offset = 0.0;  // [rad]
  std::optional<double> speed;  // defaults to the target speed
  bool match_curvature = true;  // start steered to the path curvature at the start point

  bool operator==(const InitialSpec&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  std::uint64_t seed = 1;
  PlantModel plant = PlantModel::Dynamic;
  double target_speed = 10.0 / 3.6;  // [m/s]
  double dt = 0.01;
  double duration = 0.0;  // 0 = until the course is complete
  double divergence_limit = 20.0;
  double payload = 0.0;  // extra mass [kg]
  double speed_noise = 0.0;  // std of the speed measurement [m/s]
  VehicleParams vehicle;
  ActuatorModel actuator;
  CourseSpec course;
  ControllerSpec controller;
  LongitudinalSpec longitudinal;
  InitialSpec initial;

  /// Semantic checks beyond the schema. Throws ConfigError.
  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;
};

struct GridAxis {
  std::string key;  // dotted config path, e.g. "controller.stanley.k"
  std::vector<double> values;

  bool operator==(const GridAxis&) const = default;
};

struct SweepSpec {
  ScenarioConfig base;
  std::vector<ControllerType> controllers;
  std::vector<CourseType> courses;
  std::vector<double> speeds;  // [m/s]
  std::vector<GridAxis> grid;

  bool operator==(const SweepSpec&) const = default;
};

/// Parses "10 kmph", "2.5 m/s" or a bare number of m/s.
double parse_speed(const std::string& text);

ScenarioConfig parse_scenario(const std::string& toml_text);
ScenarioConfig load_scenario(const std::string& path);
std::string to_toml(const ScenarioConfig& cfg);

SweepSpec parse_sweep(const std::string& toml_text);
SweepSpec load_sweep(const std::string& path);
std::string to_toml(const SweepSpec& spec);

/// Copy of `cfg` with one numeric value replaced, addressed by dotted path.
ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& key, double value);

std::string to_string(PlantModel v);
std::string to_string(CourseType v);
std::string to_string(ControllerType v);
std::string to_string(LongitudinalType v);
CourseType parse_course_type(const std::string& s);
ControllerType parse_controller_type(const std::string& s);

Course build_course(const CourseSpec& spec);

}  // namespace pathtrack
