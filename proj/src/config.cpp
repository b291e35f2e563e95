#include "pathtrack/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace pathtrack {

AdaptivePidConfig LongitudinalSpec::adaptive() const {
  AdaptivePidConfig a;
  a.initial = gains;
  a.gamma_p = gamma_p;
  a.gamma_i = gamma_i;
  a.gamma_d = gamma_d;
  a.filter_tc = filter_tc;
  return a;
}

std::string to_string(PlantModel v) { return v == PlantModel::Dynamic ? "dynamic" : "kinematic"; }

std::string to_string(CourseType v) {
  switch (v) {
    case CourseType::Straight: return "straight";
    case CourseType::Circle: return "circle";
    case CourseType::LaneChange: return "lane_change";
    case CourseType::Sine: return "sine";
    case CourseType::File: return "file";
  }
  return "?";
}

std::string to_string(ControllerType v) {
  switch (v) {
    case ControllerType::PurePursuit: return "pure_pursuit";
    case ControllerType::Stanley: return "stanley";
    case ControllerType::Pid: return "pid";
    case ControllerType::Lqr: return "lqr";
    case ControllerType::Mpc: return "mpc";
  }
  return "?";
}

std::string to_string(LongitudinalType v) {
  switch (v) {
    case LongitudinalType::Pid: return "pid";
    case LongitudinalType::AdaptivePid: return "adaptive_pid";
    case LongitudinalType::Ideal: return "ideal";
  }
  return "?";
}

namespace {

std::string to_string(LookaheadLaw v) {
  switch (v) {
    case LookaheadLaw::Fixed: return "fixed";
    case LookaheadLaw::SqrtGain: return "sqrt";
    case LookaheadLaw::Linear: return "linear";
  }
  return "?";
}

template <typename E>
E parse_enum(const std::string& s, std::initializer_list<E> options, const std::string& what) {
  std::string known;
  for (E e : options) {
    if (to_string(e) == s) return e;
    known += (known.empty() ? "" : ", ") + to_string(e);
  }
  throw ConfigError("unknown " + what + " '" + s + "' (expected one of: " + known + ")");
}

}  // namespace

CourseType parse_course_type(const std::string& s) {
  return parse_enum(s, {CourseType::Straight, CourseType::Circle, CourseType::LaneChange,
                        CourseType::Sine, CourseType::File},
                    "course type");
}

ControllerType parse_controller_type(const std::string& s) {
  return parse_enum(s, {ControllerType::PurePursuit, ControllerType::Stanley, ControllerType::Pid,
                        ControllerType::Lqr, ControllerType::Mpc},
                    "controller");
}

double parse_speed(const std::string& text) {
  std::string s = text;
  auto strip = [](std::string v) {
    const auto b = v.find_first_not_of(" \t");
    const auto e = v.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : v.substr(b, e - b + 1);
  };
  s = strip(s);
  double scale = 1.0;
  for (const auto& [suffix, factor] : {std::pair<std::string, double>{"kmph", 1.0 / 3.6},
                                       {"km/h", 1.0 / 3.6},
                                       {"m/s", 1.0},
                                       {"mps", 1.0}}) {
    if (s.size() > suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0) {
      s = strip(s.substr(0, s.size() - suffix.size()));
      scale = factor;
      break;
    }
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError("cannot parse speed '" + text + "'");
  }
  return v * scale;
}

namespace {

/// Strict view of one TOML table: every key must be consumed.
class Section {
 public:
  Section(const toml::table* table, std::string path) : table_(table), path_(std::move(path)) {}

  bool present() const { return table_ != nullptr; }

  void number(const char* key, double& out) {
    const toml::node* n = take(key);
    if (!n) return;
    if (auto f = n->as_floating_point()) out = f->get();
    else if (auto i = n->as_integer()) out = static_cast<double>(i->get());
    else fail(key, "a number");
  }

  template <typename Int>
  void integer(const char* key, Int& out) {
    const toml::node* n = take(key);
    if (!n) return;
    auto i = n->as_integer();
    if (!i) fail(key, "an integer");
    if (i->get() < 0) throw ConfigError(where(key) + " must be non-negative");
    out = static_cast<Int>(i->get());
  }

  void boolean(const char* key, bool& out) {
    const toml::node* n = take(key);
    if (!n) return;
    auto b = n->as_boolean();
    if (!b) fail(key, "a boolean");
    out = b->get();
  }

  void string(const char* key, std::string& out) {
    const toml::node* n = take(key);
    if (!n) return;
    auto s = n->as_string();
    if (!s) fail(key, "a string");
    out = s->get();
  }

  void speed(const char* key, double& out) {
    const toml::node* n = take(key);
    if (!n) return;
    if (auto s = n->as_string()) out = parse_speed(s->get());
    else if (auto f = n->as_floating_point()) out = f->get();
    else if (auto i = n->as_integer()) out = static_cast<double>(i->get());
    else fail(key, "a speed");
  }

  const toml::array* array(const char* key) {
    const toml::node* n = take(key);
    if (!n) return nullptr;
    auto a = n->as_array();
    if (!a) fail(key, "an array");
    return a;
  }

  Section sub(const char* key) {
    const toml::node* n = take(key);
    if (!n) return {nullptr, path_ + key};
    auto t = n->as_table();
    if (!t) fail(key, "a table");
    return {t, where(key)};
  }

  const toml::table* raw() const { return table_; }

  /// Rejects keys that were never read.
  void finish() const {
    if (!table_) return;
    for (auto&& [k, v] : *table_) {
      if (!seen_.count(std::string(k.str()))) throw ConfigError("unknown key '" + where(std::string(k.str())) + "'");
    }
  }

 private:
  const toml::node* take(const std::string& key) {
    if (!table_) return nullptr;
    seen_.insert(key);
    return table_->get(key);
  }
  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  [[noreturn]] void fail(const std::string& key, const char* what) const {
    throw ConfigError("'" + where(key) + "' must be " + what);
  }

  const toml::table* table_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_vehicle(Section s, VehicleParams& v) {
  s.number("wheelbase", v.wheelbase);
  s.number("lf", v.lf);
  s.number("lr", v.lr);
  s.number("mass", v.mass);
  s.number("iz", v.iz);
  s.number("cf", v.cf);
  s.number("cr", v.cr);
  s.number("max_steer", v.max_steer);
  s.number("max_steer_rate", v.max_steer_rate);
  s.number("throttle_min", v.throttle_min);
  s.number("throttle_max", v.throttle_max);
  Section d = s.sub("drivetrain");
  d.number("max_drive_force", v.drivetrain.max_drive_force);
  d.number("drag", v.drivetrain.drag);
  d.number("throttle_lag", v.drivetrain.throttle_lag);
  d.finish();
  s.finish();
}

void read_course(Section s, CourseSpec& c) {
  std::string type = to_string(c.type);
  s.string("type", type);
  c.type = parse_course_type(type);
  s.number("spacing", c.spacing);
  s.number("laps", c.laps);
  Section st = s.sub("straight");
  st.number("length", c.straight_length);
  st.finish();
  Section ci = s.sub("circle");
  ci.number("radius", c.radius);
  ci.finish();
  Section lc = s.sub("lane_change");
  lc.number("approach", c.approach);
  lc.number("transition", c.transition);
  lc.number("offset", c.offset);
  lc.number("exit", c.exit);
  lc.finish();
  Section sn = s.sub("sine");
  sn.number("amplitude", c.amplitude);
  sn.number("wavelength", c.wavelength);
  sn.number("length", c.sine_length);
  sn.finish();
  Section f = s.sub("file");
  f.string("path", c.file);
  f.boolean("closed", c.file_closed);
  f.finish();
  s.finish();
}

void read_controller(Section s, ControllerSpec& c) {
  std::string type = to_string(c.type);
  s.string("type", type);
  c.type = parse_controller_type(type);
  s.number("rate", c.rate);

  Section pp = s.sub("pure_pursuit");
  pp.number("k", c.pure_pursuit.k);
  pp.number("d", c.pure_pursuit.d);
  std::string law = to_string(c.pure_pursuit.law);
  pp.string("law", law);
  c.pure_pursuit.law =
      parse_enum(law, {LookaheadLaw::Fixed, LookaheadLaw::SqrtGain, LookaheadLaw::Linear}, "lookahead law");
  pp.number("min_lookahead", c.pure_pursuit.min_lookahead);
  pp.finish();

  Section st = s.sub("stanley");
  st.number("k", c.stanley.k);
  st.number("v_eps", c.stanley.v_eps);
  st.finish();

  Section pid = s.sub("pid");
  pid.number("kp", c.pid.gains.kp);
  pid.number("ki", c.pid.gains.ki);
  pid.number("kd", c.pid.gains.kd);
  pid.finish();

  Section lqr = s.sub("lqr");
  lqr.number("q1", c.lqr.q1);
  lqr.number("q2", c.lqr.q2);
  lqr.number("q3", c.lqr.q3);
  lqr.number("q4", c.lqr.q4);
  lqr.number("qu", c.lqr.qu);
  lqr.number("dt", c.lqr.dt);
  lqr.integer("max_iter", c.lqr.max_iter);
  lqr.number("tol", c.lqr.tol);
  lqr.boolean("feedforward", c.lqr.feedforward);
  lqr.finish();

  Section mpc = s.sub("mpc");
  mpc.integer("horizon", c.mpc.horizon);
  mpc.number("dt", c.mpc.dt);
  mpc.number("w_cte", c.mpc.w_cte);
  mpc.number("w_psi", c.mpc.w_psi);
  mpc.number("w_delta", c.mpc.w_delta);
  mpc.number("w_ddelta", c.mpc.w_ddelta);
  mpc.number("bound", c.mpc.bound);
  mpc.integer("max_iter", c.mpc.max_iter);
  mpc.number("tol", c.mpc.tol);
  mpc.number("replan_period", c.mpc.replan_period);
  mpc.number("fit_window", c.mpc.fit_window);
  mpc.finish();
  s.finish();
}

void read_longitudinal(Section s, LongitudinalSpec& l) {
  std::string type = to_string(l.type);
  s.string("type", type);
  l.type = parse_enum(type, {LongitudinalType::Pid, LongitudinalType::AdaptivePid, LongitudinalType::Ideal},
                      "longitudinal controller");
  s.number("rate", l.rate);
  s.number("kp", l.gains.kp);
  s.number("ki", l.gains.ki);
  s.number("kd", l.gains.kd);
  s.number("gamma_p", l.gamma_p);
  s.number("gamma_i", l.gamma_i);
  s.number("gamma_d", l.gamma_d);
  s.number("filter_tc", l.filter_tc);
  s.finish();
}

ScenarioConfig read_scenario(const toml::table& root) {
  ScenarioConfig cfg;
  Section top(&root, "");
  Section sc = top.sub("scenario");
  sc.string("name", cfg.name);
  sc.integer("seed", cfg.seed);
  std::string plant = to_string(cfg.plant);
  sc.string("plant", plant);
  cfg.plant = parse_enum(plant, {PlantModel::Kinematic, PlantModel::Dynamic}, "plant model");
  sc.speed("target_speed", cfg.target_speed);
  sc.number("dt", cfg.dt);
  sc.number("duration", cfg.duration);
  sc.number("divergence_limit", cfg.divergence_limit);
  sc.number("payload", cfg.payload);
  sc.finish();

  read_vehicle(top.sub("vehicle"), cfg.vehicle);

  Section act = top.sub("actuator");
  act.boolean("enabled", cfg.actuator.enabled);
  act.number("deadband", cfg.actuator.deadband);
  act.number("rate_limit", cfg.actuator.rate_limit);
  act.number("lag", cfg.actuator.lag);
  act.finish();

  read_course(top.sub("course"), cfg.course);
  read_controller(top.sub("controller"), cfg.controller);
  read_longitudinal(top.sub("longitudinal"), cfg.longitudinal);

  Section init = top.sub("initial");
  init.number("lateral_offset", cfg.initial.lateral_offset);
  init.number("heading_offset", cfg.initial.heading_offset);
  init.boolean("match_curvature", cfg.initial.match_curvature);
  if (init.present() && init.raw()->contains("speed")) {
    double v = 0.0;
    init.speed("speed", v);
    cfg.initial.speed = v;
  }
  init.finish();

  Section noise = top.sub("noise");
  noise.number("speed_std", cfg.speed_noise);
  noise.finish();

  top.finish();
  cfg.validate();
  return cfg;
}

toml::table parse_table(const std::string& text) {
  try {
    return toml::parse(text);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << "TOML syntax error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(os.str());
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, res.ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

const char* boolean(bool b) { return b ? "true" : "false"; }

}  // namespace

void ScenarioConfig::validate() const {
  try {
    vehicle.validate();
    controller.pure_pursuit.validate();
    controller.stanley.validate();
    controller.lqr.validate();
    controller.mpc.validate(vehicle);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(target_speed > 0.0)) throw ConfigError("target_speed must be positive");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (duration < 0.0) throw ConfigError("duration must be non-negative");
  if (!(divergence_limit > 0.0)) throw ConfigError("divergence_limit must be positive");
  if (payload < 0.0 || speed_noise < 0.0) throw ConfigError("payload and speed noise must be non-negative");
  for (double rate : {controller.rate, longitudinal.rate}) {
    if (!(rate > 0.0)) throw ConfigError("controller rates must be positive");
    const double ratio = 1.0 / (rate * dt);
    if (std::abs(ratio - std::round(ratio)) > 1e-6 || std::round(ratio) < 1.0) {
      throw ConfigError("controller periods must be whole multiples of dt");
    }
  }
  if (!(longitudinal.filter_tc > 0.0)) throw ConfigError("filter_tc must be positive");
  if (actuator.deadband < 0.0 || actuator.rate_limit < 0.0 || actuator.lag < 0.0) {
    throw ConfigError("actuator parameters must be non-negative");
  }
  if (initial.speed && *initial.speed < 0.0) throw ConfigError("initial speed must be non-negative");
  if (!(course.spacing > 0.0) || !(course.laps > 0.0)) throw ConfigError("course spacing and laps must be positive");
  if (course.type == CourseType::File && course.file.empty()) throw ConfigError("course.file.path is required");
  if (controller.type == ControllerType::Lqr && !(target_speed > kMinDynamicSpeed)) {
    throw ConfigError("LQR needs a target speed above the dynamic-model minimum");
  }
}

ScenarioConfig parse_scenario(const std::string& toml_text) { return read_scenario(parse_table(toml_text)); }

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_file(path)); }

std::string to_toml(const ScenarioConfig& c) {
  std::ostringstream o;
  o << "[scenario]\n"
    << "name = " << quoted(c.name) << "\n"
    << "seed = " << c.seed << "\n"
    << "plant = " << quoted(to_string(c.plant)) << "\n"
    << "target_speed = " << num(c.target_speed) << "\n"
    << "dt = " << num(c.dt) << "\n"
    << "duration = " << num(c.duration) << "\n"
    << "divergence_limit = " << num(c.divergence_limit) << "\n"
    << "payload = " << num(c.payload) << "\n";

  const VehicleParams& v = c.vehicle;
  o << "\n[vehicle]\n"
    << "wheelbase = " << num(v.wheelbase) << "\nlf = " << num(v.lf) << "\nlr = " << num(v.lr)
    << "\nmass = " << num(v.mass) << "\niz = " << num(v.iz) << "\ncf = " << num(v.cf)
    << "\ncr = " << num(v.cr) << "\nmax_steer = " << num(v.max_steer)
    << "\nmax_steer_rate = " << num(v.max_steer_rate) << "\nthrottle_min = " << num(v.throttle_min)
    << "\nthrottle_max = " << num(v.throttle_max) << "\n"
    << "\n[vehicle.drivetrain]\n"
    << "max_drive_force = " << num(v.drivetrain.max_drive_force)
    << "\ndrag = " << num(v.drivetrain.drag) << "\nthrottle_lag = " << num(v.drivetrain.throttle_lag)
    << "\n";

  o << "\n[actuator]\n"
    << "enabled = " << boolean(c.actuator.enabled) << "\ndeadband = " << num(c.actuator.deadband)
    << "\nrate_limit = " << num(c.actuator.rate_limit) << "\nlag = " << num(c.actuator.lag) << "\n";

  const CourseSpec& k = c.course;
  o << "\n[course]\n"
    << "type = " << quoted(to_string(k.type)) << "\nspacing = " << num(k.spacing)
    << "\nlaps = " << num(k.laps) << "\n"
    << "\n[course.straight]\nlength = " << num(k.straight_length) << "\n"
    << "\n[course.circle]\nradius = " << num(k.radius) << "\n"
    << "\n[course.lane_change]\napproach = " << num(k.approach) << "\ntransition = " << num(k.transition)
    << "\noffset = " << num(k.offset) << "\nexit = " << num(k.exit) << "\n"
    << "\n[course.sine]\namplitude = " << num(k.amplitude) << "\nwavelength = " << num(k.wavelength)
    << "\nlength = " << num(k.sine_length) << "\n"
    << "\n[course.file]\npath = " << quoted(k.file) << "\nclosed = " << boolean(k.file_closed) << "\n";

  const ControllerSpec& ct = c.controller;
  o << "\n[controller]\n"
    << "type = " << quoted(to_string(ct.type)) << "\nrate = " << num(ct.rate) << "\n"
    << "\n[controller.pure_pursuit]\nk = " << num(ct.pure_pursuit.k) << "\nd = " << num(ct.pure_pursuit.d)
    << "\nlaw = " << quoted(to_string(ct.pure_pursuit.law))
    << "\nmin_lookahead = " << num(ct.pure_pursuit.min_lookahead) << "\n"
    << "\n[controller.stanley]\nk = " << num(ct.stanley.k) << "\nv_eps = " << num(ct.stanley.v_eps) << "\n"
    << "\n[controller.pid]\nkp = " << num(ct.pid.gains.kp) << "\nki = " << num(ct.pid.gains.ki)
    << "\nkd = " << num(ct.pid.gains.kd) << "\n"
    << "\n[controller.lqr]\nq1 = " << num(ct.lqr.q1) << "\nq2 = " << num(ct.lqr.q2)
    << "\nq3 = " << num(ct.lqr.q3) << "\nq4 = " << num(ct.lqr.q4) << "\nqu = " << num(ct.lqr.qu)
    << "\ndt = " << num(ct.lqr.dt) << "\nmax_iter = " << ct.lqr.max_iter << "\ntol = " << num(ct.lqr.tol)
    << "\nfeedforward = " << boolean(ct.lqr.feedforward) << "\n"
    << "\n[controller.mpc]\nhorizon = " << ct.mpc.horizon << "\ndt = " << num(ct.mpc.dt)
    << "\nw_cte = " << num(ct.mpc.w_cte) << "\nw_psi = " << num(ct.mpc.w_psi)
    << "\nw_delta = " << num(ct.mpc.w_delta) << "\nw_ddelta = " << num(ct.mpc.w_ddelta)
    << "\nbound = " << num(ct.mpc.bound) << "\nmax_iter = " << ct.mpc.max_iter
    << "\ntol = " << num(ct.mpc.tol) << "\nreplan_period = " << num(ct.mpc.replan_period)
    << "\nfit_window = " << num(ct.mpc.fit_window) << "\n";

  const LongitudinalSpec& l = c.longitudinal;
  o << "\n[longitudinal]\n"
    << "type = " << quoted(to_string(l.type)) << "\nrate = " << num(l.rate) << "\nkp = " << num(l.gains.kp)
    << "\nki = " << num(l.gains.ki) << "\nkd = " << num(l.gains.kd) << "\ngamma_p = " << num(l.gamma_p)
    << "\ngamma_i = " << num(l.gamma_i) << "\ngamma_d = " << num(l.gamma_d)
    << "\nfilter_tc = " << num(l.filter_tc) << "\n";

  o << "\n[initial]\n"
    << "lateral_offset = " << num(c.initial.lateral_offset)
    << "\nheading_offset = " << num(c.initial.heading_offset)
    << "\nmatch_curvature = " << boolean(c.initial.match_curvature) << "\n";
  if (c.initial.speed) o << "speed = " << num(*c.initial.speed) << "\n";

  o << "\n[noise]\nspeed_std = " << num(c.speed_noise) << "\n";
  return o.str();
}

namespace {

std::vector<std::string> string_list(const toml::array* a, const char* what) {
  std::vector<std::string> out;
  if (!a) return out;
  for (const auto& n : *a) {
    auto s = n.as_string();
    if (!s) throw ConfigError(std::string("sweep.") + what + " must contain strings");
    out.push_back(s->get());
  }
  return out;
}

}  // namespace

SweepSpec parse_sweep(const std::string& toml_text) {
  toml::table root = parse_table(toml_text);
  SweepSpec spec;
  toml::table sweep_table;
  if (auto t = root.get_as<toml::table>("sweep")) sweep_table = *t;
  else if (root.contains("sweep")) throw ConfigError("'sweep' must be a table");
  root.erase("sweep");
  spec.base = read_scenario(root);

  Section s(&sweep_table, "sweep");
  for (const auto& name : string_list(s.array("controllers"), "controllers")) {
    spec.controllers.push_back(parse_controller_type(name));
  }
  for (const auto& name : string_list(s.array("courses"), "courses")) {
    spec.courses.push_back(parse_course_type(name));
  }
  if (const toml::array* a = s.array("speeds")) {
    for (const auto& n : *a) {
      if (auto str = n.as_string()) spec.speeds.push_back(parse_speed(str->get()));
      else if (auto f = n.as_floating_point()) spec.speeds.push_back(f->get());
      else if (auto i = n.as_integer()) spec.speeds.push_back(static_cast<double>(i->get()));
      else throw ConfigError("sweep.speeds must contain speeds");
    }
  }
  Section grid = s.sub("grid");
  if (grid.present()) {
    std::vector<std::string> keys;
    for (auto&& [k, v] : *grid.raw()) keys.emplace_back(k.str());
    for (const auto& key : keys) {
      GridAxis axis;
      axis.key = key;
      const toml::array* a = grid.array(key.c_str());
      for (const auto& n : *a) {
        if (auto f = n.as_floating_point()) axis.values.push_back(f->get());
        else if (auto i = n.as_integer()) axis.values.push_back(static_cast<double>(i->get()));
        else throw ConfigError("sweep.grid." + key + " must contain numbers");
      }
      if (axis.values.empty()) throw ConfigError("sweep.grid." + key + " is empty");
      // Validates the key against the schema.
      (void)with_override(spec.base, key, axis.values.front());
      spec.grid.push_back(std::move(axis));
    }
  }
  grid.finish();
  s.finish();
  if (spec.controllers.empty()) spec.controllers.push_back(spec.base.controller.type);
  if (spec.courses.empty()) spec.courses.push_back(spec.base.course.type);
  if (spec.speeds.empty()) spec.speeds.push_back(spec.base.target_speed);
  for (double v : spec.speeds) {
    if (!(v > 0.0)) throw ConfigError("sweep speeds must be positive");
  }
  return spec;
}

SweepSpec load_sweep(const std::string& path) { return parse_sweep(read_file(path)); }

std::string to_toml(const SweepSpec& spec) {
  std::ostringstream o;
  o << to_toml(spec.base) << "\n[sweep]\ncontrollers = [";
  for (std::size_t i = 0; i < spec.controllers.size(); ++i) {
    o << (i ? ", " : "") << quoted(to_string(spec.controllers[i]));
  }
  o << "]\ncourses = [";
  for (std::size_t i = 0; i < spec.courses.size(); ++i) o << (i ? ", " : "") << quoted(to_string(spec.courses[i]));
  o << "]\nspeeds = [";
  for (std::size_t i = 0; i < spec.speeds.size(); ++i) o << (i ? ", " : "") << num(spec.speeds[i]);
  o << "]\n";
  if (!spec.grid.empty()) {
    o << "\n[sweep.grid]\n";
    for (const auto& axis : spec.grid) {
      o << quoted(axis.key) << " = [";
      for (std::size_t i = 0; i < axis.values.size(); ++i) o << (i ? ", " : "") << num(axis.values[i]);
      o << "]\n";
    }
  }
  return o.str();
}

ScenarioConfig with_override(const ScenarioConfig& cfg, const std::string& key, double value) {
  toml::table root = parse_table(to_toml(cfg));
  toml::table* table = &root;
  std::string rest = key;
  for (std::size_t dot = rest.find('.'); dot != std::string::npos; dot = rest.find('.')) {
    const std::string part = rest.substr(0, dot);
    table = table->get_as<toml::table>(part);
    if (!table) throw ConfigError("unknown key '" + key + "'");
    rest = rest.substr(dot + 1);
  }
  toml::node* node = table->get(rest);
  if (!node) throw ConfigError("unknown key '" + key + "'");
  if (node->is_integer()) {
    if (value != std::floor(value)) throw ConfigError("'" + key + "' must be an integer");
    table->insert_or_assign(rest, static_cast<std::int64_t>(value));
  } else if (node->is_floating_point()) {
    table->insert_or_assign(rest, value);
  } else if (node->is_boolean()) {
    if (value != 0.0 && value != 1.0) throw ConfigError("'" + key + "' is boolean, use 0 or 1");
    table->insert_or_assign(rest, value != 0.0);
  } else {
    throw ConfigError("'" + key + "' is not numeric or boolean");
  }
  return read_scenario(root);
}

Course build_course(const CourseSpec& spec) {
  try {
    switch (spec.type) {
      case CourseType::Straight: return gen_straight(spec.straight_length, spec.spacing);
      case CourseType::Circle: return gen_circle(spec.radius, spec.spacing);
      case CourseType::LaneChange:
        return gen_lane_change(spec.approach, spec.transition, spec.offset, spec.exit, spec.spacing);
      case CourseType::Sine: return gen_sine(spec.amplitude, spec.wavelength, spec.sine_length, spec.spacing);
      case CourseType::File: {
        std::ifstream in(spec.file);
        if (!in) throw ConfigError("cannot open course file '" + spec.file + "'");
        return read_course_csv(in, spec.file_closed);
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError(std::string("invalid course: ") + e.what());
  }
  throw ConfigError("unknown course type");
}

}  // namespace pathtrack
