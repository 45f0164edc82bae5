#include "dcm/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dcm {

namespace {

using nlohmann::json;

/// Line of the first occurrence of a quoted key, for "near line N" hints.
std::optional<int> line_of_key(const std::string& text, const std::string& key)
{
  const auto pos = text.find('"' + key + '"');
  if (pos == std::string::npos)
    return std::nullopt;
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader
{
public:
  Reader(const json& obj, std::string path, const std::string& text, const std::string& source)
    : obj_(obj), path_(std::move(path)), text_(text), source_(source)
  {
    if (!obj_.is_object())
      fail(path_, "expected an object");
  }

  [[noreturn]] void fail(const std::string& field, const std::string& what) const
  {
    std::ostringstream msg;
    msg << source_;
    const auto leaf = field.substr(field.find_last_of('.') + 1);
    if (auto line = line_of_key(text_, leaf.substr(0, leaf.find('['))))
      msg << ":" << *line;
    msg << ": field '" << (field.empty() ? "<root>" : field) << "': " << what;
    throw ConfigError(msg.str());
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  bool has(const std::string& key)
  {
    seen_.insert(key);
    return obj_.contains(key);
  }

  const json& at(const std::string& key)
  {
    if (!has(key))
      fail(field(key), "required field is missing");
    return obj_.at(key);
  }

  double number(const std::string& key, double fallback)
  {
    return has(key) ? as_number(obj_.at(key), field(key)) : fallback;
  }

  double required_number(const std::string& key) { return as_number(at(key), field(key)); }

  bool boolean(const std::string& key, bool fallback)
  {
    if (!has(key))
      return fallback;
    if (!obj_.at(key).is_boolean())
      fail(field(key), "expected true or false");
    return obj_.at(key).get<bool>();
  }

  std::string string(const std::string& key, const std::string& fallback)
  {
    if (!has(key))
      return fallback;
    if (!obj_.at(key).is_string())
      fail(field(key), "expected a string");
    return obj_.at(key).get<std::string>();
  }

  PlanarVec vec2(const json& v, const std::string& where) const
  {
    if (!v.is_array() || v.size() != 2)
      fail(where, "expected an array of two numbers");
    return {as_number(v[0], where + "[0]"), as_number(v[1], where + "[1]")};
  }

  Reader child(const std::string& key) { return Reader(at(key), field(key), text_, source_); }

  /// Reject keys that were never asked for.
  void finish() const
  {
    for (const auto& [key, value] : obj_.items())
      if (!seen_.count(key))
        fail(field(key), "unknown key");
  }

  double as_number(const json& v, const std::string& where) const
  {
    if (!v.is_number())
      fail(where, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x))
      fail(where, "must be finite");
    return x;
  }

  const std::string& text() const { return text_; }
  const std::string& source() const { return source_; }

private:
  const json& obj_;
  std::string path_;
  const std::string& text_;
  const std::string& source_;
  std::set<std::string> seen_;
};

PathSpec read_path(Reader r)
{
  const std::string type = r.string("type", "");
  PathSpec path;
  if (type == "straight") {
    path = StraightLine{r.required_number("length"), r.number("speed", 0.28)};
  } else if (type == "arc") {
    path = CircularArc{r.required_number("radius"), r.required_number("arc_angle"), r.number("speed", 0.28)};
  } else {
    r.fail(r.field("type"), "expected \"straight\" or \"arc\"");
  }
  r.finish();
  return path;
}

void read_unicycle(Reader r, UnicycleParams& u)
{
  u.foot_lateral_offset = r.number("foot_lateral_offset", u.foot_lateral_offset);
  u.nominal_step_duration = r.number("nominal_step_duration", u.nominal_step_duration);
  u.T_min = r.number("T_min", u.T_min);
  u.T_max = r.number("T_max", u.T_max);
  u.L_min = r.number("L_min", u.L_min);
  u.L_max = r.number("L_max", u.L_max);
  u.max_yaw_rate = r.number("max_yaw_rate", u.max_yaw_rate);
  r.finish();
}

void read_adapter(Reader r, SimSettings& sim)
{
  AdapterConfig& a = sim.adapter;
  sim.adapter_enabled = r.boolean("enabled", sim.adapter_enabled);
  a.weights.alpha1 = r.number("alpha1", a.weights.alpha1);
  a.weights.alpha2 = r.number("alpha2", a.weights.alpha2);
  a.weights.alpha3 = r.number("alpha3", a.weights.alpha3);
  a.region.sagittal_max = r.number("sagittal_max", a.region.sagittal_max);
  a.region.lateral_min = r.number("lateral_min", a.region.lateral_min);
  a.region.lateral_max = r.number("lateral_max", a.region.lateral_max);
  a.min_remaining_time = r.number("min_remaining_time", a.min_remaining_time);
  a.refresh_gamma = r.boolean("refresh_gamma", a.refresh_gamma);
  r.finish();
}

void read_sim(Reader r, SimSettings& sim)
{
  sim.settle_time = r.number("settle_time", sim.settle_time);
  sim.initial_transfer = r.number("initial_transfer", sim.initial_transfer);
  sim.apex_height = r.number("apex_height", sim.apex_height);
  sim.fall.fall_radius = r.number("fall_radius", sim.fall.fall_radius);
  const double cycles = r.number("kinematic_violation_cycles", sim.fall.kinematic_violation_cycles);
  if (cycles != std::floor(cycles) || cycles < 1)
    r.fail(r.field("kinematic_violation_cycles"), "expected a positive integer");
  sim.fall.kinematic_violation_cycles = static_cast<int>(cycles);
  sim.foot.length = r.number("foot_length", sim.foot.length);
  sim.foot.width = r.number("foot_width", sim.foot.width);
  sim.foot.cop_margin = r.number("cop_margin", sim.foot.cop_margin);
  sim.clamp_vrp = r.boolean("clamp_vrp", sim.clamp_vrp);
  sim.adapted_threshold = r.number("adapted_threshold", sim.adapted_threshold);
  r.finish();
}

std::vector<PushEvent> read_pushes(Reader& parent)
{
  const json& arr = parent.at("pushes");
  if (!arr.is_array())
    parent.fail(parent.field("pushes"), "expected an array");
  std::vector<PushEvent> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = parent.field("pushes") + "[" + std::to_string(i) + "]";
    Reader r(arr[i], where, parent.text(), parent.source());
    PushEvent p;
    p.t_start = r.required_number("t_start");
    p.duration = r.required_number("duration");
    p.force = r.vec2(r.at("force"), r.field("force"));
    if (!(p.duration > 0))
      r.fail(r.field("duration"), "must be positive");
    r.finish();
    out.push_back(p);
  }
  return out;
}

template <typename F>
void checked(const Reader& r, const std::string& field, F&& f)
{
  try {
    f();
  } catch (const std::invalid_argument& e) {
    r.fail(field, e.what());
  } catch (const PlanningError& e) {
    r.fail(field, e.what());
  }
}

std::string fmt(double x)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line)
{
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ','))
    out.push_back(cell);
  return out;
}

double to_double(const std::string& s)
{
  std::size_t used = 0;
  const double x = std::stod(s, &used);
  if (used != s.size())
    throw std::runtime_error("csv: bad number '" + s + "'");
  return x;
}

std::vector<std::vector<std::string>> read_rows(std::istream& is, const char* header, std::size_t columns)
{
  std::string line;
  if (!std::getline(is, line) || line != header)
    throw std::runtime_error("csv: unexpected header");
  std::vector<std::vector<std::string>> rows;
  while (std::getline(is, line)) {
    if (line.empty())
      continue;
    auto cells = split_csv(line);
    if (cells.size() != columns)
      throw std::runtime_error("csv: wrong column count");
    rows.push_back(std::move(cells));
  }
  return rows;
}

} // namespace

ScenarioConfig parse_config(const std::string& text, const std::string& source)
{
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
    throw ConfigError(source + ":" + std::to_string(line) + ": invalid JSON: " + e.what());
  }

  ScenarioConfig cfg;
  Reader r(root, "", text, source);
  cfg.description = r.string("description", "");
  cfg.output_prefix = r.string("output_prefix", "");
  cfg.path = read_path(r.child("path"));

  if (r.has("unicycle"))
    read_unicycle(r.child("unicycle"), cfg.unicycle);
  checked(r, "unicycle", [&] { cfg.unicycle.validate(); });

  if (r.has("lip")) {
    Reader lip = r.child("lip");
    const LipParams d;
    const double mass = lip.number("mass", d.mass());
    const double z0 = lip.number("com_height", d.com_height());
    const double g = lip.number("gravity", d.gravity());
    lip.finish();
    checked(lip, "lip", [&] { cfg.sim.params = LipParams(mass, z0, g); });
  }

  if (r.has("controller")) {
    Reader c = r.child("controller");
    if (c.has("k_xi")) {
      const json& k = c.at("k_xi");
      const PlanarVec gains = k.is_number() ? PlanarVec::Constant(c.as_number(k, c.field("k_xi")))
                                            : c.vec2(k, c.field("k_xi"));
      checked(c, c.field("k_xi"), [&] { cfg.sim.gains = ControllerGains(gains); });
    }
    c.finish();
  }

  if (r.has("adapter"))
    read_adapter(r.child("adapter"), cfg.sim);
  cfg.sim.adapter.T_min = cfg.unicycle.T_min;
  cfg.sim.adapter.T_max = cfg.unicycle.T_max;

  cfg.sim.ds_duration = r.number("ds_duration", 0.2 * cfg.unicycle.nominal_step_duration);
  cfg.sim.dt = r.number("dt", cfg.sim.dt);
  if (r.has("sim"))
    read_sim(r.child("sim"), cfg.sim);
  if (r.has("pushes"))
    cfg.sim.pushes = read_pushes(r);
  r.finish();

  checked(r, "adapter", [&] { cfg.sim.adapter.validate(); });
  checked(r, "sim", [&] { cfg.sim.validate(); });
  if (cfg.sim.ds_duration >= cfg.unicycle.T_min)
    r.fail("ds_duration", "must be shorter than unicycle.T_min");
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& file)
{
  std::ifstream in(file);
  if (!in)
    throw ConfigError(file.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), file.string());
}

std::vector<Footstep> scenario_footsteps(const ScenarioConfig& config)
{
  const auto samples = sample_unicycle(config.path, config.unicycle);
  return plan_footsteps(samples, config.unicycle);
}

std::vector<StepDelta> step_deltas(const std::vector<FootprintRecord>& fp)
{
  std::vector<StepDelta> out;
  for (std::size_t k = 1; k < fp.size(); ++k) {
    if (!fp[k].was_adapted)
      continue;
    const PlanarVec lat = lateral_unit(fp[k - 1].nominal_yaw);
    const double adapted_w = std::abs(lat.x() * (fp[k].adapted.x() - fp[k - 1].adapted.x()) +
                                      lat.y() * (fp[k].adapted.y() - fp[k - 1].adapted.y()));
    const double nominal_w = std::abs(lat.x() * (fp[k].nominal.x() - fp[k - 1].nominal.x()) +
                                      lat.y() * (fp[k].nominal.y() - fp[k - 1].nominal.y()));
    const double nominal_T = fp[k].nominal_impact_t - fp[k - 1].nominal_impact_t;
    const double adapted_T = fp[k].adapted_impact_t - fp[k - 1].adapted_impact_t;
    out.push_back({fp[k].index, adapted_w - nominal_w, nominal_T - adapted_T});
  }
  return out;
}

Summary summarize(const SimLog& log)
{
  Summary s;
  s.adapted_steps = step_deltas(log.footprints);
  if (!s.adapted_steps.empty()) {
    double w = 0.0, t = 0.0;
    for (const auto& d : s.adapted_steps) {
      w += d.width_delta;
      t += d.timing_delta;
    }
    s.mean_width_delta = w / static_cast<double>(s.adapted_steps.size());
    s.mean_timing_delta = t / static_cast<double>(s.adapted_steps.size());
  }
  for (const auto& sample : log.samples)
    s.max_dcm_error = std::max(s.max_dcm_error, (sample.xi - sample.xi_ref).norm());
  s.fell = log.fell;
  s.fall_time = log.fall_time;
  s.fall_reason = log.fall_reason;
  s.mean_cycle_time_ms = log.mean_cycle_ms;
  s.adapter_cycles = log.adapter_cycles;
  s.adapter_failures = log.adapter_failures;
  return s;
}

std::string summary_json(const Summary& s, const ScenarioConfig& config)
{
  json j;
  j["description"] = config.description;
  j["fell"] = s.fell;
  j["fall_time"] = s.fell ? json(s.fall_time) : json(nullptr);
  j["fall_reason"] = s.fall_reason;
  json steps = json::array();
  for (const auto& d : s.adapted_steps)
    steps.push_back({{"index", d.index}, {"width_delta", d.width_delta}, {"timing_delta", d.timing_delta}});
  j["adapted_steps"] = steps;
  j["mean_width_delta"] = s.mean_width_delta;
  j["mean_timing_delta"] = s.mean_timing_delta;
  j["max_dcm_error"] = s.max_dcm_error;
  j["mean_cycle_time_ms"] = s.mean_cycle_time_ms;
  j["adapter_cycles"] = s.adapter_cycles;
  j["adapter_failures"] = s.adapter_failures;
  j["adapter_enabled"] = config.sim.adapter_enabled;
  j["dt"] = config.sim.dt;
  return j.dump(2) + "\n";
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples)
{
  os << kTrajectoryHeader << '\n';
  for (const auto& s : samples) {
    os << fmt(s.t) << ',' << fmt(s.xi.x()) << ',' << fmt(s.xi.y()) << ',' << fmt(s.xi_ref.x()) << ','
       << fmt(s.xi_ref.y()) << ',' << fmt(s.com.x()) << ',' << fmt(s.com.y()) << ',' << fmt(s.zmp_ref.x()) << ','
       << fmt(s.zmp_ref.y()) << ',' << fmt(s.vrp_cmd.x()) << ',' << fmt(s.vrp_cmd.y()) << ',' << fmt(s.swing.x())
       << ',' << fmt(s.swing.y()) << ',' << fmt(s.swing_z) << ',' << s.phase << ',' << s.stance_side << ','
       << fmt(s.push.x()) << ',' << fmt(s.push.y()) << '\n';
  }
}

void write_footprints_csv(std::ostream& os, const std::vector<FootprintRecord>& footprints)
{
  os << kFootprintsHeader << '\n';
  for (const auto& f : footprints) {
    os << f.index << ',' << to_string(f.side) << ',' << fmt(f.nominal.x()) << ',' << fmt(f.nominal.y()) << ','
       << fmt(f.nominal_yaw) << ',' << fmt(f.nominal_impact_t) << ',' << fmt(f.adapted.x()) << ','
       << fmt(f.adapted.y()) << ',' << fmt(f.adapted_impact_t) << ',' << (f.was_adapted ? 1 : 0) << '\n';
  }
}

std::vector<TrajectorySample> read_trajectory_csv(std::istream& is)
{
  std::vector<TrajectorySample> out;
  for (const auto& c : read_rows(is, kTrajectoryHeader, 18)) {
    TrajectorySample s;
    s.t = to_double(c[0]);
    s.xi = {to_double(c[1]), to_double(c[2])};
    s.xi_ref = {to_double(c[3]), to_double(c[4])};
    s.com = {to_double(c[5]), to_double(c[6])};
    s.zmp_ref = {to_double(c[7]), to_double(c[8])};
    s.vrp_cmd = {to_double(c[9]), to_double(c[10])};
    s.swing = {to_double(c[11]), to_double(c[12])};
    s.swing_z = to_double(c[13]);
    s.phase = std::stoi(c[14]);
    s.stance_side = std::stoi(c[15]);
    s.push = {to_double(c[16]), to_double(c[17])};
    out.push_back(s);
  }
  return out;
}

std::vector<FootprintRecord> read_footprints_csv(std::istream& is)
{
  std::vector<FootprintRecord> out;
  for (const auto& c : read_rows(is, kFootprintsHeader, 10)) {
    FootprintRecord f;
    f.index = std::stoi(c[0]);
    if (c[1] != "L" && c[1] != "R")
      throw std::runtime_error("csv: bad side '" + c[1] + "'");
    f.side = c[1] == "L" ? Side::Left : Side::Right;
    f.nominal = {to_double(c[2]), to_double(c[3])};
    f.nominal_yaw = to_double(c[4]);
    f.nominal_impact_t = to_double(c[5]);
    f.adapted = {to_double(c[6]), to_double(c[7])};
    f.adapted_impact_t = to_double(c[8]);
    f.was_adapted = c[9] == "1";
    out.push_back(f);
  }
  return out;
}

RunOutcome run_scenario(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
                        const RunOverrides& overrides)
{
  RunOutcome outcome;
  ScenarioConfig cfg;
  std::vector<Footstep> footsteps;
  try {
    cfg = load_config(config_file);
    if (overrides.dt) {
      if (!(*overrides.dt > 0) || !std::isfinite(*overrides.dt))
        throw ConfigError("--dt: must be a positive number");
      cfg.sim.dt = *overrides.dt;
    }
    if (overrides.no_adapter)
      cfg.sim.adapter_enabled = false;
    footsteps = scenario_footsteps(cfg);
  } catch (const ConfigError& e) {
    return {kExitConfigError, e.what(), std::nullopt};
  } catch (const PlanningError& e) {
    return {kExitConfigError, config_file.string() + ": footstep planning failed: " + e.what(), std::nullopt};
  } catch (const std::invalid_argument& e) {
    return {kExitConfigError, config_file.string() + ": " + e.what(), std::nullopt};
  }

  const SimLog log = run_closed_loop(footsteps, cfg.sim);
  const Summary summary = summarize(log);

  try {
    std::filesystem::create_directories(out_dir);
    auto open = [&](const std::string& name) {
      std::ofstream f(out_dir / (cfg.output_prefix + name));
      if (!f)
        throw std::runtime_error("cannot write " + (out_dir / (cfg.output_prefix + name)).string());
      return f;
    };
    {
      auto f = open("trajectory.csv");
      write_trajectory_csv(f, log.samples);
    }
    {
      auto f = open("footprints.csv");
      write_footprints_csv(f, log.footprints);
    }
    {
      auto f = open("summary.json");
      f << summary_json(summary, cfg);
    }
  } catch (const std::exception& e) {
    return {kExitConfigError, e.what(), summary};
  }

  std::ostringstream msg;
  msg << config_file.string() << ": ";
  if (summary.fell)
    msg << "FALL at t=" << summary.fall_time << " s (" << summary.fall_reason << ")";
  else
    msg << "completed";
  msg << ", adapted steps " << summary.adapted_steps.size() << ", mean width delta " << summary.mean_width_delta
      << " m, mean timing delta " << summary.mean_timing_delta << " s, mean cycle " << summary.mean_cycle_time_ms
      << " ms";
  for (const auto& d : log.diagnostics)
    msg << "\n  " << d;
  outcome.exit_code = summary.fell ? kExitFall : kExitOk;
  outcome.message = msg.str();
  outcome.summary = summary;
  return outcome;
}

} // namespace dcm
