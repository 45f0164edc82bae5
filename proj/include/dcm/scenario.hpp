#ifndef DCM_SCENARIO_HPP
#define DCM_SCENARIO_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dcm/footstep_planner.hpp"
#include "dcm/lip_sim.hpp"

namespace dcm {

/// Invalid scenario file; the message names the field and, when known, the line.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct ScenarioConfig
{
  std::string description;
  PathSpec path = StraightLine{};
  UnicycleParams unicycle;
  SimSettings sim;
  std::string output_prefix;
};

/// Parse and validate a JSON scenario. `source` only labels diagnostics.
ScenarioConfig parse_config(const std::string& text, const std::string& source = "<config>");
ScenarioConfig load_config(const std::filesystem::path& file);

/// Nominal footsteps of the scenario path (initial pair at time 0).
std::vector<Footstep> scenario_footsteps(const ScenarioConfig& config);

struct StepDelta
{
  int index = 0;
  double width_delta = 0.0;   // adapted minus nominal lateral distance to the previous footstep
  double timing_delta = 0.0;  // nominal minus adapted step duration
};

struct Summary
{
  std::vector<StepDelta> adapted_steps;
  double mean_width_delta = 0.0;
  double mean_timing_delta = 0.0;
  double max_dcm_error = 0.0;
  bool fell = false;
  double fall_time = 0.0;
  std::string fall_reason;
  double mean_cycle_time_ms = 0.0;
  std::size_t adapter_cycles = 0;
  std::size_t adapter_failures = 0;
};

/**
 * Step deltas for every footprint flagged as adapted. The width is measured
 * across the heading of the previous footstep:
 *   |lateral(yaw_{k-1}) . (p_k - p_{k-1})|.
 */
std::vector<StepDelta> step_deltas(const std::vector<FootprintRecord>& footprints);

Summary summarize(const SimLog& log);

std::string summary_json(const Summary& summary, const ScenarioConfig& config);

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectorySample>& samples);
void write_footprints_csv(std::ostream& os, const std::vector<FootprintRecord>& footprints);
std::vector<TrajectorySample> read_trajectory_csv(std::istream& is);
std::vector<FootprintRecord> read_footprints_csv(std::istream& is);

inline constexpr const char* kTrajectoryHeader =
    "t,xi_x,xi_y,xi_ref_x,xi_ref_y,com_x,com_y,zmp_ref_x,zmp_ref_y,vrp_cmd_x,vrp_cmd_y,"
    "swing_x,swing_y,swing_z,phase,stance_side,push_x,push_y";
inline constexpr const char* kFootprintsHeader =
    "index,side,nominal_x,nominal_y,nominal_yaw,nominal_impact_t,adapted_x,adapted_y,adapted_impact_t,was_adapted";

struct RunOverrides
{
  std::optional<double> dt;
  bool no_adapter = false;
  bool quiet = false;
};

enum ExitCode : int { kExitOk = 0, kExitConfigError = 1, kExitFall = 2 };

struct RunOutcome
{
  int exit_code = kExitOk;
  std::string message;
  std::optional<Summary> summary;
};

/**
 * Load, simulate and write trajectory.csv, footprints.csv and summary.json
 * (each prefixed by the config's output_prefix) into out_dir. Nothing is
 * written when the configuration is invalid.
 */
RunOutcome run_scenario(const std::filesystem::path& config_file, const std::filesystem::path& out_dir,
                        const RunOverrides& overrides = {});

} // namespace dcm

#endif // DCM_SCENARIO_HPP
