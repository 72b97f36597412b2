#pragma once

#include <cstdint>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "odt/mechanism.hpp"

namespace odt {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class RunMode { Exact, LargeScale };

// Scenario generator settings; loadable from a flat key = value file.
struct ScenarioConfig {
  int n_passengers = 10;
  int n_vehicles = 5;
  double region_km = 10.0;           // side of the square service region
  double velocity_kmh = 30.0;
  double cost_per_km = 0.4;          // euros
  double r_u = 3.0;                  // euros/km
  double delta_u = 30.0;             // minutes
  double alpha_r = 1.0;
  double beta_r = 1.0;
  double alpha_delta = 3.0;
  double beta_delta = 1.0;
  double interval_minutes = 60.0;    // pickup-window starts fall in [0, this)
  double max_pickup_window = 10.0;   // minutes
  double dropoff_slack_minutes = 15.0;  // latest dropoff slack past the ride
  std::uint64_t seed = 0;
  RunMode mode = RunMode::Exact;
  int top_m = 12;                    // truncated-objective width, large scale
  bool first_feasible = false;       // insertion shortcut, large scale
  double eps_step = 0.2;             // sweep step of the optimized policy

  void validate() const;  // throws ConfigError
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::string& path);

// Random market instance: locations uniform in the region square with the
// depot at its centre, pickup-window starts uniform over the interval,
// window lengths uniform up to the maximum, latest drop-off the window end
// plus ride time plus slack.
Scenario generate_scenario(const ScenarioConfig& cfg, Rng& rng);

// Per-replication observables of one policy.
struct RepMetrics {
  double expected_profit = 0.0;      // stage-1 objective
  double realized_profit = 0.0;      // settled profit after stage 4
  double efficiency_eur = 0.0;
  double efficiency_eur_per_m = 0.0;
  double serviced_count = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double ci_half = 0.0;  // 95% interval from the replication variance
};

struct PolicyRun {
  std::string policy;
  std::vector<RepMetrics> reps;
};

struct ExperimentReport {
  ScenarioConfig config;
  int n_reps = 0;
  std::vector<PolicyRun> policies;  // optimized_sweep, hard_constraint, fixed_rate
};

inline constexpr const char* kPolicyNames[] = {"optimized_sweep",
                                               "hard_constraint", "fixed_rate"};

// Runs n_reps replications of all three policies with common random numbers:
// within a replication every policy sees the same requests and the same
// sampled thresholds. Replications run in parallel; ODT_THREADS caps the
// worker count. Results are deterministic in (config, seed).
ExperimentReport run_campaign(const ScenarioConfig& cfg, int n_reps);

// Campaign entry point for the truncated-objective, first-feasible mode;
// requires cfg.mode == RunMode::LargeScale.
ExperimentReport run_large_scale(const ScenarioConfig& cfg, int n_reps);

MetricSummary summarize(const std::vector<double>& samples);

// One row per (policy, n_passengers, metric) plus paired-difference rows;
// byte-stable for a fixed (config, seed).
std::string report_csv(const ExperimentReport& report);

nlohmann::json report_json(const ExperimentReport& report);

// Writes report.csv and report.json into the directory.
void write_report(const ExperimentReport& report, const std::string& out_dir);

// Single mechanism run for the CLI; policy is one of the kPolicyNames.
MechanismOutcome simulate_once(const ScenarioConfig& cfg, std::uint64_t seed,
                               const std::string& policy);

nlohmann::json outcome_json(const MechanismOutcome& outcome, bool include_trace);

}  // namespace odt
