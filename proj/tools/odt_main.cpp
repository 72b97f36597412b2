// odt: simulator and analysis CLI for the on-demand transport market
// mechanism. Subcommands: simulate, campaign, rate-analysis, validate.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>

#include "odt/experiments.hpp"
#include "odt/rate_analysis.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInternal = 3;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed,
                 bool seed_given, const std::string& policy, bool trace) {
  odt::ScenarioConfig cfg = odt::load_config(config_path);
  const std::uint64_t run_seed = seed_given ? seed : cfg.seed;
  const odt::MechanismOutcome outcome = odt::simulate_once(cfg, run_seed, policy);
  nlohmann::json out = odt::outcome_json(outcome, trace);
  out["seed"] = run_seed;
  out["policy"] = policy;
  std::cout << out.dump(2) << '\n';
  return kExitOk;
}

int cmd_campaign(const std::string& config_path, int reps,
                 const std::string& out_dir) {
  const odt::ScenarioConfig cfg = odt::load_config(config_path);
  const odt::ExperimentReport report =
      cfg.mode == odt::RunMode::LargeScale ? odt::run_large_scale(cfg, reps)
                                           : odt::run_campaign(cfg, reps);
  odt::write_report(report, out_dir);
  std::cout << "wrote " << out_dir << "/report.csv and report.json ("
            << reps << " replications)\n";
  return kExitOk;
}

int cmd_rate_analysis(double lambda_per_min, double zeta_per_km2,
                      double nu_kmh, double t_min, double t_max, int points,
                      std::size_t mc_samples, std::uint64_t seed,
                      const std::string& out_path) {
  if (points < 2) throw odt::ConfigError("--points must be >= 2");
  if (!(t_min > 0) || !(t_max > t_min))
    throw odt::ConfigError("need 0 < t-min < t-max");

  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw odt::ConfigError("cannot write " + out_path);
  out << "t_min,p_ignore,p_overtime,p_overtime_alt,"
         "mc_p_ignore,mc_p_ignore_ci,mc_p_overtime,mc_p_overtime_ci\n";

  odt::Rng rng(seed);
  for (int k = 0; k < points; ++k) {
    odt::RateParams params;
    params.interval_min = t_min + (t_max - t_min) * k / (points - 1);
    params.lambda_per_min = lambda_per_min;
    params.zeta_per_km2 = zeta_per_km2;
    params.speed_km_min = nu_kmh / 60.0;
    params.validate();
    const odt::RateEstimates mc = odt::mc_rate_oracle(params, mc_samples, rng);
    out << fmt(params.interval_min) << ',' << fmt(odt::p_ignore(params)) << ','
        << fmt(odt::p_overtime(params)) << ',' << fmt(odt::p_overtime_alt(params))
        << ',' << fmt(mc.ignore.p_hat) << ',' << fmt(mc.ignore.ci_half_width)
        << ',' << fmt(mc.overtime.p_hat) << ',' << fmt(mc.overtime.ci_half_width)
        << '\n';
  }
  std::cout << "wrote " << out_path << '\n';
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  odt::load_config(config_path);
  std::cout << "config ok\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"on-demand transport market mechanism toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string policy = "optimized_sweep";
  std::string out_dir = "out";
  std::string out_path = "rate_analysis.csv";
  std::uint64_t seed = 0;
  bool trace = false;
  int reps = 2000;
  double lambda = 0.1, zeta = 1.0, nu_kmh = 20.0, t_min = 1.0, t_max = 60.0;
  int points = 50;
  std::size_t mc_samples = 100000;

  auto* simulate = app.add_subcommand("simulate", "single mechanism run, JSON to stdout");
  simulate->add_option("--config", config_path, "scenario config file")->required();
  auto* seed_opt = simulate->add_option("--seed", seed, "override the config seed");
  simulate->add_option("--policy", policy,
                       "optimized_sweep | hard_constraint | fixed_rate");
  simulate->add_flag("--trace", trace, "include the stage-by-stage trace");

  auto* campaign = app.add_subcommand("campaign", "Monte Carlo experiment campaign");
  campaign->add_option("--config", config_path, "scenario config file")->required();
  campaign->add_option("--reps", reps, "number of replications")->required();
  campaign->add_option("--out", out_dir, "output directory")->required();

  auto* rate = app.add_subcommand("rate-analysis", "mechanism-rate tradeoff CSV");
  rate->add_option("--lambda", lambda, "1/mean request-to-pickup gap, per minute")->required();
  rate->add_option("--zeta", zeta, "drop-off intensity, points per km^2")->required();
  rate->add_option("--nu", nu_kmh, "vehicle speed, km/h")->required();
  rate->add_option("--t-min", t_min, "smallest interval, minutes")->required();
  rate->add_option("--t-max", t_max, "largest interval, minutes")->required();
  rate->add_option("--points", points, "grid size")->required();
  rate->add_option("--mc-samples", mc_samples, "simulation samples per point");
  rate->add_option("--seed", seed, "simulation seed");
  rate->add_option("--out", out_path, "output CSV path")->required();

  auto* validate = app.add_subcommand("validate", "check a config file");
  validate->add_option("--config", config_path, "scenario config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(config_path, seed, seed_opt->count() > 0, policy, trace);
    if (campaign->parsed()) return cmd_campaign(config_path, reps, out_dir);
    if (rate->parsed())
      return cmd_rate_analysis(lambda, zeta, nu_kmh, t_min, t_max, points,
                               mc_samples, seed, out_path);
    if (validate->parsed()) return cmd_validate(config_path);
  } catch (const odt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitOk;
}
