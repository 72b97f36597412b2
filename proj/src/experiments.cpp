#include "odt/experiments.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

namespace odt {

namespace {

constexpr std::uint64_t kScenarioStream = 0x5ce7a110;
constexpr std::uint64_t kMechanismStream = 0x6ec4a215;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not a number: " + value);
  }
  if (pos != value.size())
    throw ConfigError("config key '" + key + "': trailing characters: " + value);
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  std::size_t pos = 0;
  std::int64_t out = 0;
  try {
    out = std::stoll(value, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': not an integer: " + value);
  }
  if (pos != value.size())
    throw ConfigError("config key '" + key + "': trailing characters: " + value);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false: " + value);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

}  // namespace

void ScenarioConfig::validate() const {
  auto require = [](bool ok, const char* msg) {
    if (!ok) throw ConfigError(msg);
  };
  require(n_passengers >= 0, "n_passengers must be >= 0");
  require(n_vehicles >= 1, "n_vehicles must be >= 1");
  require(region_km > 0, "region_km must be > 0");
  require(velocity_kmh > 0, "velocity_kmh must be > 0");
  require(cost_per_km >= 0, "cost_per_km must be >= 0");
  require(r_u > 0, "r_u must be > 0");
  require(delta_u > 0, "delta_u must be > 0");
  require(alpha_r > 0 && beta_r > 0, "demand shape parameters must be > 0");
  require(alpha_delta > 0 && beta_delta > 0,
          "deviation shape parameters must be > 0");
  require(interval_minutes > 0, "interval_minutes must be > 0");
  require(max_pickup_window >= 0, "max_pickup_window must be >= 0");
  require(dropoff_slack_minutes >= 0, "dropoff_slack_minutes must be >= 0");
  require(eps_step > 0, "eps_step must be > 0");
  if (mode == RunMode::Exact) {
    require(n_passengers <= 20, "exact mode requires n_passengers <= 20");
  } else {
    require(top_m >= 1 && top_m <= 20, "top_m must be in [1, 20]");
  }
}

ScenarioConfig parse_config(std::istream& in) {
  ScenarioConfig cfg;
  std::map<std::string, bool> seen;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key = value");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": empty key or value");
    if (seen[key])
      throw ConfigError("duplicate config key: " + key);
    seen[key] = true;

    if (key == "n_passengers") cfg.n_passengers = static_cast<int>(parse_int(key, value));
    else if (key == "n_vehicles") cfg.n_vehicles = static_cast<int>(parse_int(key, value));
    else if (key == "region_km") cfg.region_km = parse_double(key, value);
    else if (key == "velocity_kmh") cfg.velocity_kmh = parse_double(key, value);
    else if (key == "cost_per_km") cfg.cost_per_km = parse_double(key, value);
    else if (key == "r_u") cfg.r_u = parse_double(key, value);
    else if (key == "delta_u") cfg.delta_u = parse_double(key, value);
    else if (key == "alpha_r") cfg.alpha_r = parse_double(key, value);
    else if (key == "beta_r") cfg.beta_r = parse_double(key, value);
    else if (key == "alpha_delta") cfg.alpha_delta = parse_double(key, value);
    else if (key == "beta_delta") cfg.beta_delta = parse_double(key, value);
    else if (key == "interval_minutes") cfg.interval_minutes = parse_double(key, value);
    else if (key == "max_pickup_window") cfg.max_pickup_window = parse_double(key, value);
    else if (key == "dropoff_slack_minutes") cfg.dropoff_slack_minutes = parse_double(key, value);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "top_m") cfg.top_m = static_cast<int>(parse_int(key, value));
    else if (key == "first_feasible") cfg.first_feasible = parse_bool(key, value);
    else if (key == "eps_step") cfg.eps_step = parse_double(key, value);
    else if (key == "mode") {
      if (value == "exact") cfg.mode = RunMode::Exact;
      else if (value == "large_scale") cfg.mode = RunMode::LargeScale;
      else throw ConfigError("config key 'mode': expected exact or large_scale");
    } else {
      throw ConfigError("unknown config key: " + key);
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  return parse_config(in);
}

Scenario generate_scenario(const ScenarioConfig& cfg, Rng& rng) {
  cfg.validate();
  Scenario scenario;
  scenario.demand = DemandModel{cfg.alpha_r, cfg.beta_r,     cfg.r_u,
                                cfg.alpha_delta, cfg.beta_delta, cfg.delta_u};
  scenario.demand.validate();
  scenario.n_vehicles = cfg.n_vehicles;
  scenario.large_scale = cfg.mode == RunMode::LargeScale;
  scenario.top_m = static_cast<std::size_t>(cfg.top_m);
  scenario.first_feasible = cfg.first_feasible;

  std::vector<Point> points;
  points.push_back({cfg.region_km / 2.0, cfg.region_km / 2.0});  // depot
  scenario.requests.reserve(static_cast<std::size_t>(cfg.n_passengers));
  for (int i = 0; i < cfg.n_passengers; ++i) {
    const Point pickup{rng.uniform(0.0, cfg.region_km),
                       rng.uniform(0.0, cfg.region_km)};
    Point dropoff{rng.uniform(0.0, cfg.region_km),
                  rng.uniform(0.0, cfg.region_km)};
    while (std::hypot(dropoff.x_km - pickup.x_km, dropoff.y_km - pickup.y_km) <
           1e-9) {
      dropoff = {rng.uniform(0.0, cfg.region_km), rng.uniform(0.0, cfg.region_km)};
    }
    points.push_back(pickup);
    points.push_back(dropoff);

    PassengerRequest req;
    req.id = i;
    req.pickup = 1 + 2 * i;
    req.dropoff = 2 + 2 * i;
    req.distance_km =
        std::hypot(dropoff.x_km - pickup.x_km, dropoff.y_km - pickup.y_km);
    req.earliest_pickup = rng.uniform(0.0, cfg.interval_minutes);
    req.latest_pickup = req.earliest_pickup + rng.uniform(0.0, cfg.max_pickup_window);
    const double ride_min = req.distance_km / cfg.velocity_kmh * 60.0;
    req.latest_dropoff = req.latest_pickup + ride_min + cfg.dropoff_slack_minutes;
    req.validate();
    scenario.requests.push_back(req);
  }
  scenario.travel =
      TravelModel::euclidean(std::move(points), 0, cfg.velocity_kmh, cfg.cost_per_km);
  return scenario;
}

namespace {

Stage1Policy policy_by_name(const ScenarioConfig& cfg, const std::string& name) {
  if (name == "optimized_sweep") return SweepPolicy{cfg.eps_step};
  if (name == "hard_constraint") return SweepPolicy{2.0};  // single eps = 0 pass
  if (name == "fixed_rate") return FixedRatePolicy{};
  throw ConfigError("unknown policy: " + name);
}

RepMetrics metrics_of(const MechanismOutcome& outcome) {
  RepMetrics m;
  m.expected_profit = outcome.trace.offers.expected_profit;
  m.realized_profit = outcome.realized_profit;
  m.efficiency_eur = outcome.efficiency_eur;
  m.efficiency_eur_per_m = outcome.efficiency_eur_per_m;
  m.serviced_count = static_cast<double>(outcome.serviced.size());
  return m;
}

int worker_count(int n_reps) {
  unsigned n = std::thread::hardware_concurrency();
  if (n == 0) n = 1;
  if (const char* env = std::getenv("ODT_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return static_cast<int>(std::min<unsigned>(n, static_cast<unsigned>(std::max(n_reps, 1))));
}

}  // namespace

ExperimentReport run_campaign(const ScenarioConfig& cfg, int n_reps) {
  cfg.validate();
  if (n_reps < 1) throw ConfigError("n_reps must be >= 1");

  constexpr int kNPolicies = 3;
  std::vector<std::array<RepMetrics, kNPolicies>> results(
      static_cast<std::size_t>(n_reps));

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int rep = next.fetch_add(1);
      if (rep >= n_reps) return;
      const std::uint64_t rep_seed = mix_seed(cfg.seed, static_cast<std::uint64_t>(rep));
      Rng scenario_rng(mix_seed(rep_seed, kScenarioStream));
      const Scenario scenario = generate_scenario(cfg, scenario_rng);
      for (int p = 0; p < kNPolicies; ++p) {
        // Same mechanism stream for every policy: common random numbers.
        Rng mech_rng(mix_seed(rep_seed, kMechanismStream));
        const Stage1Policy policy = policy_by_name(cfg, kPolicyNames[p]);
        results[static_cast<std::size_t>(rep)][static_cast<std::size_t>(p)] =
            metrics_of(run_mechanism(scenario, policy, mech_rng));
      }
    }
  };

  const int n_threads = worker_count(n_reps);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(n_threads - 1));
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (std::thread& t : pool) t.join();

  ExperimentReport report;
  report.config = cfg;
  report.n_reps = n_reps;
  for (int p = 0; p < kNPolicies; ++p) {
    PolicyRun run;
    run.policy = kPolicyNames[p];
    run.reps.reserve(static_cast<std::size_t>(n_reps));
    for (int rep = 0; rep < n_reps; ++rep)
      run.reps.push_back(results[static_cast<std::size_t>(rep)][static_cast<std::size_t>(p)]);
    report.policies.push_back(std::move(run));
  }
  return report;
}

ExperimentReport run_large_scale(const ScenarioConfig& cfg, int n_reps) {
  if (cfg.mode != RunMode::LargeScale)
    throw ConfigError("run_large_scale requires mode = large_scale");
  return run_campaign(cfg, n_reps);
}

MetricSummary summarize(const std::vector<double>& samples) {
  MetricSummary s;
  const std::size_t n = samples.size();
  if (n == 0) return s;
  double sum = 0.0;
  for (double v : samples) sum += v;
  s.mean = sum / static_cast<double>(n);
  if (n > 1) {
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    s.ci_half = 1.96 * sd / std::sqrt(static_cast<double>(n));
  }
  return s;
}

namespace {

constexpr const char* kMetricNames[] = {"expected_profit", "realized_profit",
                                        "efficiency_eur", "efficiency_eur_per_m",
                                        "serviced_count"};

double metric_value(const RepMetrics& m, int metric) {
  switch (metric) {
    case 0: return m.expected_profit;
    case 1: return m.realized_profit;
    case 2: return m.efficiency_eur;
    case 3: return m.efficiency_eur_per_m;
    default: return m.serviced_count;
  }
}

std::vector<double> metric_samples(const PolicyRun& run, int metric) {
  std::vector<double> out;
  out.reserve(run.reps.size());
  for (const RepMetrics& m : run.reps) out.push_back(metric_value(m, metric));
  return out;
}

}  // namespace

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream out;
  out << "policy,n_passengers,metric,mean,ci_half_width,n_reps\n";
  auto emit = [&](const std::string& policy, int metric,
                  const std::vector<double>& samples) {
    const MetricSummary s = summarize(samples);
    out << policy << ',' << report.config.n_passengers << ','
        << kMetricNames[metric] << ',' << fmt(s.mean) << ',' << fmt(s.ci_half)
        << ',' << report.n_reps << '\n';
  };
  for (const PolicyRun& run : report.policies) {
    for (int metric = 0; metric < 5; ++metric)
      emit(run.policy, metric, metric_samples(run, metric));
  }
  // Paired differences of the optimized policy against the two baselines.
  const PolicyRun& sweep = report.policies.at(0);
  for (std::size_t other : {std::size_t{1}, std::size_t{2}}) {
    const PolicyRun& base = report.policies.at(other);
    for (int metric = 0; metric < 5; ++metric) {
      std::vector<double> diff(sweep.reps.size());
      for (std::size_t i = 0; i < sweep.reps.size(); ++i)
        diff[i] = metric_value(sweep.reps[i], metric) -
                  metric_value(base.reps[i], metric);
      emit(sweep.policy + "_minus_" + base.policy, metric, diff);
    }
  }
  return out.str();
}

namespace {

nlohmann::json config_json(const ScenarioConfig& cfg) {
  return nlohmann::json{
      {"n_passengers", cfg.n_passengers},
      {"n_vehicles", cfg.n_vehicles},
      {"region_km", cfg.region_km},
      {"velocity_kmh", cfg.velocity_kmh},
      {"cost_per_km", cfg.cost_per_km},
      {"r_u", cfg.r_u},
      {"delta_u", cfg.delta_u},
      {"alpha_r", cfg.alpha_r},
      {"beta_r", cfg.beta_r},
      {"alpha_delta", cfg.alpha_delta},
      {"beta_delta", cfg.beta_delta},
      {"interval_minutes", cfg.interval_minutes},
      {"max_pickup_window", cfg.max_pickup_window},
      {"dropoff_slack_minutes", cfg.dropoff_slack_minutes},
      {"seed", cfg.seed},
      {"mode", cfg.mode == RunMode::Exact ? "exact" : "large_scale"},
      {"top_m", cfg.top_m},
      {"first_feasible", cfg.first_feasible},
      {"eps_step", cfg.eps_step}};
}

}  // namespace

nlohmann::json report_json(const ExperimentReport& report) {
  nlohmann::json policies = nlohmann::json::array();
  for (const PolicyRun& run : report.policies) {
    nlohmann::json metrics;
    for (int metric = 0; metric < 5; ++metric) {
      const auto samples = metric_samples(run, metric);
      const MetricSummary s = summarize(samples);
      metrics[kMetricNames[metric]] = {
          {"mean", s.mean}, {"ci_half_width", s.ci_half}, {"samples", samples}};
    }
    policies.push_back({{"policy", run.policy}, {"metrics", metrics}});
  }
  return nlohmann::json{{"config", config_json(report.config)},
                        {"n_reps", report.n_reps},
                        {"policies", policies}};
}

void write_report(const ExperimentReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream csv(std::filesystem::path(out_dir) / "report.csv",
                      std::ios::binary);
    if (!csv) throw std::runtime_error("cannot write report.csv");
    csv << report_csv(report);
  }
  {
    std::ofstream js(std::filesystem::path(out_dir) / "report.json",
                     std::ios::binary);
    if (!js) throw std::runtime_error("cannot write report.json");
    js << report_json(report).dump(2) << '\n';
  }
}

MechanismOutcome simulate_once(const ScenarioConfig& cfg, std::uint64_t seed,
                               const std::string& policy) {
  cfg.validate();
  Rng scenario_rng(mix_seed(seed, kScenarioStream));
  const Scenario scenario = generate_scenario(cfg, scenario_rng);
  Rng mech_rng(mix_seed(seed, kMechanismStream));
  return run_mechanism(scenario, policy_by_name(cfg, policy), mech_rng);
}

nlohmann::json outcome_json(const MechanismOutcome& outcome, bool include_trace) {
  nlohmann::json routes = nlohmann::json::array();
  for (const ClusterRoute& route : outcome.final_routes) {
    nlohmann::json stops = nlohmann::json::array();
    for (const Stop& stop : route.stops) {
      stops.push_back({{"passenger", stop.passenger},
                       {"pickup_time", stop.pickup_time},
                       {"dropoff_time", stop.dropoff_time}});
    }
    routes.push_back({{"vehicle", route.vehicle},
                      {"route_cost", route.route_cost},
                      {"stops", stops}});
  }
  nlohmann::json out{{"serviced", outcome.serviced},
                     {"realized_profit", outcome.realized_profit},
                     {"efficiency_eur", outcome.efficiency_eur},
                     {"efficiency_eur_per_m", outcome.efficiency_eur_per_m},
                     {"final_routes", routes}};
  if (!include_trace) return out;

  nlohmann::json lines = nlohmann::json::array();
  for (const OfferLine& line : outcome.trace.offers.lines) {
    lines.push_back({{"passenger", line.passenger},
                     {"price", line.price},
                     {"deviation", line.deviation},
                     {"accept_prob", line.accept_prob},
                     {"marginal_cost", line.marginal_cost}});
  }
  nlohmann::json responses;
  for (const auto& [passenger, response] : outcome.trace.responses) {
    responses[std::to_string(passenger)] =
        response == Stage2Response::ConditionallyAccept ? "conditionally_accept"
                                                        : "reject";
  }
  nlohmann::json prices;
  for (const auto& [passenger, price] : outcome.trace.final_prices)
    prices[std::to_string(passenger)] = price;
  nlohmann::json decisions;
  for (const auto& [passenger, decision] : outcome.trace.decisions) {
    decisions[std::to_string(passenger)] =
        decision == Stage4Decision::UnconditionallyAccept ? "unconditionally_accept"
                                                          : "reject";
  }
  out["trace"] = {{"offers",
                   {{"price_rate", outcome.trace.offers.price_rate},
                    {"epsilon", outcome.trace.offers.epsilon},
                    {"expected_profit", outcome.trace.offers.expected_profit},
                    {"lines", lines}}},
                  {"responses", responses},
                  {"final_prices", prices},
                  {"breached", outcome.trace.breached},
                  {"decisions", decisions}};
  return out;
}

}  // namespace odt
