#include "odt/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odt {

namespace {

std::map<int, OfferLine> lines_by_passenger(const OfferSet& offers) {
  std::map<int, OfferLine> out;
  for (const OfferLine& line : offers.lines) out[line.passenger] = line;
  return out;
}

}  // namespace

PricingSolution run_stage1(const Scenario& scenario, const Stage1Policy& policy,
                           Rng& rng) {
  if (const auto* sweep = std::get_if<SweepPolicy>(&policy)) {
    ClusteringOptions options;
    options.first_feasible = scenario.large_scale && scenario.first_feasible;
    PricingSolution solution =
        expected_profit_maximization(scenario.requests, scenario.n_vehicles,
                                     scenario.demand, scenario.travel,
                                     sweep->eps_step, rng, options);
    if (scenario.large_scale && !solution.offers.lines.empty()) {
      std::vector<ProfitTerm> terms;
      terms.reserve(solution.offers.lines.size());
      for (const OfferLine& line : solution.offers.lines)
        terms.push_back({line.price, line.marginal_cost, line.accept_prob});
      const std::size_t top_m = std::min(scenario.top_m, terms.size());
      solution.expected_profit = expected_profit_truncated(terms, std::max<std::size_t>(top_m, 1));
      solution.offers.expected_profit = solution.expected_profit;
    }
    return solution;
  }

  // Fixed-rate baseline. At large scale it serves one passenger per vehicle
  // instead of chaining under hard constraints.
  ClusteringOptions options;
  if (scenario.large_scale) options.max_cluster_size = 1;
  return fixed_rate_solution(scenario.requests, scenario.n_vehicles,
                             scenario.demand, scenario.travel, rng, options);
}

std::map<int, Stage2Response> run_stage2(
    const OfferSet& offers, const std::vector<PassengerThresholds>& thresholds,
    const std::vector<PassengerRequest>& requests) {
  std::map<int, Stage2Response> responses;
  for (const OfferLine& line : offers.lines) {
    const PassengerThresholds& th =
        thresholds.at(static_cast<std::size_t>(line.passenger));
    const PassengerRequest& req =
        requests.at(static_cast<std::size_t>(line.passenger));
    const bool accept =
        passenger_accepts(th, line.price, req.distance_km, line.deviation);
    responses[line.passenger] =
        accept ? Stage2Response::ConditionallyAccept : Stage2Response::Reject;
  }
  return responses;
}

Stage3Result run_stage3(const PricingSolution& stage1,
                        const std::map<int, Stage2Response>& responses,
                        const DemandModel& model, const TravelModel& travel,
                        const std::vector<PassengerRequest>& requests) {
  const auto lines = lines_by_passenger(stage1.offers);
  Stage3Result result;

  for (const ClusterRoute& cluster : stage1.allocation.clusters) {
    // Rejecters are spliced out up front; only conditional accepters compete
    // for a place in the final route.
    std::vector<Stop> accepters;
    for (const Stop& stop : cluster.stops) {
      const auto it = responses.find(stop.passenger);
      if (it != responses.end() && it->second == Stage2Response::ConditionallyAccept)
        accepters.push_back(stop);
    }
    const std::size_t m = accepters.size();
    if (m > 20)
      throw std::logic_error("stage-3 subset enumeration limited to 20 accepters");

    double best_value = 0.0;  // the empty set leaves the vehicle idle
    std::uint64_t best_mask = 0;
    for (std::uint64_t mask = 1; mask < (1ULL << m); ++mask) {
      std::vector<Stop> subset;
      double revenue = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (mask & (1ULL << i)) {
          subset.push_back(accepters[i]);
          revenue += lines.at(accepters[i].passenger).price;
        }
      }
      const double value = revenue - cluster_route_cost(subset, requests, travel);
      if (value > best_value) {
        best_value = value;
        best_mask = mask;
      }
    }

    for (std::size_t i = 0; i < m; ++i) {
      const int passenger = accepters[i].passenger;
      const OfferLine& line = lines.at(passenger);
      if (best_mask & (1ULL << i)) {
        result.kept.insert(passenger);
        result.final_prices[passenger] = line.price;
      } else {
        const double ceiling_price =
            model.r_u * requests.at(static_cast<std::size_t>(passenger)).distance_km;
        result.final_prices[passenger] = ceiling_price;
        if (ceiling_price > line.price) result.breached.insert(passenger);
      }
    }
  }
  return result;
}

MechanismOutcome run_stage4(const PricingSolution& stage1,
                            const std::map<int, Stage2Response>& responses,
                            const Stage3Result& stage3,
                            const std::vector<PassengerThresholds>& thresholds,
                            const TravelModel& travel,
                            const std::vector<PassengerRequest>& requests) {
  const auto lines = lines_by_passenger(stage1.offers);
  MechanismOutcome outcome;
  outcome.trace.offers = stage1.offers;
  outcome.trace.responses = responses;
  outcome.trace.final_prices = stage3.final_prices;
  outcome.trace.breached = stage3.breached;

  std::set<int> serviced;
  for (const auto& [passenger, response] : responses) {
    if (response != Stage2Response::ConditionallyAccept) continue;
    const double final_price = stage3.final_prices.at(passenger);
    if (stage3.breached.count(passenger)) {
      // The contract is void; the passenger re-decides at the raised price.
      const PassengerRequest& req = requests.at(static_cast<std::size_t>(passenger));
      const PassengerThresholds& th = thresholds.at(static_cast<std::size_t>(passenger));
      const bool accept = passenger_accepts(th, final_price, req.distance_km,
                                            lines.at(passenger).deviation);
      outcome.trace.decisions[passenger] =
          accept ? Stage4Decision::UnconditionallyAccept : Stage4Decision::Reject;
      // Re-acceptance at the ceiling rate has probability zero under the
      // threshold model and no vehicle is reserved for it; not serviced.
    } else {
      outcome.trace.decisions[passenger] = Stage4Decision::UnconditionallyAccept;
      if (stage3.kept.count(passenger)) serviced.insert(passenger);
    }
  }

  double revenue = 0.0;
  double cost = 0.0;
  double efficiency = 0.0;
  double metres = 0.0;
  for (int passenger : serviced) {
    const PassengerRequest& req = requests.at(static_cast<std::size_t>(passenger));
    const PassengerThresholds& th = thresholds.at(static_cast<std::size_t>(passenger));
    revenue += stage3.final_prices.at(passenger);
    efficiency += th.max_price_rate * req.distance_km;
    metres += req.distance_km * 1000.0;
  }
  for (const ClusterRoute& cluster : stage1.allocation.clusters) {
    std::vector<Stop> final_stops;
    for (const Stop& stop : cluster.stops) {
      if (serviced.count(stop.passenger)) final_stops.push_back(stop);
    }
    if (final_stops.empty()) continue;
    ClusterRoute final_route;
    final_route.vehicle = cluster.vehicle;
    final_route.stops = std::move(final_stops);
    final_route.route_cost = cluster_route_cost(final_route.stops, requests, travel);
    cost += final_route.route_cost;
    outcome.final_routes.push_back(std::move(final_route));
  }

  outcome.serviced.assign(serviced.begin(), serviced.end());
  outcome.realized_profit = revenue - cost;
  outcome.efficiency_eur = efficiency;
  outcome.efficiency_eur_per_m = metres > 0.0 ? efficiency / metres : 0.0;
  return outcome;
}

MechanismOutcome run_mechanism(const Scenario& scenario,
                               const Stage1Policy& policy, Rng& rng) {
  const std::uint64_t thresholds_seed = rng.next_u64();
  const std::uint64_t clustering_seed = rng.next_u64();

  Rng thresholds_rng(thresholds_seed);
  std::vector<PassengerThresholds> thresholds;
  thresholds.reserve(scenario.requests.size());
  for (std::size_t i = 0; i < scenario.requests.size(); ++i)
    thresholds.push_back(sample_thresholds(scenario.demand, thresholds_rng));

  Rng clustering_rng(clustering_seed);
  const PricingSolution stage1 = run_stage1(scenario, policy, clustering_rng);
  const auto responses = run_stage2(stage1.offers, thresholds, scenario.requests);
  const Stage3Result stage3 =
      run_stage3(stage1, responses, scenario.demand, scenario.travel, scenario.requests);
  return run_stage4(stage1, responses, stage3, thresholds, scenario.travel,
                    scenario.requests);
}

}  // namespace odt
