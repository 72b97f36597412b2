#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <vector>

#include "odt/clustering.hpp"
#include "odt/model.hpp"

// Brute-force reference implementations used by both the unit suites and the
// acceptance suite. They share nothing with the library's search paths:
// deviations come from a time grid, costs from whole-route recomputation and
// kept sets from full subset enumeration.
namespace oracles {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Grid-search minimum deviation for inserting `req` at `position`.
inline std::optional<double> grid_min_deviation(
    const odt::ClusterRoute& cluster, const odt::PassengerRequest& req,
    std::size_t position, const odt::TravelModel& travel,
    const std::vector<odt::PassengerRequest>& requests, double step) {
  const std::size_t n = cluster.stops.size();
  odt::LocationId prev_loc = travel.depot();
  double prev_free = 0.0;
  if (position > 1) {
    const odt::Stop& prev = cluster.stops[position - 2];
    prev_loc = requests[std::size_t(prev.passenger)].dropoff;
    prev_free = prev.dropoff_time;
  }
  const double ride = travel.travel_time(req.pickup, req.dropoff);
  const double earliest = prev_free + travel.travel_time(prev_loc, req.pickup);
  double latest = kInf;
  if (position <= n) {
    const odt::Stop& next = cluster.stops[position - 1];
    latest = next.pickup_time -
             travel.travel_time(req.dropoff,
                                requests[std::size_t(next.passenger)].pickup) -
             ride;
  }
  if (earliest > latest) return std::nullopt;
  const double hinge =
      std::max({earliest, req.latest_pickup, req.latest_dropoff - ride});
  const double hi = std::min(latest, hinge + step);
  double best = kInf;
  for (double t = earliest; t <= hi; t += step)
    best = std::min(best, odt::deviation(req, t, t + ride).total);
  if (std::isfinite(latest))
    best = std::min(best, odt::deviation(req, latest, latest + ride).total);
  best = std::min(best, odt::deviation(req, hi, hi + ride).total);
  return best;
}

// Insertion cost as the difference of full route recomputations.
inline double route_delta(const odt::ClusterRoute& cluster,
                          const odt::PassengerRequest& req, std::size_t position,
                          const odt::TravelModel& travel,
                          const std::vector<odt::PassengerRequest>& requests) {
  std::vector<odt::Stop> stops = cluster.stops;
  odt::Stop stop;
  stop.passenger = req.id;
  stops.insert(stops.begin() + std::ptrdiff_t(position - 1), stop);
  return odt::cluster_route_cost(stops, requests, travel) -
         odt::cluster_route_cost(cluster.stops, requests, travel);
}

struct OraclePlan {
  std::size_t cluster_index;
  bool opens_cluster;
  std::size_t position;
  double cost;
  double dev;
};

// Exhaustive position x time-grid search mirroring the insertion contract.
inline std::optional<OraclePlan> insert_best(
    const odt::PassengerRequest& req, const odt::Allocation& allocation,
    int n_vehicles, double epsilon, const odt::DemandModel& model,
    const odt::TravelModel& travel,
    const std::vector<odt::PassengerRequest>& requests, double step) {
  std::optional<OraclePlan> best;
  auto consider = [&](const odt::ClusterRoute& cluster, std::size_t index,
                      bool opens, std::size_t position) {
    const auto dev = grid_min_deviation(cluster, req, position, travel, requests, step);
    if (!dev || !odt::epsilon_feasible(model, *dev, epsilon)) return;
    const double cost = route_delta(cluster, req, position, travel, requests);
    if (!best || cost < best->cost)
      best = OraclePlan{index, opens, position, cost, *dev};
  };
  for (std::size_t j = 0; j < allocation.clusters.size(); ++j)
    for (std::size_t l = 1; l <= allocation.clusters[j].stops.size() + 1; ++l)
      consider(allocation.clusters[j], j, false, l);
  if (allocation.clusters.size() < std::size_t(n_vehicles)) {
    odt::ClusterRoute empty;
    consider(empty, allocation.clusters.size(), true, 1);
  }
  return best;
}

// Kept-set maximiser over all accepter subsets of one cluster.
inline std::set<int> stage3_kept(const odt::ClusterRoute& cluster,
                                 const std::set<int>& accepters, double rate,
                                 const odt::TravelModel& travel,
                                 const std::vector<odt::PassengerRequest>& requests) {
  std::vector<odt::Stop> candidates;
  for (const odt::Stop& stop : cluster.stops)
    if (accepters.count(stop.passenger)) candidates.push_back(stop);
  const std::size_t m = candidates.size();
  double best_value = 0.0;
  std::set<int> best;
  for (std::uint64_t mask = 0; mask < (1ULL << m); ++mask) {
    std::vector<odt::Stop> subset;
    double revenue = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      if (mask & (1ULL << i)) {
        subset.push_back(candidates[i]);
        revenue +=
            rate * requests[std::size_t(candidates[i].passenger)].distance_km;
      }
    }
    const double value =
        revenue - odt::cluster_route_cost(subset, requests, travel);
    if (value > best_value) {
      best_value = value;
      best.clear();
      for (const odt::Stop& s : subset) best.insert(s.passenger);
    }
  }
  return best;
}

}  // namespace oracles
