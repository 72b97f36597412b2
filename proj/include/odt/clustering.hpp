#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <vector>

#include "odt/model.hpp"
#include "odt/rng.hpp"

namespace odt {

// One scheduled passenger on a vehicle route. Unit capacity: the vehicle
// drives pickup -> dropoff directly, so dropoff_time = pickup_time + ride.
// insertion_cost is the net route-cost change recorded when the passenger
// was inserted; summed over a cluster it telescopes to route_cost.
struct Stop {
  int passenger = -1;
  double pickup_time = 0.0;   // minutes
  double dropoff_time = 0.0;  // minutes
  double insertion_cost = 0.0;  // euros
};

// Ordered service sequence of one vehicle, depot to depot.
struct ClusterRoute {
  int vehicle = -1;
  std::vector<Stop> stops;
  double route_cost = 0.0;  // euros, depot -> stops -> depot edge sum
};

// Clustering result: at most n_vehicles clusters plus the passengers no
// feasible plan was found for. Immutable snapshot once returned.
struct Allocation {
  std::vector<ClusterRoute> clusters;
  std::vector<int> unassigned;
  double epsilon = 0.0;
};

struct ScheduledTimes {
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  DeviationBreakdown deviation;
};

// Where and how to insert one passenger. `position` is 1-based: insert
// before the position-th stop; stops.size() + 1 appends. opens_cluster
// means a fresh vehicle is used and cluster_index is the new slot.
struct InsertionPlan {
  std::size_t cluster_index = 0;
  bool opens_cluster = false;
  std::size_t position = 1;
  double pickup_time = 0.0;
  double dropoff_time = 0.0;
  DeviationBreakdown deviation;
  double marginal_cost = 0.0;    // net route-cost change, euros
  double connection_cost = 0.0;  // legs to pickup and from dropoff only
};

struct ClusteringOptions {
  // Stop scanning at the first feasible, cost-improving plan instead of the
  // full cluster x position search. Large-scale heuristic.
  bool first_feasible = false;
  // Cap on passengers per vehicle; 1 reproduces the no-clustering baseline.
  std::size_t max_cluster_size = std::numeric_limits<std::size_t>::max();
};

// Whether a journey with the given total deviation is acceptable with
// probability at least 1 - epsilon under the deviation marginal.
bool epsilon_feasible(const DemandModel& model, double dev, double epsilon);

// Minimum-deviation pickup/drop-off times for inserting `req` at `position`
// (1-based, stops.size() + 1 appends) without touching committed times of
// the other stops. Empty when the neighbouring stops leave no room for the
// leg chain. Among minimum-deviation times the earliest pickup is chosen.
std::optional<ScheduledTimes> best_times_at_position(
    const ClusterRoute& cluster, const PassengerRequest& req,
    std::size_t position, const TravelModel& travel,
    const std::vector<PassengerRequest>& requests);

// Net route-cost change of inserting `req` at `position`: legs to the pickup
// and from the dropoff plus the ride, minus the displaced leg. For an empty
// cluster this is the full depot -> pickup -> dropoff -> depot cost.
double marginal_insertion_cost(const ClusterRoute& cluster,
                               const PassengerRequest& req,
                               std::size_t position, const TravelModel& travel,
                               const std::vector<PassengerRequest>& requests);

// Cost of only the two connecting legs (to the pickup, from the dropoff),
// without the displaced-leg credit or the ride itself.
double connection_cost(const ClusterRoute& cluster, const PassengerRequest& req,
                       std::size_t position, const TravelModel& travel,
                       const std::vector<PassengerRequest>& requests);

// Best feasible insertion of `req` over every position of every cluster and,
// while a vehicle is free, a new singleton cluster. A plan is kept iff the
// committed times of other passengers are untouched, the minimum-deviation
// times are epsilon-feasible, and the cost strictly beats the running best
// (`cost_bound` seeds it). Ties resolve to the lowest cluster index, then
// the lowest position, with the new-cluster option scanned last.
std::optional<InsertionPlan> insert_best(
    double cost_bound, const PassengerRequest& req, const Allocation& allocation,
    int n_vehicles, double epsilon, const DemandModel& model,
    const TravelModel& travel, const std::vector<PassengerRequest>& requests,
    const ClusteringOptions& options = {});

// Apply a plan produced by insert_best against the same allocation state.
void apply_insertion(Allocation& allocation, const InsertionPlan& plan,
                     const PassengerRequest& req, const TravelModel& travel,
                     const std::vector<PassengerRequest>& requests);

// Greedy cluster formation: passengers in random order, each placed by
// insert_best; passengers with no feasible plan end up unassigned.
Allocation cluster_formation(const std::vector<PassengerRequest>& requests,
                             int n_vehicles, double epsilon,
                             const DemandModel& model, const TravelModel& travel,
                             Rng& rng, const ClusteringOptions& options = {});

// Depot -> stops -> depot edge-cost sum; the recomputable route_cost check.
double cluster_route_cost(const std::vector<Stop>& stops,
                          const std::vector<PassengerRequest>& requests,
                          const TravelModel& travel);

}  // namespace odt
