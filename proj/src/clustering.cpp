#include "odt/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace odt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

const PassengerRequest& req_of(const std::vector<PassengerRequest>& requests,
                               int passenger) {
  const auto idx = static_cast<std::size_t>(passenger);
  if (idx >= requests.size() || requests[idx].id != passenger)
    throw std::logic_error("requests must be indexed by passenger id");
  return requests[idx];
}

// Locations and times bracketing an insertion position. next_pickup is only
// meaningful when has_next; cost_next_loc falls back to the depot so the
// return leg is accounted for when appending.
struct PositionContext {
  LocationId prev_loc;
  double prev_free;  // earliest departure time from prev_loc
  bool has_next;
  LocationId next_loc;
  double next_pickup;
  LocationId cost_next_loc;
};

PositionContext position_context(const ClusterRoute& cluster,
                                 std::size_t position,
                                 const TravelModel& travel,
                                 const std::vector<PassengerRequest>& requests) {
  const std::size_t n = cluster.stops.size();
  if (position < 1 || position > n + 1)
    throw std::invalid_argument("insertion position out of range");
  PositionContext ctx{};
  if (position == 1) {
    ctx.prev_loc = travel.depot();
    ctx.prev_free = 0.0;  // vehicles are available at the depot from time 0
  } else {
    const Stop& prev = cluster.stops[position - 2];
    ctx.prev_loc = req_of(requests, prev.passenger).dropoff;
    ctx.prev_free = prev.dropoff_time;
  }
  if (position == n + 1) {
    ctx.has_next = false;
    ctx.next_loc = travel.depot();
    ctx.cost_next_loc = travel.depot();
  } else {
    const Stop& next = cluster.stops[position - 1];
    ctx.has_next = true;
    ctx.next_loc = req_of(requests, next.passenger).pickup;
    ctx.next_pickup = next.pickup_time;
    ctx.cost_next_loc = ctx.next_loc;
  }
  return ctx;
}

}  // namespace

bool epsilon_feasible(const DemandModel& model, double dev, double epsilon) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("epsilon must be in [0, 1]");
  return model.deviation_survival(dev) >= 1.0 - epsilon;
}

std::optional<ScheduledTimes> best_times_at_position(
    const ClusterRoute& cluster, const PassengerRequest& req,
    std::size_t position, const TravelModel& travel,
    const std::vector<PassengerRequest>& requests) {
  const PositionContext ctx = position_context(cluster, position, travel, requests);
  const double ride = travel.travel_time(req.pickup, req.dropoff);

  const double earliest = ctx.prev_free + travel.travel_time(ctx.prev_loc, req.pickup);
  const double latest =
      ctx.has_next
          ? ctx.next_pickup - travel.travel_time(req.dropoff, ctx.next_loc) - ride
          : kInf;
  if (earliest > latest) return std::nullopt;

  // The total deviation is piecewise linear and convex in the pickup time;
  // its minimisers form an interval. Zero deviation needs a pickup in
  // [earliest_pickup, min(latest_pickup, latest_dropoff - ride)]; when that
  // is empty the flat bottom sits between latest_dropoff - ride and
  // earliest_pickup.
  const double zero_hi = std::min(req.latest_pickup, req.latest_dropoff - ride);
  double flat_lo = req.earliest_pickup;
  double flat_hi = zero_hi;
  if (flat_hi < flat_lo) std::swap(flat_lo, flat_hi);

  double pickup;
  if (latest < flat_lo) {
    pickup = latest;
  } else if (earliest > flat_hi) {
    pickup = earliest;
  } else {
    pickup = std::max(earliest, flat_lo);  // earliest minimiser
  }

  ScheduledTimes out;
  out.pickup_time = pickup;
  out.dropoff_time = pickup + ride;
  out.deviation = deviation(req, out.pickup_time, out.dropoff_time);
  return out;
}

double marginal_insertion_cost(const ClusterRoute& cluster,
                               const PassengerRequest& req,
                               std::size_t position, const TravelModel& travel,
                               const std::vector<PassengerRequest>& requests) {
  const PositionContext ctx = position_context(cluster, position, travel, requests);
  return travel.travel_cost(ctx.prev_loc, req.pickup) +
         travel.travel_cost(req.pickup, req.dropoff) +
         travel.travel_cost(req.dropoff, ctx.cost_next_loc) -
         travel.travel_cost(ctx.prev_loc, ctx.cost_next_loc);
}

double connection_cost(const ClusterRoute& cluster, const PassengerRequest& req,
                       std::size_t position, const TravelModel& travel,
                       const std::vector<PassengerRequest>& requests) {
  const PositionContext ctx = position_context(cluster, position, travel, requests);
  return travel.travel_cost(ctx.prev_loc, req.pickup) +
         travel.travel_cost(req.dropoff, ctx.cost_next_loc);
}

std::optional<InsertionPlan> insert_best(
    double cost_bound, const PassengerRequest& req, const Allocation& allocation,
    int n_vehicles, double epsilon, const DemandModel& model,
    const TravelModel& travel, const std::vector<PassengerRequest>& requests,
    const ClusteringOptions& options) {
  std::optional<InsertionPlan> best;
  double best_cost = cost_bound;

  auto consider = [&](const ClusterRoute& cluster, std::size_t cluster_index,
                      bool opens_cluster, std::size_t position) -> bool {
    const auto times = best_times_at_position(cluster, req, position, travel, requests);
    if (!times) return false;
    if (!epsilon_feasible(model, times->deviation.total, epsilon)) return false;
    const double cost = marginal_insertion_cost(cluster, req, position, travel, requests);
    if (cost >= best_cost) return false;
    InsertionPlan plan;
    plan.cluster_index = cluster_index;
    plan.opens_cluster = opens_cluster;
    plan.position = position;
    plan.pickup_time = times->pickup_time;
    plan.dropoff_time = times->dropoff_time;
    plan.deviation = times->deviation;
    plan.marginal_cost = cost;
    plan.connection_cost = connection_cost(cluster, req, position, travel, requests);
    best = plan;
    best_cost = cost;
    return true;
  };

  for (std::size_t j = 0; j < allocation.clusters.size(); ++j) {
    const ClusterRoute& cluster = allocation.clusters[j];
    if (cluster.stops.size() >= options.max_cluster_size) continue;
    for (std::size_t l = 1; l <= cluster.stops.size() + 1; ++l) {
      if (consider(cluster, j, false, l) && options.first_feasible) return best;
    }
  }

  if (allocation.clusters.size() < static_cast<std::size_t>(std::max(n_vehicles, 0))) {
    ClusterRoute empty;
    if (consider(empty, allocation.clusters.size(), true, 1) &&
        options.first_feasible)
      return best;
  }

  return best;
}

void apply_insertion(Allocation& allocation, const InsertionPlan& plan,
                     const PassengerRequest& req, const TravelModel& travel,
                     const std::vector<PassengerRequest>& requests) {
  if (plan.opens_cluster) {
    ClusterRoute fresh;
    fresh.vehicle = static_cast<int>(allocation.clusters.size());
    allocation.clusters.push_back(std::move(fresh));
  }
  ClusterRoute& cluster = allocation.clusters.at(plan.cluster_index);
  if (plan.position < 1 || plan.position > cluster.stops.size() + 1)
    throw std::logic_error("insertion plan position out of range");
  Stop stop;
  stop.passenger = req.id;
  stop.pickup_time = plan.pickup_time;
  stop.dropoff_time = plan.dropoff_time;
  stop.insertion_cost = plan.marginal_cost;
  cluster.stops.insert(cluster.stops.begin() + static_cast<std::ptrdiff_t>(plan.position - 1),
                       stop);
  cluster.route_cost = cluster_route_cost(cluster.stops, requests, travel);
}

Allocation cluster_formation(const std::vector<PassengerRequest>& requests,
                             int n_vehicles, double epsilon,
                             const DemandModel& model, const TravelModel& travel,
                             Rng& rng, const ClusteringOptions& options) {
  Allocation allocation;
  allocation.epsilon = epsilon;

  std::vector<int> order(requests.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng.engine());

  for (int idx : order) {
    const PassengerRequest& req = req_of(requests, idx);
    const auto plan = insert_best(kInf, req, allocation, n_vehicles, epsilon,
                                  model, travel, requests, options);
    if (plan) {
      apply_insertion(allocation, *plan, req, travel, requests);
    } else {
      allocation.unassigned.push_back(idx);
    }
  }
  return allocation;
}

double cluster_route_cost(const std::vector<Stop>& stops,
                          const std::vector<PassengerRequest>& requests,
                          const TravelModel& travel) {
  if (stops.empty()) return 0.0;
  double cost = 0.0;
  LocationId at = travel.depot();
  for (const Stop& stop : stops) {
    const PassengerRequest& req = req_of(requests, stop.passenger);
    cost += travel.travel_cost(at, req.pickup);
    cost += travel.travel_cost(req.pickup, req.dropoff);
    at = req.dropoff;
  }
  cost += travel.travel_cost(at, travel.depot());
  return cost;
}

}  // namespace odt
