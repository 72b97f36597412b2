#pragma once

#include <cstddef>
#include <vector>

#include "odt/rng.hpp"

namespace odt {

using LocationId = int;

struct Point {
  double x_km = 0.0;
  double y_km = 0.0;
};

// Travel metrics between locations: minutes, euros and kilometres for every
// ordered pair. Either derived from planar coordinates (synthetic scenarios)
// or given as explicit matrices (hand-built fixtures). Immutable once built.
class TravelModel {
 public:
  TravelModel() = default;  // empty model; queries require locations

  static TravelModel euclidean(std::vector<Point> locations, LocationId depot,
                               double velocity_kmh, double cost_per_km);

  static TravelModel from_matrices(std::vector<std::vector<double>> time_min,
                                   std::vector<std::vector<double>> cost_eur,
                                   std::vector<std::vector<double>> dist_km,
                                   LocationId depot);

  double travel_time(LocationId u, LocationId w) const;  // minutes
  double travel_cost(LocationId u, LocationId w) const;  // euros
  double distance_km(LocationId u, LocationId w) const;

  LocationId depot() const { return depot_; }
  double velocity_kmh() const { return velocity_kmh_; }
  std::size_t n_locations() const;

 private:
  bool euclidean_ = false;
  std::vector<Point> points_;
  double velocity_kmh_ = 0.0;
  double cost_per_km_ = 0.0;
  std::vector<std::vector<double>> time_min_;
  std::vector<std::vector<double>> cost_eur_;
  std::vector<std::vector<double>> dist_km_;
  LocationId depot_ = 0;
};

// A journey request. Pickup is wanted inside [earliest_pickup, latest_pickup]
// and drop-off no later than latest_dropoff; all times in minutes.
struct PassengerRequest {
  int id = 0;
  LocationId pickup = 0;
  LocationId dropoff = 0;
  double earliest_pickup = 0.0;
  double latest_pickup = 0.0;
  double latest_dropoff = 0.0;
  double distance_km = 0.0;  // direct pickup -> dropoff distance

  void validate() const;  // earliest <= latest < latest_dropoff, distance > 0
};

// Private per-passenger limits; known to the passenger, not the provider.
struct PassengerThresholds {
  double max_price_rate = 0.0;  // euros/km
  double max_deviation = 0.0;   // minutes
};

// How far an offered schedule strays from the request, split into the
// pickup-window part and the late-drop-off part. All values >= 0.
struct DeviationBreakdown {
  double pickup_dev = 0.0;
  double dropoff_dev = 0.0;
  double total = 0.0;
};

// Deviation of actual times (T, L) from the request. Throws
// std::invalid_argument when actual_dropoff < actual_pickup.
DeviationBreakdown deviation(const PassengerRequest& req, double actual_pickup,
                             double actual_dropoff);

// Provider-side belief over passenger thresholds: independent scaled Beta
// marginals on [0, r_u] for the maximum price rate and on [0, delta_u] for
// the maximum deviation.
struct DemandModel {
  double alpha_r = 1.0;
  double beta_r = 1.0;
  double r_u = 3.0;       // euros/km, upper support
  double alpha_delta = 1.0;
  double beta_delta = 1.0;
  double delta_u = 30.0;  // minutes, upper support

  void validate() const;

  // Pr(max_price_rate >= rate). 1 below the support, 0 at or above r_u.
  double rate_survival(double rate) const;

  // Pr(max_deviation >= dev). 1 at dev <= 0, 0 at or above delta_u.
  double deviation_survival(double dev) const;

  // Probability an offer at `rate` euros/km with `dev` minutes of deviation
  // is accepted; the product of the two survival terms, clamped to [0, 1].
  double acceptance_probability(double rate, double dev) const;

  // Mean of the price-rate marginal: r_u * alpha_r / (alpha_r + beta_r).
  double expected_max_rate() const;
};

// Independent draws from the two scaled Beta marginals.
PassengerThresholds sample_thresholds(const DemandModel& model, Rng& rng);

// Accept iff price/distance < max_price_rate and dev < max_deviation, both
// strict. Throws std::invalid_argument when distance_km <= 0.
bool passenger_accepts(const PassengerThresholds& th, double price,
                       double distance_km, double dev);

}  // namespace odt
