#include "odt/model.hpp"

#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odt {

TravelModel TravelModel::euclidean(std::vector<Point> locations,
                                   LocationId depot, double velocity_kmh,
                                   double cost_per_km) {
  if (velocity_kmh <= 0.0) throw std::invalid_argument("velocity must be > 0");
  if (cost_per_km < 0.0) throw std::invalid_argument("cost_per_km must be >= 0");
  if (depot < 0 || static_cast<std::size_t>(depot) >= locations.size())
    throw std::invalid_argument("depot id out of range");
  TravelModel m;
  m.euclidean_ = true;
  m.points_ = std::move(locations);
  m.velocity_kmh_ = velocity_kmh;
  m.cost_per_km_ = cost_per_km;
  m.depot_ = depot;
  return m;
}

TravelModel TravelModel::from_matrices(std::vector<std::vector<double>> time_min,
                                       std::vector<std::vector<double>> cost_eur,
                                       std::vector<std::vector<double>> dist_km,
                                       LocationId depot) {
  const std::size_t n = time_min.size();
  if (cost_eur.size() != n || dist_km.size() != n)
    throw std::invalid_argument("matrix sizes disagree");
  for (std::size_t i = 0; i < n; ++i) {
    if (time_min[i].size() != n || cost_eur[i].size() != n ||
        dist_km[i].size() != n)
      throw std::invalid_argument("matrices must be square");
    for (std::size_t j = 0; j < n; ++j) {
      if (time_min[i][j] < 0 || cost_eur[i][j] < 0 || dist_km[i][j] < 0)
        throw std::invalid_argument("travel entries must be >= 0");
    }
    if (time_min[i][i] != 0.0)
      throw std::invalid_argument("travel_time(u,u) must be 0");
  }
  if (depot < 0 || static_cast<std::size_t>(depot) >= n)
    throw std::invalid_argument("depot id out of range");
  TravelModel m;
  m.euclidean_ = false;
  m.time_min_ = std::move(time_min);
  m.cost_eur_ = std::move(cost_eur);
  m.dist_km_ = std::move(dist_km);
  m.depot_ = depot;
  return m;
}

std::size_t TravelModel::n_locations() const {
  return euclidean_ ? points_.size() : time_min_.size();
}

double TravelModel::distance_km(LocationId u, LocationId w) const {
  if (euclidean_) {
    const Point& a = points_.at(static_cast<std::size_t>(u));
    const Point& b = points_.at(static_cast<std::size_t>(w));
    return std::hypot(a.x_km - b.x_km, a.y_km - b.y_km);
  }
  return dist_km_.at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(w));
}

double TravelModel::travel_time(LocationId u, LocationId w) const {
  if (euclidean_) return distance_km(u, w) / velocity_kmh_ * 60.0;
  return time_min_.at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(w));
}

double TravelModel::travel_cost(LocationId u, LocationId w) const {
  if (euclidean_) return distance_km(u, w) * cost_per_km_;
  return cost_eur_.at(static_cast<std::size_t>(u)).at(static_cast<std::size_t>(w));
}

void PassengerRequest::validate() const {
  if (earliest_pickup > latest_pickup)
    throw std::invalid_argument("pickup window is empty");
  if (latest_dropoff <= latest_pickup)
    throw std::invalid_argument("latest_dropoff must exceed latest_pickup");
  if (distance_km <= 0.0)
    throw std::invalid_argument("distance_km must be > 0");
}

DeviationBreakdown deviation(const PassengerRequest& req, double actual_pickup,
                             double actual_dropoff) {
  if (actual_dropoff < actual_pickup)
    throw std::invalid_argument("drop-off precedes pickup");
  DeviationBreakdown d;
  if (actual_pickup < req.earliest_pickup) {
    d.pickup_dev = req.earliest_pickup - actual_pickup;
  } else if (actual_pickup > req.latest_pickup) {
    d.pickup_dev = actual_pickup - req.latest_pickup;
  }
  if (actual_dropoff > req.latest_dropoff) {
    d.dropoff_dev = actual_dropoff - req.latest_dropoff;
  }
  d.total = d.pickup_dev + d.dropoff_dev;
  return d;
}

void DemandModel::validate() const {
  if (alpha_r <= 0 || beta_r <= 0 || alpha_delta <= 0 || beta_delta <= 0)
    throw std::invalid_argument("Beta shape parameters must be > 0");
  if (r_u <= 0) throw std::invalid_argument("r_u must be > 0");
  if (delta_u <= 0) throw std::invalid_argument("delta_u must be > 0");
}

namespace {

// Survival of a scaled Beta(alpha, beta) on [0, upper] at x.
double scaled_beta_survival(double alpha, double beta, double upper, double x) {
  if (x <= 0.0) return 1.0;
  if (x >= upper) return 0.0;
  return boost::math::ibetac(alpha, beta, x / upper);
}

}  // namespace

double DemandModel::rate_survival(double rate) const {
  return scaled_beta_survival(alpha_r, beta_r, r_u, rate);
}

double DemandModel::deviation_survival(double dev) const {
  return scaled_beta_survival(alpha_delta, beta_delta, delta_u, dev);
}

double DemandModel::acceptance_probability(double rate, double dev) const {
  const double p = rate_survival(rate) * deviation_survival(dev);
  return std::clamp(p, 0.0, 1.0);
}

double DemandModel::expected_max_rate() const {
  return r_u * alpha_r / (alpha_r + beta_r);
}

PassengerThresholds sample_thresholds(const DemandModel& model, Rng& rng) {
  auto beta_draw = [&rng](double alpha, double beta) {
    const double a = rng.gamma(alpha);
    const double b = rng.gamma(beta);
    return a / (a + b);
  };
  PassengerThresholds th;
  th.max_price_rate = model.r_u * beta_draw(model.alpha_r, model.beta_r);
  th.max_deviation = model.delta_u * beta_draw(model.alpha_delta, model.beta_delta);
  return th;
}

bool passenger_accepts(const PassengerThresholds& th, double price,
                       double distance_km, double dev) {
  if (distance_km <= 0.0)
    throw std::invalid_argument("distance_km must be > 0");
  const double rate = price / distance_km;
  return rate < th.max_price_rate && dev < th.max_deviation;
}

}  // namespace odt
