#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "odt/model.hpp"

// Oracles and fixtures shared by the test suites. Everything here is kept
// independent of the library's computation paths: quadrature instead of
// closed forms, lgamma instead of the incomplete-beta backend.
namespace test_support {

inline double adaptive_simpson_step(const std::function<double(double)>& f,
                                    double a, double b, double fa, double fb,
                                    double fm, double whole, double tol,
                                    int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return adaptive_simpson_step(f, a, m, fa, fm, flm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson_step(f, m, b, fm, fb, frm, right, 0.5 * tol, depth - 1);
}

inline double integrate(const std::function<double(double)>& f, double a,
                        double b, double tol = 1e-12) {
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return adaptive_simpson_step(f, a, b, fa, fb, fm, whole, tol, 60);
}

// Scaled Beta density on [0, upper], written from the definition.
inline double scaled_beta_pdf(double alpha, double beta, double upper, double x) {
  if (x <= 0.0 || x >= upper) return 0.0;
  const double u = x / upper;
  const double log_norm =
      std::lgamma(alpha + beta) - std::lgamma(alpha) - std::lgamma(beta);
  return std::exp(log_norm + (alpha - 1.0) * std::log(u) +
                  (beta - 1.0) * std::log1p(-u)) /
         upper;
}

// Two-sided Kolmogorov-Smirnov statistic of samples against a cdf.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

// Asymptotic two-sided critical value at significance 0.01.
inline double ks_critical_001(std::size_t n) {
  return 1.6276 / std::sqrt(static_cast<double>(n));
}

// Random planar instance: depot at the centre of a square region, passenger
// ids dense from zero, windows up to 10 minutes wide.
struct Instance {
  std::vector<odt::PassengerRequest> requests;
  odt::TravelModel travel;
};

inline Instance random_instance(odt::Rng& rng, int n, double region_km = 8.0,
                                double window_lo = 0.0, double window_hi = 60.0) {
  std::vector<odt::Point> points;
  points.push_back({region_km / 2, region_km / 2});
  std::vector<odt::PassengerRequest> requests;
  for (int i = 0; i < n; ++i) {
    const odt::Point p{rng.uniform(0.0, region_km), rng.uniform(0.0, region_km)};
    const odt::Point d{rng.uniform(0.0, region_km), rng.uniform(0.0, region_km)};
    points.push_back(p);
    points.push_back(d);
    const double dist =
        std::max(std::hypot(p.x_km - d.x_km, p.y_km - d.y_km), 0.05);
    const double a = rng.uniform(window_lo, window_hi);
    const double b = a + rng.uniform(0.0, 10.0);
    const double ride_min = dist / 30.0 * 60.0;
    odt::PassengerRequest req;
    req.id = i;
    req.pickup = 1 + 2 * i;
    req.dropoff = 2 + 2 * i;
    req.earliest_pickup = a;
    req.latest_pickup = b;
    req.latest_dropoff = b + ride_min + 15.0;
    req.distance_km = dist;
    requests.push_back(req);
  }
  return {std::move(requests),
          odt::TravelModel::euclidean(std::move(points), 0, 30.0, 0.4)};
}

inline odt::PassengerRequest make_request(int id, odt::LocationId pickup,
                                          odt::LocationId dropoff, double a,
                                          double b, double l,
                                          double distance_km) {
  odt::PassengerRequest req;
  req.id = id;
  req.pickup = pickup;
  req.dropoff = dropoff;
  req.earliest_pickup = a;
  req.latest_pickup = b;
  req.latest_dropoff = l;
  req.distance_km = distance_km;
  return req;
}

}  // namespace test_support
