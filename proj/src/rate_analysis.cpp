#include "odt/rate_analysis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace odt {

namespace {
constexpr double kPi = std::numbers::pi;
}

void RateParams::validate() const {
  if (interval_min <= 0 || lambda_per_min <= 0 || zeta_per_km2 <= 0 ||
      speed_km_min <= 0 || kappa_per_min <= 0)
    throw std::invalid_argument("rate parameters must be strictly positive");
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double p_ignore(const RateParams& params) {
  const double x = params.lambda_per_min * params.interval_min;
  // -expm1(-x)/x is (1 - exp(-x))/x without cancellation near zero.
  return 1.0 + std::expm1(-x) / x;
}

double p_overtime(const RateParams& params) {
  const double reach_km = params.speed_km_min * params.interval_min;
  const double sqrt_zeta = std::sqrt(params.zeta_per_km2);
  const double x = reach_km * std::sqrt(2.0 * kPi * params.zeta_per_km2);
  return (0.5 - q_function(x)) / (reach_km * sqrt_zeta);
}

double p_overtime_alt(const RateParams& params) {
  const double reach_km = params.speed_km_min * params.interval_min;
  const double boundary =
      (1.0 - 2.0 * kPi * params.zeta_per_km2 * reach_km) *
      std::exp(-kPi * params.zeta_per_km2 * reach_km * reach_km);
  return boundary + p_overtime(params);
}

double nearest_neighbor_pdf(double zeta_per_km2, double z_km) {
  if (z_km < 0.0) throw std::invalid_argument("distance must be >= 0");
  return 2.0 * kPi * zeta_per_km2 * z_km *
         std::exp(-zeta_per_km2 * kPi * z_km * z_km);
}

RateEstimates mc_rate_oracle(const RateParams& params, std::size_t n_samples,
                             Rng& rng) {
  params.validate();
  if (n_samples < 10'000)
    throw std::invalid_argument("mc_rate_oracle needs at least 1e4 samples");

  const double T = params.interval_min;
  std::size_t ignored = 0;
  std::size_t overtime = 0;
  for (std::size_t i = 0; i < n_samples; ++i) {
    // A request whose desired pickup lands before the next run is ignored.
    const double a = rng.uniform(0.0, T);
    const double gap = rng.exponential(params.lambda_per_min);
    if (a + gap < T) ++ignored;

    // Nearest drop-off distance by inverse survival of the spatial pattern.
    const double b = rng.uniform(0.0, T);
    const double u = rng.uniform();
    const double z =
        std::sqrt(-std::log1p(-u) / (kPi * params.zeta_per_km2));
    if (b + z / params.speed_km_min >= T) ++overtime;
  }

  auto estimate = [n_samples](std::size_t hits) {
    BinomialEstimate e;
    e.n = n_samples;
    e.p_hat = static_cast<double>(hits) / static_cast<double>(n_samples);
    e.ci_half_width =
        1.96 * std::sqrt(e.p_hat * (1.0 - e.p_hat) / static_cast<double>(n_samples));
    return e;
  };
  return RateEstimates{estimate(ignored), estimate(overtime)};
}

std::vector<double> poisson_request_offsets(const RateParams& params,
                                            std::size_t n_intervals, Rng& rng) {
  params.validate();
  const double horizon = params.interval_min * static_cast<double>(n_intervals);
  std::vector<double> offsets;
  double t = rng.exponential(params.kappa_per_min);
  while (t < horizon) {
    offsets.push_back(std::fmod(t, params.interval_min));
    t += rng.exponential(params.kappa_per_min);
  }
  return offsets;
}

double crossover(const RateParams& params, double t_lo_min, double t_hi_min) {
  if (!(t_lo_min > 0.0) || !(t_hi_min > t_lo_min))
    throw std::invalid_argument("invalid crossover bracket");

  auto gap = [&params](double t) {
    RateParams p = params;
    p.interval_min = t;
    return p_ignore(p) - p_overtime(p);
  };

  double lo = t_lo_min;
  double hi = t_hi_min;
  double g_lo = gap(lo);
  double g_hi = gap(hi);
  if (g_lo == 0.0) return lo;
  if (g_hi == 0.0) return hi;
  if ((g_lo < 0.0) == (g_hi < 0.0))
    throw NoSignChange("p_ignore - p_overtime does not change sign on bracket");

  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    const double g_mid = gap(mid);
    if (g_mid == 0.0) return mid;
    if ((g_mid < 0.0) == (g_lo < 0.0)) {
      lo = mid;
      g_lo = g_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace odt
