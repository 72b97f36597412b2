#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "odt/rng.hpp"

namespace odt {

// Parameters of the mechanism-rate model. Units are minutes, km and points
// per square km throughout; speed is km per minute.
struct RateParams {
  double interval_min = 15.0;    // T, time between mechanism runs
  double lambda_per_min = 0.1;   // 1 / mean gap between request and pickup
  double zeta_per_km2 = 1.0;     // spatial intensity of candidate drop-offs
  double speed_km_min = 0.5;     // vehicle speed
  double kappa_per_min = 1.0;    // request arrival rate, simulation only

  void validate() const;  // all strictly positive
};

// Gaussian upper-tail probability (1/sqrt(2 pi)) Int_x^inf exp(-u^2/2) du.
double q_function(double x);

// Probability a request's desired pickup passes before the next run:
// 1 - (1 - exp(-lambda T)) / (lambda T).
double p_ignore(const RateParams& params);

// Probability the nearest drop-off cannot be reached before the next run.
// Closed form of the nearest-neighbour distance integral; equals
// (1/d) Int_0^d exp(-pi zeta z^2) dz with d the distance reachable in one
// interval, expressed through the Q-function.
double p_overtime(const RateParams& params);

// Variant of p_overtime carrying an extra (1 - 2 pi zeta d) exp(-pi zeta d^2)
// boundary term, as produced by a sign slip in the integration by parts.
// Disagrees with quadrature and simulation at small intervals; retained for
// comparison studies.
double p_overtime_alt(const RateParams& params);

// Nearest-neighbour distance density 2 pi zeta z exp(-pi zeta z^2).
double nearest_neighbor_pdf(double zeta_per_km2, double z_km);

struct BinomialEstimate {
  double p_hat = 0.0;
  double ci_half_width = 0.0;  // 95% normal-approximation interval
  std::size_t n = 0;
};

struct RateEstimates {
  BinomialEstimate ignore;
  BinomialEstimate overtime;
};

// Simulation oracle for both probabilities: pickup offsets uniform in the
// interval, request-to-pickup gaps exponential, drop-off at the nearest
// point of a spatial Poisson pattern, one passenger per vehicle per
// interval. Requires n_samples >= 10'000.
RateEstimates mc_rate_oracle(const RateParams& params, std::size_t n_samples,
                             Rng& rng);

// Offsets within [0, T) of a simulated homogeneous request stream with rate
// kappa, observed over n_intervals consecutive intervals.
std::vector<double> poisson_request_offsets(const RateParams& params,
                                            std::size_t n_intervals, Rng& rng);

struct NoSignChange : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Interval length where p_ignore crosses p_overtime, by bisection to 1e-6
// minutes. Throws NoSignChange when the bracket does not straddle the root.
double crossover(const RateParams& params, double t_lo_min, double t_hi_min);

}  // namespace odt
