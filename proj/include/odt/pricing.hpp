#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "odt/clustering.hpp"
#include "odt/model.hpp"
#include "odt/rng.hpp"

namespace odt {

// One passenger's contribution to the profit expectation.
struct ProfitTerm {
  double price = 0.0;        // euros
  double cost = 0.0;         // euros
  double accept_prob = 0.0;  // in [0, 1]
};

// Expected profit by full subset enumeration over acceptance outcomes.
// Guarded to at most 20 terms; throws std::invalid_argument beyond that.
double expected_profit_exact(std::span<const ProfitTerm> terms);

// Same expectation in closed form: sum of accept_prob * (price - cost).
double expected_profit_separable(std::span<const ProfitTerm> terms);

// Enumerates only the subsets of the top_m terms ranked by expected margin
// and adds the remaining terms at their marginal expectation. Documented
// approximation for large instances; top_m = n reproduces the exact value.
double expected_profit_truncated(std::span<const ProfitTerm> terms,
                                 std::size_t top_m);

// Per-passenger offer under one common price rate.
struct OfferLine {
  int passenger = -1;
  double price = 0.0;        // rate * direct distance
  double deviation = 0.0;    // minutes committed by the schedule
  double accept_prob = 0.0;
  double marginal_cost = 0.0;
};

struct OfferSet {
  double price_rate = 0.0;  // euros/km, common to all lines
  double epsilon = 0.0;
  double expected_profit = 0.0;
  std::vector<OfferLine> lines;  // ordered by passenger id
};

struct PricingSolution {
  double expected_profit = 0.0;
  double price_rate = 0.0;
  Allocation allocation;
  OfferSet offers;
};

struct RateOptimum {
  double rate = 0.0;
  double expected_profit = 0.0;
};

// Builds the offer lines for every clustered passenger at the given rate and
// fills in the separable expected profit.
OfferSet make_offer_set(const Allocation& allocation, double rate,
                        const DemandModel& model,
                        const std::vector<PassengerRequest>& requests);

// Maximises the expected profit over the common rate in [0, r_u]: 201-point
// grid scan followed by golden-section refinement of the best bracket to
// 1e-4 euros/km. Ties resolve to the smaller rate.
RateOptimum optimize_price_rate(const Allocation& allocation,
                                const DemandModel& model,
                                const std::vector<PassengerRequest>& requests);

// Joint clustering and pricing: sweeps the feasibility parameter from 0.999
// down in eps_step increments (plus exactly 0), clusters at each value with
// a replayed insertion order, optimises the rate, and keeps the most
// profitable triple. eps_step > 1 degenerates to the single hard-constraint
// pass. Ties resolve to the smaller epsilon.
PricingSolution expected_profit_maximization(
    const std::vector<PassengerRequest>& requests, int n_vehicles,
    const DemandModel& model, const TravelModel& travel, double eps_step,
    Rng& rng, const ClusteringOptions& options = {});

// Baseline policy: hard-constraint clusters priced at the expected maximum
// rate of the demand model.
PricingSolution fixed_rate_solution(const std::vector<PassengerRequest>& requests,
                                    int n_vehicles, const DemandModel& model,
                                    const TravelModel& travel, Rng& rng,
                                    const ClusteringOptions& options = {});

OfferSet fixed_rate_offers(const std::vector<PassengerRequest>& requests,
                           int n_vehicles, const DemandModel& model,
                           const TravelModel& travel, Rng& rng,
                           const ClusteringOptions& options = {});

}  // namespace odt
