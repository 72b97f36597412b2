#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <variant>
#include <vector>

#include "odt/pricing.hpp"

namespace odt {

// One market instance: the requests of a single negotiation window plus the
// provider's demand belief, travel metrics and fleet size. The large-scale
// switches select the truncated objective and first-feasible insertion.
struct Scenario {
  std::vector<PassengerRequest> requests;
  DemandModel demand;
  TravelModel travel;
  int n_vehicles = 0;
  bool large_scale = false;
  std::size_t top_m = 12;
  bool first_feasible = false;
};

// Stage-1 offer policies. The sweep optimises clustering and rate jointly;
// eps_step > 1 degenerates to the hard-constraint pass with optimised rate.
struct SweepPolicy {
  double eps_step = 0.2;
};
struct FixedRatePolicy {};
using Stage1Policy = std::variant<SweepPolicy, FixedRatePolicy>;

enum class Stage2Response { ConditionallyAccept, Reject };
enum class Stage4Decision { UnconditionallyAccept, Reject };

struct Stage3Result {
  std::map<int, double> final_prices;  // per stage-2 accepter
  std::set<int> kept;                  // serviced at the stage-1 price
  std::set<int> breached;              // re-priced above the accepted offer
};

struct StageTrace {
  OfferSet offers;
  std::map<int, Stage2Response> responses;
  std::map<int, double> final_prices;
  std::set<int> breached;
  std::map<int, Stage4Decision> decisions;
};

struct MechanismOutcome {
  std::vector<int> serviced;
  double realized_profit = 0.0;        // euros
  double efficiency_eur = 0.0;         // sum of serviced willingness to pay
  double efficiency_eur_per_m = 0.0;   // same, per serviced trip metre
  std::vector<ClusterRoute> final_routes;
  StageTrace trace;
};

// Stage 1: generate offers. Unassigned passengers receive none.
PricingSolution run_stage1(const Scenario& scenario, const Stage1Policy& policy,
                           Rng& rng);

// Stage 2: each offered passenger applies her private threshold policy.
std::map<int, Stage2Response> run_stage2(
    const OfferSet& offers, const std::vector<PassengerThresholds>& thresholds,
    const std::vector<PassengerRequest>& requests);

// Stage 3: per cluster, splice out rejecters (committed times unchanged) and
// keep the subset of accepters maximising revenue minus the spliced route
// cost. Kept passengers keep their price; excluded accepters are re-priced
// at the rate ceiling, which the threshold policy rejects with certainty.
Stage3Result run_stage3(const PricingSolution& stage1,
                        const std::map<int, Stage2Response>& responses,
                        const DemandModel& model, const TravelModel& travel,
                        const std::vector<PassengerRequest>& requests);

// Stage 4: accepters whose offer was not breached are bound by contract;
// breached passengers re-decide at the new price. Produces realized profit,
// efficiency and the final spliced routes.
MechanismOutcome run_stage4(const PricingSolution& stage1,
                            const std::map<int, Stage2Response>& responses,
                            const Stage3Result& stage3,
                            const std::vector<PassengerThresholds>& thresholds,
                            const TravelModel& travel,
                            const std::vector<PassengerRequest>& requests);

// Full run: samples one threshold pair per passenger, then stages 1 to 4.
// Deterministic for a fixed rng seed.
MechanismOutcome run_mechanism(const Scenario& scenario,
                               const Stage1Policy& policy, Rng& rng);

}  // namespace odt
