#include "odt/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace odt {

double expected_profit_exact(std::span<const ProfitTerm> terms) {
  const std::size_t n = terms.size();
  if (n > 20)
    throw std::invalid_argument("subset enumeration limited to 20 passengers");
  double total = 0.0;
  for (std::uint64_t mask = 0; mask < (1ULL << n); ++mask) {
    double margin = 0.0;
    double weight = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ULL << i)) {
        margin += terms[i].price - terms[i].cost;
        weight *= terms[i].accept_prob;
      } else {
        weight *= 1.0 - terms[i].accept_prob;
      }
    }
    total += margin * weight;
  }
  return total;
}

double expected_profit_separable(std::span<const ProfitTerm> terms) {
  double total = 0.0;
  for (const ProfitTerm& t : terms) total += t.accept_prob * (t.price - t.cost);
  return total;
}

double expected_profit_truncated(std::span<const ProfitTerm> terms,
                                 std::size_t top_m) {
  const std::size_t n = terms.size();
  if (top_m < 1 || top_m > n)
    throw std::invalid_argument("top_m must be in [1, n]");

  std::vector<std::size_t> by_margin(n);
  for (std::size_t i = 0; i < n; ++i) by_margin[i] = i;
  std::stable_sort(by_margin.begin(), by_margin.end(),
                   [&](std::size_t a, std::size_t b) {
                     return terms[a].accept_prob * (terms[a].price - terms[a].cost) >
                            terms[b].accept_prob * (terms[b].price - terms[b].cost);
                   });

  std::vector<ProfitTerm> head;
  head.reserve(top_m);
  double tail = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const ProfitTerm& t = terms[by_margin[k]];
    if (k < top_m) {
      head.push_back(t);
    } else {
      tail += t.accept_prob * (t.price - t.cost);
    }
  }
  return expected_profit_exact(head) + tail;
}

OfferSet make_offer_set(const Allocation& allocation, double rate,
                        const DemandModel& model,
                        const std::vector<PassengerRequest>& requests) {
  OfferSet offers;
  offers.price_rate = rate;
  offers.epsilon = allocation.epsilon;
  for (const ClusterRoute& cluster : allocation.clusters) {
    for (const Stop& stop : cluster.stops) {
      const PassengerRequest& req = requests.at(static_cast<std::size_t>(stop.passenger));
      OfferLine line;
      line.passenger = stop.passenger;
      line.price = rate * req.distance_km;
      line.deviation = deviation(req, stop.pickup_time, stop.dropoff_time).total;
      line.accept_prob = model.acceptance_probability(rate, line.deviation);
      line.marginal_cost = stop.insertion_cost;
      offers.lines.push_back(line);
    }
  }
  std::sort(offers.lines.begin(), offers.lines.end(),
            [](const OfferLine& a, const OfferLine& b) {
              return a.passenger < b.passenger;
            });
  for (const OfferLine& line : offers.lines)
    offers.expected_profit += line.accept_prob * (line.price - line.marginal_cost);
  return offers;
}

namespace {

// Scheduled-passenger summary for the rate objective. With one common rate
// the objective factors as rate_survival(r) * (r * weighted_km - weighted_cost),
// with the deviation survivals folded into the weights.
struct RateObjective {
  const DemandModel* model;
  double weighted_km = 0.0;
  double weighted_cost = 0.0;

  double operator()(double rate) const {
    return model->rate_survival(rate) *
           (rate * weighted_km - weighted_cost);
  }
};

}  // namespace

RateOptimum optimize_price_rate(const Allocation& allocation,
                                const DemandModel& model,
                                const std::vector<PassengerRequest>& requests) {
  RateObjective objective{&model, 0.0, 0.0};
  for (const ClusterRoute& cluster : allocation.clusters) {
    for (const Stop& stop : cluster.stops) {
      const PassengerRequest& req = requests.at(static_cast<std::size_t>(stop.passenger));
      const double dev = deviation(req, stop.pickup_time, stop.dropoff_time).total;
      const double dev_survival = model.deviation_survival(dev);
      objective.weighted_km += dev_survival * req.distance_km;
      objective.weighted_cost += dev_survival * stop.insertion_cost;
    }
  }

  constexpr int kGridPoints = 201;
  double best_rate = 0.0;
  double best_value = objective(0.0);
  int best_index = 0;
  for (int k = 1; k < kGridPoints; ++k) {
    const double r = model.r_u * k / (kGridPoints - 1);
    const double v = objective(r);
    if (v > best_value) {
      best_value = v;
      best_rate = r;
      best_index = k;
    }
  }

  // Golden-section refinement of the bracket around the grid maximum.
  double lo = model.r_u * std::max(best_index - 1, 0) / (kGridPoints - 1);
  double hi = model.r_u * std::min(best_index + 1, kGridPoints - 1) / (kGridPoints - 1);
  constexpr double kInvPhi = 0.6180339887498949;
  constexpr double kTol = 1e-4;
  double x1 = hi - kInvPhi * (hi - lo);
  double x2 = lo + kInvPhi * (hi - lo);
  double f1 = objective(x1);
  double f2 = objective(x2);
  while (hi - lo > kTol) {
    if (f1 >= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - kInvPhi * (hi - lo);
      f1 = objective(x1);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + kInvPhi * (hi - lo);
      f2 = objective(x2);
    }
  }
  const double refined = 0.5 * (lo + hi);
  const double refined_value = objective(refined);
  if (refined_value > best_value ||
      (refined_value == best_value && refined < best_rate)) {
    best_rate = refined;
    best_value = refined_value;
  }

  return RateOptimum{best_rate, best_value};
}

PricingSolution expected_profit_maximization(
    const std::vector<PassengerRequest>& requests, int n_vehicles,
    const DemandModel& model, const TravelModel& travel, double eps_step,
    Rng& rng, const ClusteringOptions& options) {
  if (eps_step <= 0.0)
    throw std::invalid_argument("eps_step must be > 0");

  std::vector<double> epsilons;
  if (eps_step <= 1.0) {
    for (double eps = 0.999; eps > 0.0; eps -= eps_step) epsilons.push_back(eps);
  }
  epsilons.push_back(0.0);  // hard constraints are always in the comparison set

  bool have_best = false;
  PricingSolution best;
  for (double eps : epsilons) {
    Rng pass_rng = rng;  // every pass replays the same insertion order
    Allocation allocation =
        cluster_formation(requests, n_vehicles, eps, model, travel, pass_rng, options);
    const RateOptimum opt = optimize_price_rate(allocation, model, requests);
    const bool better =
        !have_best || opt.expected_profit > best.expected_profit ||
        (opt.expected_profit == best.expected_profit && eps < best.allocation.epsilon);
    if (better) {
      best.expected_profit = opt.expected_profit;
      best.price_rate = opt.rate;
      best.allocation = std::move(allocation);
      have_best = true;
    }
  }
  best.offers = make_offer_set(best.allocation, best.price_rate, model, requests);
  best.expected_profit = best.offers.expected_profit;
  return best;
}

PricingSolution fixed_rate_solution(const std::vector<PassengerRequest>& requests,
                                    int n_vehicles, const DemandModel& model,
                                    const TravelModel& travel, Rng& rng,
                                    const ClusteringOptions& options) {
  Rng pass_rng = rng;
  PricingSolution solution;
  solution.allocation =
      cluster_formation(requests, n_vehicles, 0.0, model, travel, pass_rng, options);
  solution.price_rate = model.expected_max_rate();
  solution.offers =
      make_offer_set(solution.allocation, solution.price_rate, model, requests);
  solution.expected_profit = solution.offers.expected_profit;
  return solution;
}

OfferSet fixed_rate_offers(const std::vector<PassengerRequest>& requests,
                           int n_vehicles, const DemandModel& model,
                           const TravelModel& travel, Rng& rng,
                           const ClusteringOptions& options) {
  return fixed_rate_solution(requests, n_vehicles, model, travel, rng, options).offers;
}

}  // namespace odt
