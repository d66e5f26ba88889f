#pragma once

#include "fwa/rng.hpp"
#include "fwa/topology.hpp"

#include <vector>

namespace fwa::traffic {

/// Per-slice fluid queue (M/M/1 abstraction), rates in packets per second.
struct SliceQueue {
    int slice_id = 0;
    double arrival_rate = 0.0;
    double service_rate = 0.0;
    double buffer_cap = 0.0;       // B~, packets
    double buffer_threshold = 0.0; // B, packets
    double expected_arrivals = 0.0; // E[lambda] over the loop window, packets
};

struct DelayBreakdown {
    double queueing_ms = 0.0;
    double wireless_tx_ms = 0.0;
    double fronthaul_tx_ms = 0.0;
    double fronthaul_prop_ms = 0.0;

    double total_ms() const {
        return queueing_ms + wireless_tx_ms + fronthaul_tx_ms + fronthaul_prop_ms;
    }
};

/// M/M/1 sojourn time 1/(mu - lambda), in ms. Throws InvariantError on an
/// unstable queue (mu <= lambda); callers treat that as a blown delay budget.
double queueing_delay_ms(const SliceQueue& q);

/// Dynamic queue status: max(B~ - E[lambda], B).
double queue_status(const SliceQueue& q);

/// Fills the three transmission/propagation components (ms) for one data
/// chunk. Throws on zero rate or capacity with nonzero demand.
DelayBreakdown transmission_delays(double demand_bits, double rate_bps,
                                   double fronthaul_capacity_bps,
                                   double fronthaul_length_m,
                                   double propagation_speed_mps);

double end_to_end_delay_ms(const DelayBreakdown& b);

/// Delay budget satisfaction: 1 iff delay <= budget (inclusive).
int satisfied(double delay_ms, double budget_ms);

/// Share of allocated CPEs meeting the budget; defined as 1 for an empty
/// service so disabled slices do not poison averages.
double slice_satisfaction(const std::vector<std::pair<int, int>>& y_xi, int v_k);

/// RB utilization ratio allocated/budget; budget 0 with allocation is an
/// invariant violation.
double rb_utilization(int allocated_rb, int budget_rb);

/// Truncated-Gaussian per-tick demand generator, deterministic under a
/// fixed seed. The diurnal multiplier reshapes the mean across the day.
class TrafficGenerator {
public:
    TrafficGenerator(const Scenario& scenario, Rng rng);

    /// Demand in bits for each CPE for a one-second tick at sim time t.
    const std::vector<double>& generate(double sim_time_s);

    double diurnal_multiplier(double sim_time_s) const;

private:
    const Scenario& scn_;
    Rng rng_;
    std::vector<double> demand_bits_;
};

} // namespace fwa::traffic
