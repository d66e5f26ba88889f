#include "fwa/traffic_delay.hpp"

#include "fwa/common.hpp"

#include <algorithm>
#include <cmath>

namespace fwa::traffic {

double queueing_delay_ms(const SliceQueue& q) {
    FWA_CHECK(q.arrival_rate >= 0.0 && q.service_rate >= 0.0, "queue rates must be nonnegative");
    if (q.service_rate <= q.arrival_rate)
        throw InvariantError("queue overload: service rate <= arrival rate (slice " +
                             std::to_string(q.slice_id) + ")");
    return 1000.0 / (q.service_rate - q.arrival_rate);
}

double queue_status(const SliceQueue& q) {
    return std::max(q.buffer_cap - q.expected_arrivals, q.buffer_threshold);
}

DelayBreakdown transmission_delays(double demand_bits, double rate_bps,
                                   double fronthaul_capacity_bps,
                                   double fronthaul_length_m,
                                   double propagation_speed_mps) {
    DelayBreakdown b;
    if (demand_bits > 0.0) {
        if (rate_bps <= 0.0) throw InvariantError("zero wireless rate with pending demand");
        if (fronthaul_capacity_bps <= 0.0) throw InvariantError("zero fronthaul capacity with pending demand");
        b.wireless_tx_ms = 1000.0 * demand_bits / rate_bps;
        b.fronthaul_tx_ms = 1000.0 * demand_bits / fronthaul_capacity_bps;
    }
    FWA_CHECK(propagation_speed_mps > 0.0, "propagation speed must be positive");
    b.fronthaul_prop_ms = 1000.0 * fronthaul_length_m / propagation_speed_mps;
    return b;
}

double end_to_end_delay_ms(const DelayBreakdown& b) {
    return b.total_ms();
}

int satisfied(double delay_ms, double budget_ms) {
    return delay_ms <= budget_ms ? 1 : 0;
}

double slice_satisfaction(const std::vector<std::pair<int, int>>& y_xi, int v_k) {
    if (v_k == 0) return 1.0;
    FWA_CHECK(v_k > 0, "CPE count must be nonnegative");
    double sum = 0.0;
    for (const auto& [y, xi] : y_xi) sum += static_cast<double>(y) * static_cast<double>(xi);
    return sum / static_cast<double>(v_k);
}

double rb_utilization(int allocated_rb, int budget_rb) {
    if (budget_rb == 0) {
        if (allocated_rb != 0)
            throw InvariantError("RBs allocated against a zero budget");
        return 0.0;
    }
    FWA_CHECK(budget_rb > 0, "negative RB budget");
    return static_cast<double>(allocated_rb) / static_cast<double>(budget_rb);
}

TrafficGenerator::TrafficGenerator(const Scenario& scenario, Rng rng)
    : scn_(scenario), rng_(rng), demand_bits_(scenario.cpes.size(), 0.0) {}

double TrafficGenerator::diurnal_multiplier(double sim_time_s) const {
    if (!scn_.traffic.diurnal) return 1.0;
    double h = std::fmod(sim_time_s / 3600.0, 24.0);
    // Smooth mid-day bump between 06:00 and 24:00, peaking around 15:00.
    double lo = scn_.traffic.diurnal_min;
    double hi = scn_.traffic.diurnal_max;
    double phase = (h - 6.0) / 18.0;
    double bump = phase > 0.0 && phase < 1.0 ? std::sin(M_PI * phase) : 0.0;
    return lo + (hi - lo) * bump;
}

const std::vector<double>& TrafficGenerator::generate(double sim_time_s) {
    double mult = diurnal_multiplier(sim_time_s);
    for (std::size_t v = 0; v < scn_.cpes.size(); ++v) {
        const Service& sv = scn_.services[static_cast<std::size_t>(scn_.cpes[v].service_id)];
        double mean = sv.mean_demand_mbps * mult;
        double mbps = 0.0;
        if (mean > 0.0) {
            double sd = sv.demand_cv * mean;
            mbps = rng_.normal(mean, sd);
            mbps = std::clamp(mbps, 0.0, sv.demand_cap_mbps);
        } else {
            rng_.normal(); // keep the stream position independent of the mean
        }
        demand_bits_[v] = mbps * 1e6; // one-second tick
    }
    return demand_bits_;
}

} // namespace fwa::traffic
