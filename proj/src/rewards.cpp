#include "fwa/rewards.hpp"

#include "fwa/common.hpp"
#include "fwa/radio_link.hpp"

#include <cmath>

namespace fwa::rewards {

RewardBreakdown reward_loop2(const std::vector<OduWindowSample>& window, const PenaltyConfig& p) {
    RewardBreakdown out;
    if (window.empty()) return out;
    for (const auto& sample : window) {
        double util_sum = 0.0;
        double dup = 0.0;
        long long allocated = 0;
        long long nu_sum = 0;
        for (const auto& sl : sample.slices) {
            util_sum += sl.x * sl.util;
            dup += 1.0 - static_cast<double>(sl.assigned_odus);
            allocated += static_cast<long long>(sl.x) * sl.slice_beta;
            nu_sum += sl.nu;
        }
        double slack = static_cast<double>(sample.odu_budget - allocated);
        out.satisfaction_term += util_sum;
        out.duplication_term += p.delta_d * dup;
        out.rb_slack_term += p.delta_beta * (slack + static_cast<double>(nu_sum));
    }
    double n = static_cast<double>(window.size());
    out.satisfaction_term /= n;
    out.duplication_term /= n;
    out.rb_slack_term /= n;
    out.value = out.satisfaction_term + out.duplication_term + out.rb_slack_term;
    return out;
}

RewardBreakdown reward_loop1(const std::vector<OduWindowSample>& window, const PenaltyConfig& p) {
    RewardBreakdown out;
    if (window.empty()) return out;
    for (const auto& sample : window) {
        double phi_sum = 0.0;
        double load = 0.0;
        double multi = 0.0;
        long long nu_sum = 0;
        for (const auto& sl : sample.slices) {
            phi_sum += sl.phi;
            load += sl.granted_load_bps;
            multi += -static_cast<double>(sl.double_booked_cells);
            nu_sum += sl.nu;
        }
        double slack_frac = sample.fronthaul_capacity_bps > 0.0
                                ? (sample.fronthaul_capacity_bps - load) / sample.fronthaul_capacity_bps
                                : 0.0;
        out.satisfaction_term += phi_sum;
        out.fronthaul_term += p.delta_m * slack_frac;
        out.multi_grant_term += p.delta_v * multi;
        out.nu_term += p.delta_z * static_cast<double>(nu_sum);
    }
    double n = static_cast<double>(window.size());
    out.satisfaction_term /= n;
    out.fronthaul_term /= n;
    out.multi_grant_term /= n;
    out.nu_term /= n;
    out.value = out.satisfaction_term + out.fronthaul_term + out.multi_grant_term + out.nu_term;
    return out;
}

double reward_combined(double r_sd, double r_sc, double phi_dis) {
    FWA_CHECK(phi_dis >= 0.0 && phi_dis <= 1.0, "phi_dis must be in [0,1]");
    return phi_dis * r_sd + (1.0 - phi_dis) * r_sc;
}

double joint_objective(double energy_cost_usd, double mean_allocated_rb,
                       double rb_to_mbps, double zeta_c_per_mbps) {
    return energy_cost_usd - zeta_c_per_mbps * mean_allocated_rb * rb_to_mbps;
}

double rb_reference_mbps(const RadioParams& radio) {
    double bandwidth_hz = 12.0 * radio.subcarrier_spacing_hz;
    return bandwidth_hz * std::log2(1.0 + radio.reference_snr) / 1e6;
}

} // namespace fwa::rewards
