#pragma once

#include "fwa/topology.hpp"

#include <vector>

namespace fwa::rewards {

/// Per-slice statistics for one ultra-small timescale sample inside a
/// reward window.
struct SliceWindowStat {
    int assigned_odus = 1;     // number of O-DUs hosting the slice (1 normally)
    int x = 1;                 // slice->O-DU allocation indicator
    double util = 0.0;         // utilization ratio of the slice's RBs
    double phi = 1.0;          // slice requirement satisfaction
    int slice_beta = 0;        // beta^{c,k}_d
    long long nu = 0;          // loop feedback
    double granted_load_bps = 0.0;
    int granted_cpes = 0;
    int double_booked_cells = 0;
};

struct OduWindowSample {
    int odu_budget = 0;              // beta_d for this sample
    double fronthaul_capacity_bps = 0.0;
    std::vector<SliceWindowStat> slices;
};

struct RewardBreakdown {
    double value = 0.0;
    double satisfaction_term = 0.0;
    double duplication_term = 0.0;
    double rb_slack_term = 0.0;
    double fronthaul_term = 0.0;
    double multi_grant_term = 0.0;
    double nu_term = 0.0;
};

/// Loop-2 reward: mean over the window of utilization plus the duplication
/// and RB-slack penalty terms. nu is zero before the first feedback.
RewardBreakdown reward_loop2(const std::vector<OduWindowSample>& window, const PenaltyConfig& p);

/// Loop-1 reward: mean satisfaction plus fronthaul-slack, multi-grant and
/// nu penalty terms. The fronthaul slack is expressed as a fraction of the
/// link capacity so the term is dimensionless.
RewardBreakdown reward_loop1(const std::vector<OduWindowSample>& window, const PenaltyConfig& p);

/// r_s = phi_dis * r_sd + (1 - phi_dis) * r_sc, exactly.
double reward_combined(double r_sd, double r_sc, double phi_dis);

/// Objective of the joint energy/communication problem for one energy tick:
/// H(t) minus the priced mean RB allocation. RBs convert to Mbps through
/// the per-RB rate at the reference SNR.
double joint_objective(double energy_cost_usd, double mean_allocated_rb,
                       double rb_to_mbps, double zeta_c_per_mbps);

/// Per-RB reference rate in Mbps used by the pricing conversion.
double rb_reference_mbps(const RadioParams& radio);

struct RewardSample {
    double window_start_s = 0.0;
    double r_sd = 0.0;
    double r_sc = 0.0;
    double r_s = 0.0;
    RewardBreakdown loop2_terms;
    RewardBreakdown loop1_terms;
};

} // namespace fwa::rewards
