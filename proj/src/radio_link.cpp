#include "fwa/radio_link.hpp"

#include "fwa/common.hpp"
#include "fwa/rng.hpp"

#include <cmath>

namespace fwa::radio {

double symbol_duration_s(int numerology_i) {
    FWA_CHECK(numerology_i >= 0, "numerology must be >= 0");
    return 1e-3 / (14.0 * std::pow(2.0, numerology_i));
}

RbRequirement required_rb(double demand_mbps, const RbSizingParams& params) {
    FWA_CHECK(demand_mbps >= 0.0, "demand must be nonnegative");
    double denom = 0.0;
    for (std::size_t j = 0; j < params.layers.size(); ++j) {
        denom += params.layers[j] * params.mod_order[j] * params.scaling[j] * 12.0 *
                 params.r_max * (1.0 - params.overhead[j]);
    }
    if (denom <= 0.0) throw InvariantError("RB sizing denominator is zero (degenerate carrier params)");
    RbRequirement req;
    req.fractional = 1e6 * demand_mbps * symbol_duration_s(params.numerology_i) / denom;
    req.granted = static_cast<int>(std::ceil(req.fractional - 1e-12));
    if (req.granted < 0) req.granted = 0;
    return req;
}

double snr(int grant_flag, const ChannelSample& ch, double tx_power_w, double distance_m) {
    if (grant_flag == 0) return 0.0;
    FWA_CHECK(distance_m > 0.0, "distance must be positive");
    FWA_CHECK(ch.noise_power_w > 0.0, "noise power must be positive");
    std::complex<double> h = ch.h_est + ch.h_err;
    double gain = std::norm(h);
    return gain * tx_power_w / (ch.noise_power_w * std::pow(distance_m, ch.pathloss_exp));
}

double achievable_rate(const RbGrant& grant, double delta) {
    if (grant.y == 0) return 0.0;
    return grant.n_rb * grant.bandwidth_hz_per_rb * std::log2(1.0 + delta);
}

bool verify_grant_supports_demand(double demand_bps, const RbGrant& grant, double delta) {
    return achievable_rate(grant, delta) >= demand_bps;
}

RbPartition partition_rb(int n_rb, int numerology_i) {
    FWA_CHECK(n_rb >= 0, "RB count must be nonnegative");
    FWA_CHECK(numerology_i >= 0, "numerology must be >= 0");
    RbPartition p;
    p.subbands = n_rb;
    p.ttis = 14 * (1 << numerology_i);
    return p;
}

std::complex<double> sample_channel_error(double variance, Rng& rng) {
    if (variance <= 0.0) return {0.0, 0.0};
    double sd = std::sqrt(variance / 2.0);
    return {rng.normal(0.0, sd), rng.normal(0.0, sd)};
}

} // namespace fwa::radio
