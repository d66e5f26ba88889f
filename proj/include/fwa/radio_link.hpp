#pragma once

#include "fwa/topology.hpp"

#include <complex>
#include <cstdint>
#include <vector>

namespace fwa::radio {

/// Inputs to resource-block sizing (3GPP TS 38.306-style throughput form).
struct RbSizingParams {
    std::vector<double> layers;
    std::vector<double> mod_order;
    std::vector<double> scaling;
    std::vector<double> overhead;
    double r_max = 948.0 / 1024.0;
    int numerology_i = 0;

    static RbSizingParams from_radio(const RadioParams& r) {
        return RbSizingParams{r.layers, r.mod_order, r.scaling, r.overhead, r.r_max, r.numerology_i};
    }
};

struct ChannelSample {
    std::complex<double> h_est{1.0, 0.0};
    std::complex<double> h_err{0.0, 0.0};
    double noise_power_w = 1e-13;
    double pathloss_exp = 2.0;
};

/// A per-CPE grant: a set of (sub-band, TTI) cells inside one slice's share
/// of an O-DU's grid.
struct RbGrant {
    int cpe_id = 0;
    int slice_id = 0;
    int n_rb = 0;
    int y = 0; // allocation flag
    int subband_begin = 0; // contiguous sub-band range [begin, begin + n_rb)
    int tti_count = 0;
    double bandwidth_hz_per_rb = 0.0;
};

struct RbRequirement {
    double fractional = 0.0;
    int granted = 0; // ceil(fractional)
};

/// Average OFDM symbol duration for numerology i: 1 ms subframe split into
/// 14 * 2^i symbols.
double symbol_duration_s(int numerology_i);

/// Required RBs to carry demand_mbps; monotone nondecreasing in demand.
/// Throws on a degenerate (zero) denominator.
RbRequirement required_rb(double demand_mbps, const RbSizingParams& params);

/// Linear SNR at the CPE for an allocated RB; zero when the grant flag is 0.
double snr(int grant_flag, const ChannelSample& ch, double tx_power_w, double distance_m);

/// Shannon rate over the grant's RBs in bit/s; zero when y = 0.
double achievable_rate(const RbGrant& grant, double delta);

bool verify_grant_supports_demand(double demand_bps, const RbGrant& grant, double delta);

struct RbPartition {
    int subbands = 0; // one 12-subcarrier sub-band per RB
    int ttis = 0;     // 14 * 2^i per 1 ms subframe
};

RbPartition partition_rb(int n_rb, int numerology_i);

/// Draws a complex CSI error with the configured variance (zero stays zero).
std::complex<double> sample_channel_error(double variance, class Rng& rng);

} // namespace fwa::radio
