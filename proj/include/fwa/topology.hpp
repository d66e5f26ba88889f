#pragma once

#include "fwa/config.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fwa {

/// One service class, mapped one-to-one onto a network slice.
struct Service {
    int id = 0;              // index into the service set; slice id equals it
    int fiveqi = 0;          // 5QI code
    double delay_budget_ms = 0.0;
    int slice_id = 0;
    // Traffic profile (per CPE of this service).
    double mean_demand_mbps = 0.0;
    double demand_cv = 0.15;       // coefficient of variation of per-tick demand
    double demand_cap_mbps = 0.0;  // truncation bound; 0 -> 3x mean
    int cpe_count = 0;
};

/// Customer premises equipment: one rooftop terminal per house, pinned to
/// its nearest radio unit for the whole run (no handover).
struct Cpe {
    int id = 0;
    int oru_id = 0;
    int service_id = 0;
    double distance_m = 0.0;
    double tx_power_w = 1.0;
};

struct Oru {
    int id = 0;
    int odu_id = 0;
    double x_m = 0.0;
    double y_m = 0.0;
};

struct Odu {
    int id = 0;
    int server_id = 0;
    std::vector<int> oru_ids;
    int rb_budget = 0;                   // beta_d
    double fronthaul_capacity_bps = 0.0; // per O-RU link
    double fronthaul_length_m = 0.0;
};

struct ServerSpec {
    int id = 0;
    double base_power_w = 0.0;
    std::vector<double> instance_power_w; // one entry per hosted virtual instance
};

struct Prices {
    double zeta_c_per_mbps = 6.0;  // RB (communication) selling price
    double zeta_e_buy = 0.073;     // grid energy price, $/kWh
    double zeta_e_sell = 0.070;    // surplus selling price, $/kWh
};

struct EnergyLimits {
    double h_max_kw = 5.0;        // max grid draw per tick
    double g_max_kw = 5.0;        // max renewable draw per tick
    double phi_plus_max_kwh = 5.0;  // storage capacity / max charge
    double phi_minus_max_kwh = 3.0; // max discharge per tick
};

struct RadioParams {
    int numerology_i = 3;
    double subcarrier_spacing_hz = 120e3;
    // Resource-block sizing inputs (single component carrier by default).
    std::vector<double> layers;     // per carrier
    std::vector<double> mod_order;  // bits per symbol, per carrier
    std::vector<double> scaling;    // per carrier, in (0,1]
    std::vector<double> overhead;   // per carrier, in [0,1)
    double r_max = 948.0 / 1024.0;
    // Link-budget inputs.
    double noise_power_w = 1e-13;
    double pathloss_exp = 2.0;
    double channel_error_var = 0.0; // variance of the complex CSI error
    double reference_snr = 1e5;     // used to convert RBs to Mbps for pricing
    double packet_bits = 12000.0;
    double propagation_mps = 2e8;
};

struct LoopParams {
    double loop1_period_ms = 5.0;
    double loop2_period_ms = 100.0;
    double energy_tick_s = 3600.0;
    // Buffer geometry; per-slice buffers are derived from traffic when the
    // explicit arrays are empty.
    std::vector<double> buffer_cap_pkts;       // B~ per slice
    std::vector<double> buffer_threshold_pkts; // B per slice
    double ewma_alpha = 0.3;     // per-second arrivals EWMA rate
    double fill_target = 0.8;    // slice utilization measured against this fill
    double lambda_zero_eps = 0.5; // EWMA below this counts as "no demand"
};

struct TrafficParams {
    bool diurnal = true;
    double diurnal_min = 0.8;
    double diurnal_max = 1.2;
};

struct SolarParams {
    double peak_kw = 2.0;
    double sunrise_h = 6.5;
    double sunset_h = 21.0;
    std::string trace_csv; // optional: replaces the synthetic profile
};

struct EnergyParams {
    EnergyLimits limits;
    SolarParams solar;
    double storage_init_kwh = 0.0;
    double reserve_frac = 0.6;           // greedy policy keeps this fraction charged
    double server_service_rate_pps = 20000.0; // per-CPE service rate at the server
};

struct RlParams {
    double gamma = 0.99;
    double lr = 1e-3;
    int n_step = 3;
    int batch_size = 32;
    int replay_capacity = 50000;
    int replay_warmup = 500;
    double priority_alpha = 0.6;
    double is_beta_start = 0.4;
    double is_beta_end = 1.0;
    double eps_start = 1.0;
    double eps_end = 0.05;
    double eps_anneal_frac = 0.5;
    int target_sync = 500;
    double grad_clip = 10.0;
    std::vector<int> hidden = {64, 64};
};

struct PenaltyConfig {
    double delta_d = 1.0;
    double delta_beta = 0.005;
    double delta_m = 0.1;
    double delta_v = 1.0;
    double delta_z = 0.005;
    double phi_dis = 0.5;
};

struct TwinParams {
    int chunk_records = 60;
    int window = 60;
    int hidden = 128;
    int initial_epochs = 250;
    int update_epochs = 5;
    double lr = 1e-2;
    int warmup_chunks = 4;
    int history_cap = 600;       // sliding training window, in records
    double cycles_per_bit = 100.0;       // Lambda
    double mec_cycles_per_bit = 100.0;   // Lambda_mec
    double cpu_hz = 2e9;                 // f (PT side)
    double mec_cpu_hz = 3e9;             // f_mec
    double mec_iterations = 250.0;       // iota_mec
    double p_pl = 1e-27;                 // effective switched-capacitance coefficient
    double transfer_window_s = 1.0;      // t_second
    double zeta_bw = 1e-9;               // bandwidth price, $/bps
    bool w_mec = true;                   // DT enabled policy flag
    bool feedback = false;               // forecasts steer loops / energy policy
    int bits_per_value = 64;
};

/// Immutable description of the whole world; safe to share across threads
/// once loaded.
struct Scenario {
    std::vector<Service> services;
    std::vector<Cpe> cpes;
    std::vector<Oru> orus;
    std::vector<Odu> odus;
    std::vector<ServerSpec> servers;
    int ocu_count = 2; // recorded but carries no behavior

    int total_rb = 273;
    std::vector<int> slice_to_odu; // slice -> O-DU index

    Prices prices;
    RadioParams radio;
    LoopParams loops;
    TrafficParams traffic;
    EnergyParams energy;
    RlParams rl;
    PenaltyConfig penalties;
    TwinParams twin;

    std::uint64_t rng_seed = 42;
    std::string config_hash; // FNV-1a of the source document

    int slice_count() const { return static_cast<int>(services.size()); }
    int odu_count() const { return static_cast<int>(odus.size()); }
    int cpe_count() const { return static_cast<int>(cpes.size()); }
};

namespace topology {

/// Parses and validates a scenario file; throws ConfigError naming the
/// offending field on any invariant violation.
Scenario load_scenario(const std::string& path);
Scenario scenario_from_config(const ConfigDoc& doc, const std::string& raw_text);

/// Cyclic slice placement: slice c lands on O-DU (c mod D).
std::vector<int> assign_slices_round_robin(int slice_count, int odu_count);

struct RbSplit {
    std::vector<int> per_odu; // floor(beta / D) each
    int pool = 0;             // remainder retained by the Near-RT RIC
};

RbSplit initial_rb_split(int total_rb, int odu_count);

/// Serializes back to the config format; parse(serialize(s)) == s.
std::string serialize(const Scenario& s);

void validate(const Scenario& s);

std::string fnv1a_hex(const std::string& bytes);

} // namespace topology
} // namespace fwa
