#pragma once

#include "fwa/closed_loops.hpp"
#include "fwa/csv.hpp"
#include "fwa/digital_twin.hpp"
#include "fwa/energy_model.hpp"
#include "fwa/radio_link.hpp"
#include "fwa/rewards.hpp"
#include "fwa/rng.hpp"
#include "fwa/topology.hpp"
#include "fwa/traffic_delay.hpp"

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace fwa::sim {

/// Simulated-time bookkeeping. Loop-1 and loop-2 run at their nominal
/// periods; traffic is integrated in one-second batches, so the decision
/// points inside a second see the same batch.
struct Clock {
    double loop1_period_ms = 5.0;
    double loop2_period_ms = 100.0;
    double energy_tick_s = 3600.0;
    long long second = 0;

    double time_s() const { return static_cast<double>(second); }
    long long loop2_period_index() const {
        return static_cast<long long>(std::llround(time_s() * 1000.0 / loop2_period_ms));
    }
};

struct SliceRuntime {
    int slice_id = 0;
    int odu_id = 0;
    int beta = 0;            // current slice RB budget
    int initial_beta = 0;    // equal-split seed share
    bool stopped = false;
    double ewma_lambda_pkts = 0.0; // E[lambda] per loop-2 window, includes backlog
    double phi = 1.0;
    double fill_util = 0.0;  // utilization against the fill target
    double eq17_util = 0.0;  // allocated/budget at the O-DU, Eq.-style ratio
    long long nu = 0;
    double omega = 1.0;
    loops::Action action1 = loops::Action::Keep;
    loops::Action action2 = loops::Action::Keep;
    int granted_rb = 0;
    int granted_cpes = 0;
    int rejected_cpes = 0;
    double demand_bps = 0.0;
    double offered_bps = 0.0;
    double served_bps = 0.0;
    double granted_bps = 0.0;
};

struct OduRuntime {
    int odu_id = 0;
    int beta_d = 0;        // dynamic budget distributed by loop 2
    int initial_beta_d = 0;
    bool enabled = true;
};

struct RunMetrics {
    // Per-second per-slice series (retained when keep_series is set).
    std::vector<std::vector<double>> phi;
    std::vector<std::vector<double>> served_mbps;
    std::vector<std::vector<double>> demand_mbps;
    std::vector<std::vector<double>> slice_beta;
    std::vector<std::vector<double>> eq17_util;
    std::vector<rewards::RewardSample> reward_samples;
    std::vector<energy::EnergyTick> energy_ticks;
    std::vector<double> hourly_objective;
    std::vector<double> hourly_mean_beta;
    long long seconds = 0;
    long long safety_checks = 0;
    long long rejected_events = 0;
    double total_allocated_rb_seconds = 0.0;
};

struct SliceReport {
    int slice_id = 0;
    double mean_phi = 0.0;
    double mean_util = 0.0;
    double peak_throughput_mbps = 0.0;
    double mean_beta = 0.0;
};

struct Report {
    std::vector<SliceReport> slices;
    double bought_kwh = 0.0;
    double sold_kwh = 0.0;
    double total_cost_usd = 0.0;
    double total_objective_usd = 0.0;
    long long seconds = 0;
};

Report make_report(const RunMetrics& m);

/// Policy override hooks; returning nullopt falls back to the rule engine.
struct PolicyHooks {
    std::function<std::optional<loops::Action>(int slice, const loops::Loop1Inputs&,
                                               const std::array<double, 3>& state)> loop1;
    std::function<std::optional<loops::Action>(int slice, const std::array<double, 3>& state)> loop2;
};

struct EngineOptions {
    std::string out_dir;            // empty: no CSV output
    bool keep_series = true;
    bool validate_every_tick = true; // otherwise samples 1% of ticks
    bool twin_enabled = true;
    bool use_sca_for_z = false;     // z from the SCA solver instead of greedy
    PolicyHooks hooks;
};

/// The discrete-time engine binding traffic, radio, loops, energy and twin.
/// Deterministic under a fixed seed with the rule controller.
class Engine {
public:
    Engine(const Scenario& scn, std::uint64_t seed, EngineOptions opt);
    ~Engine();

    void step_second();
    void run_hours(double hours);

    const RunMetrics& metrics() const { return metrics_; }
    const Scenario& scenario() const { return scn_; }
    const Clock& clock() const { return clock_; }
    const energy::EnergyLedger& ledger() const { return ledger_; }
    const twin::TwinRuntime* twin_runtime() const { return twin_ ? twin_.get() : nullptr; }

    std::array<double, 3> loop2_state(int slice) const;
    std::array<double, 3> loop1_state(int slice) const;
    double last_r_s() const { return last_reward_.r_s; }
    double last_r_sc() const { return last_reward_.r_sc; }
    double last_r_sd() const { return last_reward_.r_sd; }

    const std::vector<SliceRuntime>& slices() const { return slices_; }
    const std::vector<OduRuntime>& odus() const { return odus_; }
    int pool_rb() const { return pool_rb_; }

    void flush_outputs();

private:
    struct CpeRuntime {
        double backlog_bits = 0.0;
        int last_granted_rb = 0;
    };

    void do_loop1_and_allocate();
    void do_loop2();
    void do_radio_and_delays();
    void do_energy_and_twin();
    void do_rewards_and_metrics();
    void validate_tick() const;
    void open_outputs();

    Scenario scn_;
    EngineOptions opt_;
    Clock clock_;
    Rng rng_;
    traffic::TrafficGenerator traffic_;
    energy::SolarProfile solar_;
    energy::EnergyLedger ledger_;
    std::unique_ptr<twin::TwinRuntime> twin_;

    std::vector<SliceRuntime> slices_;
    std::vector<OduRuntime> odus_;
    std::vector<CpeRuntime> cpes_;
    std::vector<std::vector<int>> slice_cpes_; // slice -> CPE ids
    int pool_rb_ = 0;

    // Scratch state for the current second.
    std::vector<double> demand_bits_;
    std::vector<loops::AllocationResult> alloc_;
    std::vector<double> fronthaul_used_bps_; // per (oru, odu) flattened
    std::vector<int> server_enabled_odus_;
    double hour_energy_j_ = 0.0;
    double hour_beta_sum_ = 0.0;
    long long hour_seconds_ = 0;
    rewards::RewardSample last_reward_;
    double rb_ref_mbps_ = 0.0;

    CsvWriter metrics_csv_;
    CsvWriter energy_csv_;
    CsvWriter decisions_csv_;
    CsvWriter rewards_csv_;

    RunMetrics metrics_;
};

/// One-call runner used by the CLI and the acceptance suite.
RunMetrics run(const Scenario& scn, std::uint64_t seed, double duration_h, EngineOptions opt);

} // namespace fwa::sim
