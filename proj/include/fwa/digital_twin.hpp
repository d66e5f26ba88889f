#pragma once

#include "fwa/mlp.hpp"
#include "fwa/rng.hpp"
#include "fwa/topology.hpp"

#include <deque>
#include <optional>
#include <string>
#include <vector>

namespace fwa::twin {

struct TwinRecord {
    double timestamp_s = 0.0;
    double h_usd = 0.0;               // energy cost rate at the tick
    std::vector<double> beta_per_odu; // RB allocation snapshot
};

/// Append-only export of PT solution data; timestamps strictly increasing.
class TwinLog {
public:
    void append(TwinRecord rec);
    const std::vector<TwinRecord>& records() const { return records_; }
    std::size_t size() const { return records_.size(); }

    /// |H_{1:T}| + |beta_{1:T}| in bits.
    long long total_bits(int bits_per_value) const;

    void save_csv(const std::string& path) const;
    static TwinLog load_csv(const std::string& path);

private:
    std::vector<TwinRecord> records_;
};

struct SyncCostParams {
    double cpu_hz = 2e9;            // f
    double mec_cpu_hz = 3e9;        // f_mec
    double cycles_per_bit = 100.0;  // Lambda
    double mec_cycles_per_bit = 100.0; // Lambda_mec
    double mec_iterations = 250.0;  // iota_mec
    double p_pl = 1e-27;            // effective switched-capacitance coefficient
    double transfer_window_s = 1.0; // t_second
    double zeta_bw = 1e-9;          // bandwidth price, $/bps
    bool w_mec = true;

    static SyncCostParams from_twin(const TwinParams& t) {
        return {t.cpu_hz, t.mec_cpu_hz, t.cycles_per_bit, t.mec_cycles_per_bit,
                t.mec_iterations, t.p_pl, t.transfer_window_s, t.zeta_bw, t.w_mec};
    }
};

struct TransferCost {
    double energy_j = 0.0;     // L^p
    double bandwidth_bps = 0.0;
};

/// PT-side transfer energy and bandwidth for shipping `bits` of log data.
TransferCost transfer_cost(long long bits, const SyncCostParams& p);

/// De-synchronization time at the MEC server for `bits` of log data.
double desync_time_s(long long bits, const SyncCostParams& p);

/// MEC-side CPU energy for the predicted series of `predicted_bits`.
double mec_energy_j(long long predicted_bits, const SyncCostParams& p);

/// Objective of the DT construction/update cost decision; the J.s energy
/// term converts to kWh before pricing. Zero when the policy disables the
/// MEC twin.
double dt_cost_usd(const TransferCost& transfer, double mec_energy_joules, double desync_s,
                   double zeta_e_buy, const SyncCostParams& p);

/// Continual-learning forecaster: a dense window->1 regressor rolled
/// forward for multi-step prediction, trained incrementally on arriving
/// chunks and never reset (the continual-learning contract).
class ClForecaster {
public:
    ClForecaster(const TwinParams& params, Rng rng);

    bool initialized() const { return initialized_; }
    int window() const { return params_.window; }

    /// First fit: trains `initial_epochs` passes over the series.
    void initial_train(const std::vector<double>& series);

    /// Prequential update: returns the MSE of predicting the chunk from the
    /// preceding history BEFORE training on it, then runs the incremental
    /// pass. Requires initialization.
    double cl_update(const std::vector<double>& chunk);

    /// Rolls the one-step model forward `horizon` values from the last
    /// window of observed history. Throws when uninitialized.
    std::vector<double> predict(int horizon) const;
    std::vector<double> predict_from(const std::vector<double>& window_values, int horizon) const;

    /// Chunk MSE of a frozen copy (no training); used by comparisons.
    double evaluate_chunk(const std::vector<double>& chunk) const;

    const std::deque<double>& history() const { return history_; }

private:
    void absorb(const std::vector<double>& values);
    void train_epochs(int epochs);
    double norm(double v) const;
    double denorm(double v) const;

    TwinParams params_;
    Rng rng_;
    rl::Mlp net_;
    std::deque<double> history_;
    double min_ = 0.0, max_ = 1.0;
    bool initialized_ = false;
};

struct ForecastBundle {
    double issued_at_s = 0.0;
    std::vector<double> h_pred;
    std::vector<std::vector<double>> beta_pred; // per O-DU
};

/// In-simulation DT runtime: consumes completed 60-record chunks, trains in
/// simulated time, and publishes forecast bundles on activation. While a
/// sync is in flight (the de-synchronization window) predictions come from
/// a snapshot of the pre-sync model and its pre-sync history.
class TwinRuntime {
public:
    TwinRuntime(const Scenario& scenario, Rng rng);

    /// Appends a PT record and, on a completed chunk, queues a sync.
    void on_record(const TwinRecord& rec);

    /// Advances the training pipeline to sim time t (activates finished
    /// syncs, starts queued ones).
    void advance_to(double t);

    /// True once the initial construction has activated; during later
    /// syncs the stale snapshot keeps predictions available.
    bool model_ready() const {
        return h_model_.initialized() && (!sync_in_flight_ || h_serving_.has_value());
    }

    /// Predicts the next-horizon H series as seen at sim time t.
    std::vector<double> predict_h(double t, int horizon);

    const std::optional<ForecastBundle>& latest_forecast() const { return forecast_; }
    double last_sync_start_s() const { return sync_start_s_; }
    double last_desync_s() const { return desync_s_; }
    double prequential_mse() const;
    long long sync_count() const { return syncs_; }
    double total_dt_cost_usd() const { return dt_cost_total_; }
    const TwinLog& log() const { return log_; }

private:
    void start_sync(double t);
    void activate();

    const Scenario& scn_;
    double zeta_e_buy_;
    TwinLog log_;
    ClForecaster h_model_;
    std::vector<ClForecaster> beta_models_;
    std::optional<ClForecaster> h_serving_; // pre-sync snapshot during desync
    std::vector<ClForecaster> beta_serving_;
    std::vector<double> h_chunk_;
    std::vector<std::vector<double>> beta_chunks_;
    std::vector<std::vector<double>> queued_h_chunks_; // chunks waiting while a sync runs
    std::vector<std::vector<std::vector<double>>> queued_beta_chunks_;
    int warmup_chunks_seen_ = 0;
    std::vector<double> warmup_h_;
    std::vector<std::vector<double>> warmup_beta_;
    bool sync_in_flight_ = false;
    double sync_start_s_ = 0.0;
    double desync_s_ = 0.0;
    double activate_at_s_ = 0.0;
    double preq_mse_sum_ = 0.0;
    int preq_chunks_ = 0;
    long long syncs_ = 0;
    double dt_cost_total_ = 0.0;
    std::optional<ForecastBundle> forecast_;
};

} // namespace fwa::twin
