#include "fwa/digital_twin.hpp"

#include "fwa/common.hpp"
#include "fwa/csv.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fwa::twin {

void TwinLog::append(TwinRecord rec) {
    if (!records_.empty())
        FWA_CHECK(rec.timestamp_s > records_.back().timestamp_s,
                  "twin log timestamps must be strictly increasing");
    records_.push_back(std::move(rec));
}

long long TwinLog::total_bits(int bits_per_value) const {
    long long values = 0;
    for (const auto& r : records_) values += 1 + static_cast<long long>(r.beta_per_odu.size());
    return values * bits_per_value;
}

void TwinLog::save_csv(const std::string& path) const {
    std::size_t odus = records_.empty() ? 0 : records_.front().beta_per_odu.size();
    std::vector<std::string> header{"timestamp_s", "H_usd"};
    for (std::size_t d = 0; d < odus; ++d) header.push_back("beta_odu_" + std::to_string(d));
    CsvWriter w(path, header);
    for (const auto& r : records_) {
        w.field(r.timestamp_s).field(r.h_usd);
        for (double b : r.beta_per_odu) w.field(b);
        w.end_row();
    }
}

TwinLog TwinLog::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("twin log not found: " + path);
    TwinLog log;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (header) { header = false; continue; }
        std::istringstream ss(line);
        std::string cell;
        TwinRecord rec;
        int col = 0;
        while (std::getline(ss, cell, ',')) {
            double v = std::stod(cell);
            if (col == 0) rec.timestamp_s = v;
            else if (col == 1) rec.h_usd = v;
            else rec.beta_per_odu.push_back(v);
            ++col;
        }
        log.append(std::move(rec));
    }
    return log;
}

TransferCost transfer_cost(long long bits, const SyncCostParams& p) {
    TransferCost tc;
    double s = static_cast<double>(bits);
    tc.energy_j = s * p.p_pl * p.cycles_per_bit * p.cpu_hz * p.cpu_hz;
    tc.bandwidth_bps = p.transfer_window_s > 0.0 ? s / p.transfer_window_s : 0.0;
    return tc;
}

double desync_time_s(long long bits, const SyncCostParams& p) {
    FWA_CHECK(p.mec_cpu_hz > 0.0, "MEC CPU frequency must be positive");
    return static_cast<double>(bits) / p.mec_cpu_hz * p.mec_cycles_per_bit * p.mec_iterations;
}

double mec_energy_j(long long predicted_bits, const SyncCostParams& p) {
    double s = static_cast<double>(predicted_bits);
    return s * p.p_pl * p.mec_cycles_per_bit * p.mec_cpu_hz * p.mec_cpu_hz;
}

double dt_cost_usd(const TransferCost& transfer, double mec_energy_joules, double desync_s,
                   double zeta_e_buy, const SyncCostParams& p) {
    if (!p.w_mec) return 0.0;
    const double joules_per_kwh = 3.6e6;
    double energy_term = (transfer.energy_j + mec_energy_joules) * desync_s / joules_per_kwh;
    return zeta_e_buy * energy_term + p.zeta_bw * transfer.bandwidth_bps;
}

// --- ClForecaster ---

ClForecaster::ClForecaster(const TwinParams& params, Rng rng)
    : params_(params), rng_(rng) {}

double ClForecaster::norm(double v) const {
    double span = max_ - min_;
    if (span <= 0.0) span = 1.0;
    return (v - min_) / span;
}

double ClForecaster::denorm(double v) const {
    double span = max_ - min_;
    if (span <= 0.0) span = 1.0;
    return v * span + min_;
}

void ClForecaster::absorb(const std::vector<double>& values) {
    for (double v : values) {
        FWA_CHECK(std::isfinite(v), "non-finite value in forecaster input");
        if (history_.empty() && min_ == 0.0 && max_ == 1.0) {
            min_ = v;
            max_ = v + 1e-12;
        }
        min_ = std::min(min_, v);
        max_ = std::max(max_, v);
        history_.push_back(v);
        while (static_cast<int>(history_.size()) > params_.history_cap) history_.pop_front();
    }
}

void ClForecaster::train_epochs(int epochs) {
    int W = params_.window;
    int n_pairs = static_cast<int>(history_.size()) - W;
    if (n_pairs <= 0) return;
    std::vector<double> input(static_cast<std::size_t>(W));
    auto grads = net_.make_gradients();
    for (int e = 0; e < epochs; ++e) {
        for (int i = 0; i < n_pairs; ++i) {
            for (int k = 0; k < W; ++k)
                input[static_cast<std::size_t>(k)] = norm(history_[static_cast<std::size_t>(i + k)]);
            double target = norm(history_[static_cast<std::size_t>(i + W)]);
            rl::Mlp::Tape tape;
            auto out = net_.forward(input, tape);
            double err = out[0] - target;
            grads.zero();
            double dloss = err; // d/dout of 0.5*(out - target)^2
            net_.backward(tape, std::span<const double>(&dloss, 1), grads);
            net_.apply_sgd(grads, params_.lr, 5.0);
        }
    }
}

void ClForecaster::initial_train(const std::vector<double>& series) {
    FWA_CHECK(!initialized_, "forecaster is trained incrementally; no re-initialization");
    FWA_CHECK(static_cast<int>(series.size()) > params_.window,
              "initial training needs more data than one window");
    absorb(series);
    Rng net_rng = rng_.fork("init");
    net_ = rl::Mlp({params_.window, params_.hidden, 1}, net_rng);
    train_epochs(params_.initial_epochs);
    initialized_ = true;
}

double ClForecaster::evaluate_chunk(const std::vector<double>& chunk) const {
    FWA_CHECK(initialized_, "forecaster not initialized");
    auto preds = predict(static_cast<int>(chunk.size()));
    double mse = 0.0;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
        double d = preds[i] - chunk[i];
        mse += d * d;
    }
    return mse / static_cast<double>(chunk.size());
}

double ClForecaster::cl_update(const std::vector<double>& chunk) {
    FWA_CHECK(initialized_, "forecaster not initialized");
    for (double v : chunk) FWA_CHECK(std::isfinite(v), "non-finite value in chunk");
    double mse = evaluate_chunk(chunk); // prequential: evaluate before training
    absorb(chunk);
    train_epochs(params_.update_epochs);
    return mse;
}

std::vector<double> ClForecaster::predict(int horizon) const {
    FWA_CHECK(initialized_, "forecaster not initialized");
    int W = params_.window;
    FWA_CHECK(static_cast<int>(history_.size()) >= W, "not enough history for a window");
    std::vector<double> window_values(history_.end() - W, history_.end());
    return predict_from(window_values, horizon);
}

std::vector<double> ClForecaster::predict_from(const std::vector<double>& window_values,
                                               int horizon) const {
    FWA_CHECK(initialized_, "forecaster not initialized");
    int W = params_.window;
    FWA_CHECK(static_cast<int>(window_values.size()) == W, "window size mismatch");
    std::vector<double> rolling(window_values);
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(horizon));
    std::vector<double> input(static_cast<std::size_t>(W));
    for (int h = 0; h < horizon; ++h) {
        for (int k = 0; k < W; ++k) input[static_cast<std::size_t>(k)] = norm(rolling[static_cast<std::size_t>(k)]);
        double pred = denorm(net_.forward(input)[0]);
        FWA_CHECK(std::isfinite(pred), "non-finite forecast");
        out.push_back(pred);
        rolling.erase(rolling.begin());
        rolling.push_back(pred);
    }
    return out;
}

// --- TwinRuntime ---

TwinRuntime::TwinRuntime(const Scenario& scenario, Rng rng)
    : scn_(scenario),
      zeta_e_buy_(scenario.prices.zeta_e_buy),
      h_model_(scenario.twin, rng.fork("h")) {
    for (int d = 0; d < scenario.odu_count(); ++d)
        beta_models_.emplace_back(scenario.twin, rng.fork("beta" + std::to_string(d)));
    beta_chunks_.resize(static_cast<std::size_t>(scenario.odu_count()));
    warmup_beta_.resize(static_cast<std::size_t>(scenario.odu_count()));
}

double TwinRuntime::prequential_mse() const {
    return preq_chunks_ > 0 ? preq_mse_sum_ / preq_chunks_ : 0.0;
}

void TwinRuntime::on_record(const TwinRecord& rec) {
    advance_to(rec.timestamp_s);
    log_.append(rec);
    h_chunk_.push_back(rec.h_usd);
    for (std::size_t d = 0; d < beta_chunks_.size(); ++d)
        beta_chunks_[d].push_back(d < rec.beta_per_odu.size() ? rec.beta_per_odu[d] : 0.0);

    if (static_cast<int>(h_chunk_.size()) < scn_.twin.chunk_records) return;

    // A chunk is complete.
    if (!h_model_.initialized()) {
        warmup_h_.insert(warmup_h_.end(), h_chunk_.begin(), h_chunk_.end());
        for (std::size_t d = 0; d < beta_chunks_.size(); ++d)
            warmup_beta_[d].insert(warmup_beta_[d].end(), beta_chunks_[d].begin(), beta_chunks_[d].end());
        warmup_chunks_seen_ += 1;
        if (warmup_chunks_seen_ >= scn_.twin.warmup_chunks && !sync_in_flight_) {
            sync_in_flight_ = true; // initial construction counts as a sync
            sync_start_s_ = rec.timestamp_s;
            desync_s_ = desync_time_s(log_.total_bits(scn_.twin.bits_per_value),
                                      SyncCostParams::from_twin(scn_.twin));
            activate_at_s_ = sync_start_s_ + desync_s_;
            syncs_ += 1;
            h_model_.initial_train(warmup_h_);
            for (std::size_t d = 0; d < beta_models_.size(); ++d)
                beta_models_[d].initial_train(warmup_beta_[d]);
            auto tc = transfer_cost(log_.total_bits(scn_.twin.bits_per_value),
                                    SyncCostParams::from_twin(scn_.twin));
            long long pred_bits = static_cast<long long>(scn_.twin.window) *
                                  (1 + scn_.odu_count()) * scn_.twin.bits_per_value;
            dt_cost_total_ += dt_cost_usd(tc, mec_energy_j(pred_bits, SyncCostParams::from_twin(scn_.twin)),
                                          desync_s_, zeta_e_buy_, SyncCostParams::from_twin(scn_.twin));
        }
    } else {
        queued_h_chunks_.push_back(h_chunk_);
        std::vector<std::vector<double>> betas;
        for (auto& bc : beta_chunks_) betas.push_back(bc);
        queued_beta_chunks_.push_back(std::move(betas));
        if (!sync_in_flight_) start_sync(rec.timestamp_s);
    }
    h_chunk_.clear();
    for (auto& bc : beta_chunks_) bc.clear();
}

void TwinRuntime::start_sync(double t) {
    if (queued_h_chunks_.empty()) return;
    sync_in_flight_ = true;
    sync_start_s_ = t;
    desync_s_ = desync_time_s(log_.total_bits(scn_.twin.bits_per_value),
                              SyncCostParams::from_twin(scn_.twin));
    activate_at_s_ = sync_start_s_ + desync_s_;
    syncs_ += 1;

    // Serve stale predictions (model and history) until activation.
    h_serving_ = h_model_;
    beta_serving_ = beta_models_;

    auto h_chunk = queued_h_chunks_.front();
    queued_h_chunks_.erase(queued_h_chunks_.begin());
    auto beta_chunk = queued_beta_chunks_.front();
    queued_beta_chunks_.erase(queued_beta_chunks_.begin());

    preq_mse_sum_ += h_model_.cl_update(h_chunk);
    preq_chunks_ += 1;
    for (std::size_t d = 0; d < beta_models_.size(); ++d) beta_models_[d].cl_update(beta_chunk[d]);

    auto params = SyncCostParams::from_twin(scn_.twin);
    auto tc = transfer_cost(log_.total_bits(scn_.twin.bits_per_value), params);
    long long pred_bits = static_cast<long long>(scn_.twin.window) *
                          (1 + scn_.odu_count()) * scn_.twin.bits_per_value;
    dt_cost_total_ += dt_cost_usd(tc, mec_energy_j(pred_bits, params), desync_s_, zeta_e_buy_, params);
}

void TwinRuntime::activate() {
    sync_in_flight_ = false;
    h_serving_.reset();
    beta_serving_.clear();
    if (h_model_.initialized()) {
        ForecastBundle fb;
        fb.issued_at_s = activate_at_s_;
        fb.h_pred = h_model_.predict(scn_.twin.window);
        for (auto& bm : beta_models_) fb.beta_pred.push_back(bm.predict(scn_.twin.window));
        forecast_ = std::move(fb);
    }
}

void TwinRuntime::advance_to(double t) {
    while (sync_in_flight_ && t >= activate_at_s_) {
        double done_at = activate_at_s_;
        activate();
        if (!queued_h_chunks_.empty()) start_sync(done_at);
    }
}

std::vector<double> TwinRuntime::predict_h(double t, int horizon) {
    advance_to(t);
    FWA_CHECK(model_ready(), "twin model not active yet at requested time");
    if (sync_in_flight_ && h_serving_.has_value())
        return h_serving_->predict(horizon);
    return h_model_.predict(horizon);
}

} // namespace fwa::twin
