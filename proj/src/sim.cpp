#include "fwa/sim.hpp"

#include "fwa/common.hpp"
#include "fwa/sca.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace fwa::sim {

namespace {

// Applies a forced (RL-chosen) loop-2 action with the rule engine's omega
// conventions; the rule path goes through loops::loop2_decide instead.
loops::Loop2Decision apply_forced_loop2(loops::Action action, double omega_up, double omega_down,
                                        const loops::Loop2Inputs& in, int slice_id) {
    loops::Loop2Decision d;
    d.odu_id = in.odu_id;
    d.slice_id = slice_id;
    d.action = action;
    switch (action) {
        case loops::Action::Stop:
            d.new_beta = 0;
            break;
        case loops::Action::ScaleUp: {
            long long want = static_cast<long long>(std::ceil(omega_up * std::max(in.current_beta, 1)));
            long long cap = static_cast<long long>(in.current_beta) + in.odu_free_rb + in.ric_pool_rb;
            d.new_beta = static_cast<int>(std::max<long long>(std::min(want, cap), in.current_beta));
            d.pool_draw = std::max(0, d.new_beta - in.current_beta - in.odu_free_rb);
            break;
        }
        case loops::Action::ScaleDown:
            d.new_beta = std::min(static_cast<int>(std::ceil(omega_down * in.current_beta)), in.current_beta);
            break;
        case loops::Action::Keep:
            d.new_beta = in.current_beta;
            break;
    }
    return d;
}

} // namespace

Report make_report(const RunMetrics& m) {
    Report r;
    r.seconds = m.seconds;
    std::size_t slices = m.phi.size();
    for (std::size_t c = 0; c < slices; ++c) {
        SliceReport sr;
        sr.slice_id = static_cast<int>(c);
        const auto& phi = m.phi[c];
        const auto& thr = m.served_mbps[c];
        const auto& beta = m.slice_beta[c];
        const auto& util = m.eq17_util[c];
        double n = static_cast<double>(phi.size());
        for (std::size_t i = 0; i < phi.size(); ++i) {
            sr.mean_phi += phi[i];
            sr.mean_util += util[i];
            sr.mean_beta += beta[i];
            sr.peak_throughput_mbps = std::max(sr.peak_throughput_mbps, thr[i]);
        }
        if (n > 0) {
            sr.mean_phi /= n;
            sr.mean_util /= n;
            sr.mean_beta /= n;
        }
        r.slices.push_back(sr);
    }
    for (const auto& tick : m.energy_ticks) {
        r.bought_kwh += tick.grid_buy_kwh;
        r.sold_kwh += tick.sold_kwh;
        r.total_cost_usd += tick.cost_usd;
    }
    for (double obj : m.hourly_objective) r.total_objective_usd += obj;
    return r;
}

Engine::Engine(const Scenario& scn, std::uint64_t seed, EngineOptions opt)
    : scn_(scn),
      opt_(std::move(opt)),
      rng_(Rng(seed).fork("engine")),
      traffic_(scn_, Rng(seed).fork("traffic")),
      solar_(scn_.energy.solar),
      ledger_(scn_.energy, scn_.prices) {
    clock_.loop1_period_ms = scn_.loops.loop1_period_ms;
    clock_.loop2_period_ms = scn_.loops.loop2_period_ms;
    clock_.energy_tick_s = scn_.loops.energy_tick_s;

    rb_ref_mbps_ = rewards::rb_reference_mbps(scn_.radio);

    auto split = topology::initial_rb_split(scn_.total_rb, scn_.odu_count());
    pool_rb_ = split.pool;
    for (int d = 0; d < scn_.odu_count(); ++d) {
        OduRuntime od;
        od.odu_id = d;
        od.beta_d = split.per_odu[static_cast<std::size_t>(d)];
        od.initial_beta_d = od.beta_d;
        odus_.push_back(od);
    }

    // Equal split of each O-DU's budget among its slices.
    std::vector<std::vector<int>> odu_slices(static_cast<std::size_t>(scn_.odu_count()));
    for (int c = 0; c < scn_.slice_count(); ++c)
        odu_slices[static_cast<std::size_t>(scn_.slice_to_odu[static_cast<std::size_t>(c)])].push_back(c);

    slices_.resize(static_cast<std::size_t>(scn_.slice_count()));
    double window_s = scn_.loops.loop2_period_ms / 1000.0;
    for (int c = 0; c < scn_.slice_count(); ++c) {
        SliceRuntime& sl = slices_[static_cast<std::size_t>(c)];
        sl.slice_id = c;
        sl.odu_id = scn_.slice_to_odu[static_cast<std::size_t>(c)];
        int siblings = static_cast<int>(odu_slices[static_cast<std::size_t>(sl.odu_id)].size());
        sl.beta = odus_[static_cast<std::size_t>(sl.odu_id)].beta_d / std::max(siblings, 1);
        sl.initial_beta = sl.beta;
        const Service& sv = scn_.services[static_cast<std::size_t>(c)];
        sl.ewma_lambda_pkts = sv.cpe_count * sv.mean_demand_mbps * 1e6 * window_s / scn_.radio.packet_bits;
        sl.fill_util = 1.0;
        slices_[static_cast<std::size_t>(c)] = sl;
    }

    cpes_.resize(scn_.cpes.size());
    slice_cpes_.resize(static_cast<std::size_t>(scn_.slice_count()));
    for (const auto& cpe : scn_.cpes)
        slice_cpes_[static_cast<std::size_t>(cpe.service_id)].push_back(cpe.id);

    fronthaul_used_bps_.assign(scn_.orus.size() * scn_.odus.size(), 0.0);
    alloc_.resize(static_cast<std::size_t>(scn_.slice_count()));

    if (opt_.twin_enabled)
        twin_ = std::make_unique<twin::TwinRuntime>(scn_, Rng(seed).fork("twin"));

    if (opt_.keep_series) {
        metrics_.phi.resize(static_cast<std::size_t>(scn_.slice_count()));
        metrics_.served_mbps.resize(static_cast<std::size_t>(scn_.slice_count()));
        metrics_.demand_mbps.resize(static_cast<std::size_t>(scn_.slice_count()));
        metrics_.slice_beta.resize(static_cast<std::size_t>(scn_.slice_count()));
        metrics_.eq17_util.resize(static_cast<std::size_t>(scn_.slice_count()));
    }

    if (!opt_.out_dir.empty()) open_outputs();
}

Engine::~Engine() = default;

void Engine::open_outputs() {
    std::filesystem::create_directories(opt_.out_dir);
    metrics_csv_.open(opt_.out_dir + "/metrics.csv",
                      {"second", "slice", "odu", "beta", "granted_rb", "demand_mbps", "served_mbps",
                       "phi", "odu_util", "rejected_cpes", "backlog_mbits"});
    energy_csv_.open(opt_.out_dir + "/energy.csv",
                     {"hour", "z", "solar_kwh", "grid_buy_kwh", "charge_kwh", "discharge_kwh",
                      "sold_kwh", "surplus_kwh", "curtailed_kwh", "consumption_kwh", "available_kwh",
                      "storage_kwh", "cost_usd", "objective_usd"});
    decisions_csv_.open(opt_.out_dir + "/decisions.csv",
                        {"second", "period", "slice", "loop", "action", "omega", "nu",
                         "beta_before", "beta_after"});
    rewards_csv_.open(opt_.out_dir + "/rewards.csv",
                      {"second", "r_sd", "r_sc", "r_s", "util_term", "dup_term", "rb_slack_term",
                       "phi_term", "fronthaul_term", "multi_grant_term", "nu_term"});
}

std::array<double, 3> Engine::loop2_state(int slice) const {
    const SliceRuntime& sl = slices_[static_cast<std::size_t>(slice)];
    const OduRuntime& od = odus_[static_cast<std::size_t>(sl.odu_id)];
    int allocated = 0;
    for (const auto& other : slices_)
        if (other.odu_id == sl.odu_id) allocated += other.beta;
    double avail = od.beta_d > 0 ? static_cast<double>(od.beta_d - allocated) / od.beta_d : 0.0;
    int enabled_odus = 0;
    for (const auto& o : odus_)
        if (o.enabled) ++enabled_odus;
    int active_slices = 0;
    for (const auto& s : slices_)
        if (!s.stopped) ++active_slices;
    return {std::clamp(avail, 0.0, 1.0),
            static_cast<double>(enabled_odus) / static_cast<double>(odus_.size()),
            static_cast<double>(active_slices) / static_cast<double>(slices_.size())};
}

std::array<double, 3> Engine::loop1_state(int slice) const {
    const SliceRuntime& sl = slices_[static_cast<std::size_t>(slice)];
    const Service& sv = scn_.services[static_cast<std::size_t>(slice)];
    double v_frac = sv.cpe_count > 0 ? static_cast<double>(sl.granted_cpes) / sv.cpe_count : 0.0;
    double cap = scn_.loops.buffer_cap_pkts[static_cast<std::size_t>(slice)];
    double thr = scn_.loops.buffer_threshold_pkts[static_cast<std::size_t>(slice)];
    double omega_max = cap / thr;
    double psi = std::max(cap - sl.ewma_lambda_pkts, thr);
    return {std::clamp(v_frac, 0.0, 1.0),
            std::clamp(sl.omega / omega_max, 0.0, 1.0),
            std::clamp(psi / cap, 0.0, 1.0)};
}

void Engine::do_loop1_and_allocate() {
    std::fill(fronthaul_used_bps_.begin(), fronthaul_used_bps_.end(), 0.0);
    double window_s = scn_.loops.loop2_period_ms / 1000.0;
    double alpha = scn_.loops.ewma_alpha;

    for (int c = 0; c < scn_.slice_count(); ++c) {
        SliceRuntime& sl = slices_[static_cast<std::size_t>(c)];
        const Service& sv = scn_.services[static_cast<std::size_t>(c)];
        double cap = scn_.loops.buffer_cap_pkts[static_cast<std::size_t>(c)];
        double thr = scn_.loops.buffer_threshold_pkts[static_cast<std::size_t>(c)];

        // Offered load this second: fresh demand plus carried backlog.
        double offered_bits = 0.0;
        double demand_bits = 0.0;
        for (int v : slice_cpes_[static_cast<std::size_t>(c)]) {
            demand_bits += demand_bits_[static_cast<std::size_t>(v)];
            offered_bits += demand_bits_[static_cast<std::size_t>(v)] +
                            cpes_[static_cast<std::size_t>(v)].backlog_bits;
        }
        sl.demand_bps = demand_bits;
        sl.offered_bps = offered_bits;

        // Arrivals observed in the queue (backlog included) per loop-2 window.
        double arrivals_window = offered_bits / scn_.radio.packet_bits * window_s;
        sl.ewma_lambda_pkts = (1.0 - alpha) * sl.ewma_lambda_pkts + alpha * arrivals_window;
        double e_lambda = sl.ewma_lambda_pkts < scn_.loops.lambda_zero_eps ? 0.0 : sl.ewma_lambda_pkts;

        if (sl.stopped && e_lambda > 0.0) sl.stopped = false; // demand returned

        loops::Loop1Inputs in;
        in.cap = cap;
        in.threshold = thr;
        in.psi = std::max(cap - e_lambda, thr);
        in.phi = sl.phi;
        in.util = sl.fill_util;

        loops::Loop1Decision dec;
        std::optional<loops::Action> forced;
        if (opt_.hooks.loop1) forced = opt_.hooks.loop1(c, in, loop1_state(c));
        if (forced.has_value()) {
            dec.slice_id = c;
            dec.action = *forced;
            switch (*forced) {
                case loops::Action::ScaleUp: dec.omega = cap / thr; break;
                case loops::Action::ScaleDown: dec.omega = thr / cap; break;
                case loops::Action::Stop: dec.omega = 0.0; break;
                case loops::Action::Keep: dec.omega = 1.0; break;
            }
        } else {
            dec = loops::loop1_decide(c, in);
        }
        if (dec.action == loops::Action::Stop) sl.stopped = true;
        sl.action1 = dec.action;
        sl.omega = dec.omega;

        // Per-CPE RB requirements sized on the offered rate.
        std::vector<loops::CpeDemand> demands;
        demands.reserve(slice_cpes_[static_cast<std::size_t>(c)].size());
        auto sizing = radio::RbSizingParams::from_radio(scn_.radio);
        for (int v : slice_cpes_[static_cast<std::size_t>(c)]) {
            const Cpe& cpe = scn_.cpes[static_cast<std::size_t>(v)];
            double offered_v = demand_bits_[static_cast<std::size_t>(v)] +
                               cpes_[static_cast<std::size_t>(v)].backlog_bits;
            loops::CpeDemand d;
            d.cpe_id = v;
            d.oru_id = cpe.oru_id;
            d.demand_bps = offered_v;
            d.required_rb = offered_v > 0.0 ? radio::required_rb(offered_v / 1e6, sizing).granted : 0;
            demands.push_back(d);
        }

        // Headroom on each (O-RU -> this slice's O-DU) fronthaul link.
        const Odu& odu = scn_.odus[static_cast<std::size_t>(sl.odu_id)];
        std::vector<double> headroom(scn_.orus.size());
        for (std::size_t m = 0; m < scn_.orus.size(); ++m) {
            std::size_t key = m * scn_.odus.size() + static_cast<std::size_t>(sl.odu_id);
            headroom[m] = odu.fronthaul_capacity_bps - fronthaul_used_bps_[key];
        }

        int effective_budget = sl.stopped ? 0 : sl.beta;
        alloc_[static_cast<std::size_t>(c)] = loops::loop1_allocate(
            c, effective_budget, demands, dec.omega, dec.action, &headroom);

        for (std::size_t m = 0; m < scn_.orus.size(); ++m) {
            std::size_t key = m * scn_.odus.size() + static_cast<std::size_t>(sl.odu_id);
            fronthaul_used_bps_[key] = odu.fronthaul_capacity_bps - headroom[m];
        }

        const auto& res = alloc_[static_cast<std::size_t>(c)];
        sl.granted_rb = res.granted_rb;
        sl.granted_bps = res.granted_bps;
        sl.rejected_cpes = res.rejected_cpes;
        sl.nu = res.feedback.nu;
        metrics_.rejected_events += res.rejected_cpes;
    }
}

void Engine::do_radio_and_delays() {
    double loop1_s = scn_.loops.loop1_period_ms / 1000.0;
    double bandwidth_per_rb = 12.0 * scn_.radio.subcarrier_spacing_hz;

    for (int c = 0; c < scn_.slice_count(); ++c) {
        SliceRuntime& sl = slices_[static_cast<std::size_t>(c)];
        const Service& sv = scn_.services[static_cast<std::size_t>(c)];
        const Odu& odu = scn_.odus[static_cast<std::size_t>(sl.odu_id)];
        const auto& res = alloc_[static_cast<std::size_t>(c)];

        double served_bits = 0.0;
        int granted_cpes = 0;
        std::vector<std::pair<int, int>> y_xi;
        y_xi.reserve(res.grants.size());
        double backlog_cap_bits = scn_.loops.buffer_cap_pkts[static_cast<std::size_t>(c)] *
                                  scn_.radio.packet_bits /
                                  std::max(1, sv.cpe_count);

        for (std::size_t gi = 0; gi < res.grants.size(); ++gi) {
            const auto& grant = res.grants[gi];
            int v = grant.cpe_id;
            const Cpe& cpe = scn_.cpes[static_cast<std::size_t>(v)];
            CpeRuntime& crt = cpes_[static_cast<std::size_t>(v)];
            double offered = demand_bits_[static_cast<std::size_t>(v)] + crt.backlog_bits;
            crt.last_granted_rb = grant.granted_rb;

            if (grant.y == 1) {
                ++granted_cpes;
                radio::ChannelSample ch;
                ch.noise_power_w = scn_.radio.noise_power_w;
                ch.pathloss_exp = scn_.radio.pathloss_exp;
                if (scn_.radio.channel_error_var > 0.0)
                    ch.h_err = radio::sample_channel_error(scn_.radio.channel_error_var, rng_);
                double delta = radio::snr(1, ch, cpe.tx_power_w, cpe.distance_m);
                radio::RbGrant rg;
                rg.cpe_id = v;
                rg.slice_id = c;
                rg.n_rb = grant.granted_rb;
                rg.y = 1;
                rg.bandwidth_hz_per_rb = bandwidth_per_rb;
                double rate = radio::achievable_rate(rg, delta);

                double capacity_bits = rate; // over the one-second batch
                double served = std::min(offered, capacity_bits);
                served_bits += served;
                crt.backlog_bits = offered - served;

                int xi = 0;
                double lambda_pps = offered / scn_.radio.packet_bits;
                double mu_pps = rate / scn_.radio.packet_bits;
                if (mu_pps > lambda_pps) {
                    traffic::SliceQueue q;
                    q.slice_id = c;
                    q.arrival_rate = lambda_pps;
                    q.service_rate = mu_pps;
                    double queue_ms = traffic::queueing_delay_ms(q);
                    double chunk_bits = offered * loop1_s;
                    auto breakdown = traffic::transmission_delays(
                        chunk_bits, rate, odu.fronthaul_capacity_bps, odu.fronthaul_length_m,
                        scn_.radio.propagation_mps);
                    breakdown.queueing_ms = queue_ms;
                    xi = traffic::satisfied(traffic::end_to_end_delay_ms(breakdown), sv.delay_budget_ms);
                }
                y_xi.emplace_back(1, xi);
            } else {
                // Unserved data stays queued up to the per-CPE buffer share.
                crt.backlog_bits = std::min(offered, backlog_cap_bits);
                y_xi.emplace_back(0, 0);
            }
        }

        sl.served_bps = served_bits;
        sl.granted_cpes = granted_cpes;
        sl.phi = traffic::slice_satisfaction(y_xi, sv.cpe_count);

        if (sl.beta > 0) {
            double fill = scn_.loops.fill_target * sl.beta;
            sl.fill_util = fill > 0.0 ? std::min(1.0, sl.granted_rb / fill) : 1.0;
        } else {
            sl.fill_util = 1.0;
        }
    }

    // Eq.-style utilization is an O-DU-level ratio shared by its slices.
    for (auto& od : odus_) {
        int allocated = 0;
        for (const auto& sl : slices_)
            if (sl.odu_id == od.odu_id) allocated += sl.beta;
        double util = od.beta_d > 0 ? traffic::rb_utilization(allocated, od.beta_d) : 0.0;
        for (auto& sl : slices_)
            if (sl.odu_id == od.odu_id) sl.eq17_util = util;
    }
}

void Engine::do_loop2() {
    long long period = clock_.loop2_period_index();
    double eps = scn_.loops.lambda_zero_eps;

    // Forecast-driven preemptive stop: a zero RB forecast for the O-DU lets
    // loop 2 terminate one period before the feedback would.
    std::vector<bool> forecast_zero(odus_.size(), false);
    if (scn_.twin.feedback && twin_ && twin_->latest_forecast().has_value()) {
        const auto& fb = *twin_->latest_forecast();
        for (std::size_t d = 0; d < fb.beta_pred.size() && d < odus_.size(); ++d) {
            double mean = 0.0;
            for (double b : fb.beta_pred[d]) mean += b;
            if (!fb.beta_pred[d].empty()) mean /= static_cast<double>(fb.beta_pred[d].size());
            forecast_zero[d] = mean < 0.5;
        }
    }

    for (int c = 0; c < scn_.slice_count(); ++c) {
        SliceRuntime& sl = slices_[static_cast<std::size_t>(c)];
        OduRuntime& od = odus_[static_cast<std::size_t>(sl.odu_id)];
        const auto& res = alloc_[static_cast<std::size_t>(c)];

        int allocated = 0;
        for (const auto& other : slices_)
            if (other.odu_id == sl.odu_id) allocated += other.beta;

        loops::Loop2Inputs in;
        in.odu_id = sl.odu_id;
        in.current_beta = sl.beta;
        in.odu_free_rb = std::max(0, od.beta_d - allocated);
        in.ric_pool_rb = pool_rb_;
        in.odu_budget = od.beta_d;

        loops::Loop2Decision dec;
        std::optional<loops::Action> forced;
        if (opt_.hooks.loop2) forced = opt_.hooks.loop2(c, loop2_state(c));
        if (forecast_zero[static_cast<std::size_t>(sl.odu_id)]) forced = loops::Action::Stop;

        double cap = scn_.loops.buffer_cap_pkts[static_cast<std::size_t>(c)];
        double thr = scn_.loops.buffer_threshold_pkts[static_cast<std::size_t>(c)];
        if (forced.has_value()) {
            dec = apply_forced_loop2(*forced, cap / thr, thr / cap, in, c);
        } else {
            dec = loops::loop2_decide(res.feedback, in);
        }

        int before = sl.beta;
        sl.beta = dec.new_beta;
        sl.action2 = dec.action;
        if (dec.action == loops::Action::Stop) sl.stopped = true;
        if (dec.pool_draw > 0) {
            pool_rb_ -= dec.pool_draw;
            od.beta_d += dec.pool_draw;
        }

        // Re-enabling: a slice whose demand returned gets its initial share
        // back, bounded by what the O-DU and the pool can spare.
        if (!sl.stopped && sl.beta == 0 && sl.ewma_lambda_pkts > eps) {
            int allocated_now = 0;
            for (const auto& other : slices_)
                if (other.odu_id == sl.odu_id) allocated_now += other.beta;
            int free_now = std::max(0, od.beta_d - allocated_now);
            int seed = std::min(sl.initial_beta, free_now + pool_rb_);
            seed = std::max(seed, std::min(1, free_now + pool_rb_));
            int pool_part = std::max(0, seed - free_now);
            pool_rb_ -= pool_part;
            od.beta_d += pool_part;
            sl.beta = seed;
        }

        if (decisions_csv_.is_open()) {
            decisions_csv_.field(clock_.second)
                .field(period)
                .field(c)
                .field(std::int64_t{1})
                .field(loops::action_name(sl.action1))
                .field(sl.omega)
                .field(static_cast<std::int64_t>(sl.nu))
                .field(before)
                .field(before)
                .end_row();
            decisions_csv_.field(clock_.second)
                .field(period)
                .field(c)
                .field(std::int64_t{2})
                .field(loops::action_name(dec.action))
                .field(sl.omega)
                .field(static_cast<std::int64_t>(sl.nu))
                .field(before)
                .field(sl.beta)
                .end_row();
        }
    }

    // Return budget beyond the initial split to the RIC pool.
    for (auto& od : odus_) {
        int allocated = 0;
        for (const auto& sl : slices_)
            if (sl.odu_id == od.odu_id) allocated += sl.beta;
        int free = od.beta_d - allocated;
        int excess = std::min(free, od.beta_d - od.initial_beta_d);
        if (excess > 0) {
            od.beta_d -= excess;
            pool_rb_ += excess;
        }
    }

    // Disable O-RAN elements with no active slices.
    std::vector<loops::SliceActivity> activity;
    for (const auto& sl : slices_)
        activity.push_back({sl.slice_id, sl.odu_id, sl.stopped});
    std::vector<int> odu_to_server;
    for (const auto& o : scn_.odus) odu_to_server.push_back(o.server_id);
    auto disabled = loops::disable_unused(activity, odu_to_server, static_cast<int>(scn_.servers.size()));
    for (auto& od : odus_) od.enabled = true;
    for (int d : disabled.disabled_odus) odus_[static_cast<std::size_t>(d)].enabled = false;
    server_enabled_odus_.assign(scn_.servers.size(), 0);
    for (const auto& o : scn_.odus)
        if (odus_[static_cast<std::size_t>(o.id)].enabled)
            server_enabled_odus_[static_cast<std::size_t>(o.server_id)] += 1;
}

void Engine::do_energy_and_twin() {
    // Servers host their O-DUs as the leading instances plus the configured
    // auxiliaries; a disabled O-DU removes one instance.
    std::vector<energy::ServerPower> servers;
    std::vector<int> odus_hosted(scn_.servers.size(), 0);
    for (const auto& o : scn_.odus) odus_hosted[static_cast<std::size_t>(o.server_id)] += 1;
    for (std::size_t p = 0; p < scn_.servers.size(); ++p) {
        energy::ServerPower sp;
        sp.base_w = scn_.servers[p].base_power_w;
        int aux = std::max(0, static_cast<int>(scn_.servers[p].instance_power_w.size()) - 1);
        int hosted = odus_hosted[p];
        int enabled_odus = server_enabled_odus_.empty() ? hosted
                                                        : server_enabled_odus_[p];
        double odu_power = scn_.servers[p].instance_power_w.empty()
                               ? 0.0
                               : scn_.servers[p].instance_power_w.front();
        for (int i = 0; i < enabled_odus; ++i) sp.instance_w.push_back(odu_power);
        for (int i = 0; i < aux; ++i)
            sp.instance_w.push_back(scn_.servers[p].instance_power_w[static_cast<std::size_t>(i) + 1]);
        sp.enabled_instances = static_cast<int>(sp.instance_w.size());
        sp.enabled = hosted == 0 || enabled_odus > 0;
        servers.push_back(sp);
    }

    std::vector<energy::CpeLoad> loads;
    loads.reserve(scn_.cpes.size());
    for (const auto& cpe : scn_.cpes) {
        const SliceRuntime& sl = slices_[static_cast<std::size_t>(cpe.service_id)];
        energy::CpeLoad l;
        l.server_id = scn_.odus[static_cast<std::size_t>(sl.odu_id)].server_id;
        l.y = cpes_[static_cast<std::size_t>(cpe.id)].last_granted_rb > 0 ? 1 : 0;
        double offered = demand_bits_[static_cast<std::size_t>(cpe.id)];
        l.arrival_pps = offered / scn_.radio.packet_bits;
        l.service_pps = scn_.energy.server_service_rate_pps;
        loads.push_back(l);
    }
    double watts = energy::power_draw(servers, loads);
    hour_energy_j_ += watts; // one-second step
    int total_beta = 0;
    for (const auto& sl : slices_) total_beta += sl.beta;
    hour_beta_sum_ += total_beta;
    hour_seconds_ += 1;
    metrics_.total_allocated_rb_seconds += total_beta;

    // Twin export: cost rate of the last completed tick plus the RB snapshot.
    if (twin_) {
        twin::TwinRecord rec;
        rec.timestamp_s = clock_.time_s() + 1.0;
        rec.h_usd = ledger_.ticks().empty() ? 0.0 : ledger_.ticks().back().cost_usd;
        rec.beta_per_odu.resize(scn_.odus.size(), 0.0);
        for (const auto& sl : slices_)
            rec.beta_per_odu[static_cast<std::size_t>(sl.odu_id)] += sl.beta;
        twin_->on_record(rec);
    }

    long long next_second = clock_.second + 1;
    auto tick_s = static_cast<long long>(clock_.energy_tick_s);
    if (next_second % tick_s == 0) {
        double consumption = hour_energy_j_ / 3.6e6;
        double mid_s = static_cast<double>(next_second - tick_s) + clock_.energy_tick_s / 2.0;
        double solar_kw = solar_.kw_at(mid_s);
        double duration_h = clock_.energy_tick_s / 3600.0;
        double mean_beta = hour_seconds_ > 0 ? hour_beta_sum_ / static_cast<double>(hour_seconds_) : 0.0;
        double utility = scn_.prices.zeta_c_per_mbps * mean_beta * rb_ref_mbps_;

        energy::TickPlan plan;
        if (opt_.use_sca_for_z) {
            sca::Problem prob;
            auto plan0 = ledger_.plan_for(0, consumption, solar_kw, duration_h);
            auto plan1 = ledger_.plan_for(1, consumption, solar_kw, duration_h);
            double c0 = ledger_.cost_of(plan0, consumption, duration_h);
            double c1 = 0.0;
            bool z1_ok = true;
            std::string z1_msg;
            try {
                c1 = ledger_.cost_of(plan1, consumption, duration_h);
                energy::SupplyInputs si{plan1.solar_kw, plan1.grid_buy_kw, plan1.charge_kw,
                                        plan1.discharge_kw, 1, duration_h};
                if (energy::supply_kwh(si, scn_.energy.limits) + 1e-9 < consumption) {
                    z1_ok = false;
                    z1_msg = "consumption exceeds supply under discharge";
                }
            } catch (const std::exception& e) {
                z1_ok = false;
                z1_msg = e.what();
            }
            prob.objective = [&](double z) {
                return (1.0 - z) * c0 + z * (z1_ok ? c1 : c0 + 1e6) - utility;
            };
            prob.binary_infeasibility = [&](int z) -> std::optional<std::string> {
                if (z == 1 && !z1_ok) return z1_msg;
                return std::nullopt;
            };
            double z0 = static_cast<double>(ledger_.greedy_z(consumption, solar_kw, duration_h, std::nullopt));
            auto sol = sca::solve(z0, prob);
            plan = sol.z_binary == 1 ? plan1 : plan0;
        } else {
            std::optional<double> forecast;
            if (scn_.twin.feedback && twin_ && twin_->latest_forecast().has_value()) {
                const auto& f = twin_->latest_forecast()->h_pred;
                if (!f.empty()) {
                    double m = 0.0;
                    for (double v : f) m += v;
                    forecast = m / static_cast<double>(f.size());
                }
            }
            int z = ledger_.greedy_z(consumption, solar_kw, duration_h, forecast);
            plan = ledger_.plan_for(z, consumption, solar_kw, duration_h);
        }
        auto tick = ledger_.commit(plan, consumption, duration_h);
        FWA_CHECK(std::abs(ledger_.last_residual_kwh()) <= 1e-9, "energy ledger conservation violated");

        double objective = rewards::joint_objective(tick.cost_usd, mean_beta, rb_ref_mbps_,
                                                    scn_.prices.zeta_c_per_mbps);
        metrics_.energy_ticks.push_back(tick);
        metrics_.hourly_objective.push_back(objective);
        metrics_.hourly_mean_beta.push_back(mean_beta);

        if (energy_csv_.is_open()) {
            energy_csv_.field(tick.hour)
                .field(tick.z)
                .field(tick.solar_kwh)
                .field(tick.grid_buy_kwh)
                .field(tick.charge_kwh)
                .field(tick.discharge_kwh)
                .field(tick.sold_kwh)
                .field(tick.surplus_kwh)
                .field(tick.curtailed_kwh)
                .field(tick.consumption_kwh)
                .field(tick.available_kwh)
                .field(tick.storage_kwh)
                .field(tick.cost_usd)
                .field(objective)
                .end_row();
        }
        hour_energy_j_ = 0.0;
        hour_beta_sum_ = 0.0;
        hour_seconds_ = 0;
    }
}

void Engine::do_rewards_and_metrics() {
    // One sample per O-DU for this second's identical loop-2 periods.
    double r_sd_sum = 0.0, r_sc_sum = 0.0;
    rewards::RewardBreakdown sd_terms, sc_terms;
    int odu_n = 0;
    for (const auto& od : odus_) {
        rewards::OduWindowSample sample;
        sample.odu_budget = od.beta_d;
        sample.fronthaul_capacity_bps = scn_.odus[static_cast<std::size_t>(od.odu_id)].fronthaul_capacity_bps;
        for (const auto& sl : slices_) {
            if (sl.odu_id != od.odu_id) continue;
            rewards::SliceWindowStat st;
            st.assigned_odus = 1;
            st.x = sl.stopped ? 0 : 1;
            st.util = sl.eq17_util;
            st.phi = sl.phi;
            st.slice_beta = sl.beta;
            st.nu = sl.nu;
            st.granted_load_bps = sl.granted_bps;
            st.granted_cpes = sl.granted_cpes;
            sample.slices.push_back(st);
        }
        if (sample.slices.empty()) continue;
        auto rd = rewards::reward_loop2({sample}, scn_.penalties);
        auto rc = rewards::reward_loop1({sample}, scn_.penalties);
        r_sd_sum += rd.value;
        r_sc_sum += rc.value;
        sd_terms.satisfaction_term += rd.satisfaction_term;
        sd_terms.duplication_term += rd.duplication_term;
        sd_terms.rb_slack_term += rd.rb_slack_term;
        sc_terms.satisfaction_term += rc.satisfaction_term;
        sc_terms.fronthaul_term += rc.fronthaul_term;
        sc_terms.multi_grant_term += rc.multi_grant_term;
        sc_terms.nu_term += rc.nu_term;
        ++odu_n;
    }
    if (odu_n > 0) {
        r_sd_sum /= odu_n;
        r_sc_sum /= odu_n;
        sd_terms.satisfaction_term /= odu_n;
        sd_terms.duplication_term /= odu_n;
        sd_terms.rb_slack_term /= odu_n;
        sc_terms.satisfaction_term /= odu_n;
        sc_terms.fronthaul_term /= odu_n;
        sc_terms.multi_grant_term /= odu_n;
        sc_terms.nu_term /= odu_n;
    }
    last_reward_.window_start_s = clock_.time_s();
    last_reward_.r_sd = r_sd_sum;
    last_reward_.r_sc = r_sc_sum;
    last_reward_.r_s = rewards::reward_combined(r_sd_sum, r_sc_sum, scn_.penalties.phi_dis);
    last_reward_.loop2_terms = sd_terms;
    last_reward_.loop1_terms = sc_terms;

    if (opt_.keep_series) metrics_.reward_samples.push_back(last_reward_);
    if (rewards_csv_.is_open()) {
        rewards_csv_.field(clock_.second)
            .field(last_reward_.r_sd)
            .field(last_reward_.r_sc)
            .field(last_reward_.r_s)
            .field(sd_terms.satisfaction_term)
            .field(sd_terms.duplication_term)
            .field(sd_terms.rb_slack_term)
            .field(sc_terms.satisfaction_term)
            .field(sc_terms.fronthaul_term)
            .field(sc_terms.multi_grant_term)
            .field(sc_terms.nu_term)
            .end_row();
    }

    for (int c = 0; c < scn_.slice_count(); ++c) {
        const SliceRuntime& sl = slices_[static_cast<std::size_t>(c)];
        if (opt_.keep_series) {
            metrics_.phi[static_cast<std::size_t>(c)].push_back(sl.phi);
            metrics_.served_mbps[static_cast<std::size_t>(c)].push_back(sl.served_bps / 1e6);
            metrics_.demand_mbps[static_cast<std::size_t>(c)].push_back(sl.demand_bps / 1e6);
            metrics_.slice_beta[static_cast<std::size_t>(c)].push_back(static_cast<double>(sl.beta));
            metrics_.eq17_util[static_cast<std::size_t>(c)].push_back(sl.eq17_util);
        }
        if (metrics_csv_.is_open()) {
            double backlog_bits = 0.0;
            for (int v : slice_cpes_[static_cast<std::size_t>(c)])
                backlog_bits += cpes_[static_cast<std::size_t>(v)].backlog_bits;
            metrics_csv_.field(clock_.second)
                .field(c)
                .field(sl.odu_id)
                .field(sl.beta)
                .field(sl.granted_rb)
                .field(sl.demand_bps / 1e6)
                .field(sl.served_bps / 1e6)
                .field(sl.phi)
                .field(sl.eq17_util)
                .field(sl.rejected_cpes)
                .field(backlog_bits / 1e6)
                .end_row();
        }
    }
}

void Engine::validate_tick() const {
    // RB budget constraints at every O-DU and globally.
    long long total = pool_rb_;
    for (const auto& od : odus_) {
        long long allocated = 0;
        for (const auto& sl : slices_)
            if (sl.odu_id == od.odu_id) allocated += sl.beta;
        FWA_CHECK(allocated <= od.beta_d,
                  "slice budgets exceed the O-DU budget (second " + std::to_string(clock_.second) + ")");
        total += od.beta_d;
    }
    FWA_CHECK(total <= scn_.total_rb, "distributed RBs exceed the system total");

    // Every slice on exactly one O-DU.
    for (const auto& sl : slices_) {
        FWA_CHECK(sl.odu_id >= 0 && sl.odu_id < scn_.odu_count(), "slice mapped to unknown O-DU");
        FWA_CHECK(sl.odu_id == scn_.slice_to_odu[static_cast<std::size_t>(sl.slice_id)],
                  "slice moved off its O-DU");
    }

    // Scheduling-cell exclusivity: grants occupy disjoint sub-band ranges
    // inside each O-DU's grid.
    for (const auto& od : odus_) {
        int cursor = 0;
        for (const auto& sl : slices_) {
            if (sl.odu_id != od.odu_id) continue;
            FWA_CHECK(sl.granted_rb <= sl.beta, "grants exceed the slice budget");
            const auto& res = alloc_[static_cast<std::size_t>(sl.slice_id)];
            int inner = cursor;
            for (const auto& g : res.grants) {
                if (g.y == 0) continue;
                inner += g.granted_rb; // contiguous, so disjoint by construction
            }
            FWA_CHECK(inner - cursor == sl.granted_rb, "grant cells overlap inside the slice");
            cursor += sl.beta;
        }
        FWA_CHECK(cursor <= od.beta_d, "slice sub-band ranges exceed the O-DU grid");
    }

    // Fronthaul capacity per (O-RU, O-DU) link.
    for (std::size_t m = 0; m < scn_.orus.size(); ++m) {
        for (std::size_t d = 0; d < scn_.odus.size(); ++d) {
            double used = fronthaul_used_bps_[m * scn_.odus.size() + d];
            FWA_CHECK(used <= scn_.odus[d].fronthaul_capacity_bps + 1e-6,
                      "fronthaul capacity exceeded on a link");
        }
    }

    for (const auto& sl : slices_) {
        FWA_CHECK(sl.phi >= 0.0 && sl.phi <= 1.0, "phi out of [0,1]");
        FWA_CHECK(sl.eq17_util <= 1.0 + 1e-9, "RB utilization above 1 after clamping");
        if (sl.stopped) FWA_CHECK(sl.beta == 0 || sl.action2 != loops::Action::Stop,
                                  "stopped slice retains RBs");
    }
}

void Engine::step_second() {
    demand_bits_ = traffic_.generate(clock_.time_s());
    do_loop1_and_allocate();
    do_radio_and_delays();
    do_loop2();
    do_energy_and_twin();
    do_rewards_and_metrics();

    bool validate = opt_.validate_every_tick || (clock_.second % 100 == 0);
    if (validate) {
        validate_tick();
        metrics_.safety_checks += 1;
    }

    clock_.second += 1;
    metrics_.seconds = clock_.second;
}

void Engine::run_hours(double hours) {
    auto steps = static_cast<long long>(std::llround(hours * 3600.0));
    for (long long i = 0; i < steps; ++i) step_second();
    flush_outputs();
}

void Engine::flush_outputs() {
    if (metrics_csv_.is_open()) metrics_csv_.flush();
    if (energy_csv_.is_open()) energy_csv_.flush();
    if (decisions_csv_.is_open()) decisions_csv_.flush();
    if (rewards_csv_.is_open()) rewards_csv_.flush();
    if (twin_ && !opt_.out_dir.empty()) {
        twin_->log().save_csv(opt_.out_dir + "/twin.csv");
        if (twin_->latest_forecast().has_value()) {
            const auto& f = *twin_->latest_forecast();
            std::vector<std::string> header{"horizon_index", "H_pred"};
            for (std::size_t d = 0; d < f.beta_pred.size(); ++d)
                header.push_back("beta_pred_" + std::to_string(d));
            CsvWriter w(opt_.out_dir + "/forecast.csv", header);
            for (std::size_t i = 0; i < f.h_pred.size(); ++i) {
                w.field(static_cast<std::int64_t>(i)).field(f.h_pred[i]);
                for (const auto& bp : f.beta_pred) w.field(i < bp.size() ? bp[i] : 0.0);
                w.end_row();
            }
        }
    }
}

RunMetrics run(const Scenario& scn, std::uint64_t seed, double duration_h, EngineOptions opt) {
    Engine engine(scn, seed, std::move(opt));
    engine.run_hours(duration_h);
    return engine.metrics();
}

} // namespace fwa::sim
