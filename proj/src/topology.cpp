#include "fwa/topology.hpp"

#include "fwa/common.hpp"
#include "fwa/csv.hpp"
#include "fwa/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace fwa {
namespace topology {

std::vector<int> assign_slices_round_robin(int slice_count, int odu_count) {
    FWA_CHECK(odu_count >= 1, "round-robin needs at least one O-DU");
    FWA_CHECK(slice_count >= 1, "round-robin needs at least one slice");
    std::vector<int> map(static_cast<std::size_t>(slice_count));
    for (int c = 0; c < slice_count; ++c) map[static_cast<std::size_t>(c)] = c % odu_count;
    return map;
}

RbSplit initial_rb_split(int total_rb, int odu_count) {
    FWA_CHECK(odu_count >= 1, "RB split needs at least one O-DU");
    FWA_CHECK(total_rb >= 0, "negative RB total");
    RbSplit split;
    int each = total_rb / odu_count;
    split.per_odu.assign(static_cast<std::size_t>(odu_count), each);
    split.pool = total_rb - each * odu_count;
    return split;
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : bytes) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

namespace {

void require_same_size(std::size_t n, std::size_t m, const std::string& what) {
    if (n != m)
        throw ConfigError("[services] arrays disagree in length: " + what);
}

std::vector<double> uniform_or(const ConfigDoc& doc, const std::string& sec, const std::string& key,
                               std::size_t n, double dflt) {
    if (!doc.has(sec, key)) return std::vector<double>(n, dflt);
    auto v = doc.get_double_array(sec, key);
    if (v.size() == 1) return std::vector<double>(n, v[0]);
    require_same_size(v.size(), n, key);
    return v;
}

} // namespace

Scenario scenario_from_config(const ConfigDoc& doc, const std::string& raw_text) {
    Scenario s;
    s.config_hash = fnv1a_hex(raw_text);
    s.rng_seed = static_cast<std::uint64_t>(doc.get_int("run", "seed", 42));

    // --- services ---
    auto fiveqi = doc.get_int_array("services", "fiveqi");
    auto budgets = doc.get_double_array("services", "delay_budget_ms");
    auto counts = doc.get_int_array("services", "cpes");
    std::size_t K = fiveqi.size();
    require_same_size(budgets.size(), K, "delay_budget_ms");
    require_same_size(counts.size(), K, "cpes");
    auto means = uniform_or(doc, "services", "mean_demand_mbps", K, 5.0);
    auto cvs = uniform_or(doc, "services", "demand_cv", K, 0.15);
    auto caps = uniform_or(doc, "services", "demand_cap_mbps", K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        Service sv;
        sv.id = static_cast<int>(k);
        sv.slice_id = sv.id;
        sv.fiveqi = static_cast<int>(fiveqi[k]);
        sv.delay_budget_ms = budgets[k];
        if (sv.delay_budget_ms <= 0.0)
            throw ConfigError("delay_budget_ms must be positive (service " + std::to_string(k) + ")");
        sv.cpe_count = static_cast<int>(counts[k]);
        if (sv.cpe_count < 0)
            throw ConfigError("cpes must be nonnegative (service " + std::to_string(k) + ")");
        sv.mean_demand_mbps = means[k];
        sv.demand_cv = cvs[k];
        sv.demand_cap_mbps = caps[k] > 0.0 ? caps[k] : 3.0 * means[k];
        s.services.push_back(sv);
    }

    // --- counts and maps ---
    int M = static_cast<int>(doc.get_int("topology", "orus"));
    int D = static_cast<int>(doc.get_int("topology", "odus"));
    int P = static_cast<int>(doc.get_int("topology", "servers", D));
    s.ocu_count = static_cast<int>(doc.get_int("topology", "ocus", 2));
    if (M < 1) throw ConfigError("topology.orus must be >= 1");
    if (D < 1) throw ConfigError("topology.odus must be >= 1");
    if (P < 1) throw ConfigError("topology.servers must be >= 1");

    // --- radio ---
    s.total_rb = static_cast<int>(doc.get_int("radio", "total_rb", 273));
    s.radio.numerology_i = static_cast<int>(doc.get_int("radio", "numerology", 3));
    s.radio.subcarrier_spacing_hz = doc.get_double("radio", "subcarrier_khz", 120.0) * 1e3;
    s.radio.layers = doc.has("radio", "layers") ? doc.get_double_array("radio", "layers") : std::vector<double>{4.0};
    s.radio.mod_order = doc.has("radio", "mod_order") ? doc.get_double_array("radio", "mod_order") : std::vector<double>{8.0};
    s.radio.scaling = doc.has("radio", "scaling") ? doc.get_double_array("radio", "scaling") : std::vector<double>{1.0};
    s.radio.overhead = doc.has("radio", "overhead") ? doc.get_double_array("radio", "overhead") : std::vector<double>{0.14};
    s.radio.r_max = doc.get_double("radio", "r_max", 948.0 / 1024.0);
    s.radio.noise_power_w = doc.get_double("radio", "noise_power_w", 1e-13);
    s.radio.pathloss_exp = doc.get_double("radio", "pathloss_exp", 2.0);
    s.radio.channel_error_var = doc.get_double("radio", "channel_error_var", 0.0);
    s.radio.reference_snr = doc.get_double("radio", "reference_snr", 1e5);
    s.radio.packet_bits = doc.get_double("radio", "packet_bits", 12000.0);
    s.radio.propagation_mps = doc.get_double("radio", "propagation_mps", 2e8);
    double fh_gbps = doc.get_double("radio", "fronthaul_capacity_gbps", 10.0);
    double fh_len = doc.get_double("radio", "fronthaul_length_m", 2000.0);
    double tx_power = doc.get_double("radio", "tx_power_w", 1.0);

    // --- O-DUs and servers ---
    auto split = initial_rb_split(s.total_rb, D);
    for (int d = 0; d < D; ++d) {
        Odu o;
        o.id = d;
        o.server_id = d % P;
        o.rb_budget = split.per_odu[static_cast<std::size_t>(d)];
        o.fronthaul_capacity_bps = fh_gbps * 1e9;
        o.fronthaul_length_m = fh_len;
        s.odus.push_back(o);
    }

    double base_w = doc.get_double("energy", "server_base_w", 40.0);
    auto inst_w = doc.has("energy", "server_instance_w")
                      ? doc.get_double_array("energy", "server_instance_w")
                      : std::vector<double>{20.0, 15.0};
    for (int p = 0; p < P; ++p) {
        ServerSpec sp;
        sp.id = p;
        sp.base_power_w = base_w;
        sp.instance_power_w = inst_w;
        s.servers.push_back(sp);
    }

    // --- O-RUs: either explicit positions or evenly spaced on a line ---
    double width = doc.get_double("topology", "area_width_m", 1500.0);
    double depth = doc.get_double("topology", "area_depth_m", 300.0);
    double min_dist = doc.get_double("topology", "min_distance_m", 20.0);
    if (doc.has("orus", "x_m")) {
        auto xs = doc.get_double_array("orus", "x_m");
        auto ys = doc.get_double_array("orus", "y_m");
        require_same_size(ys.size(), xs.size(), "orus.y_m");
        if (static_cast<int>(xs.size()) != M) throw ConfigError("orus.x_m length != topology.orus");
        for (int m = 0; m < M; ++m) {
            Oru o;
            o.id = m;
            o.x_m = xs[static_cast<std::size_t>(m)];
            o.y_m = ys[static_cast<std::size_t>(m)];
            s.orus.push_back(o);
        }
    } else {
        for (int m = 0; m < M; ++m) {
            Oru o;
            o.id = m;
            o.x_m = (m + 0.5) * width / M;
            o.y_m = 0.0;
            s.orus.push_back(o);
        }
    }
    // O-RU -> O-DU in contiguous blocks.
    for (int m = 0; m < M; ++m) {
        int d = std::min(m * D / M, D - 1);
        s.orus[static_cast<std::size_t>(m)].odu_id = d;
        s.odus[static_cast<std::size_t>(d)].oru_ids.push_back(m);
    }
    for (const auto& o : s.odus)
        if (o.oru_ids.empty())
            throw ConfigError("O-DU " + std::to_string(o.id) + " serves no O-RU (need orus >= odus)");

    // --- CPEs: explicit or generated from seed ---
    if (doc.has("cpes", "oru_id")) {
        auto oru_ids = doc.get_int_array("cpes", "oru_id");
        auto svc_ids = doc.get_int_array("cpes", "service_id");
        auto dists = doc.get_double_array("cpes", "distance_m");
        auto powers = uniform_or(doc, "cpes", "tx_power_w", oru_ids.size(), tx_power);
        require_same_size(svc_ids.size(), oru_ids.size(), "cpes.service_id");
        require_same_size(dists.size(), oru_ids.size(), "cpes.distance_m");
        for (std::size_t v = 0; v < oru_ids.size(); ++v) {
            Cpe c;
            c.id = static_cast<int>(v);
            c.oru_id = static_cast<int>(oru_ids[v]);
            c.service_id = static_cast<int>(svc_ids[v]);
            c.distance_m = dists[v];
            c.tx_power_w = powers[v];
            s.cpes.push_back(c);
        }
    } else {
        Rng rng = Rng(s.rng_seed).fork("topology.cpes");
        int next_id = 0;
        for (const auto& sv : s.services) {
            for (int i = 0; i < sv.cpe_count; ++i) {
                double x = rng.uniform(0.0, width);
                double y = rng.uniform(-depth, depth);
                int best = 0;
                double best_d2 = std::numeric_limits<double>::max();
                for (const auto& o : s.orus) {
                    double dx = x - o.x_m, dy = y - o.y_m;
                    double d2 = dx * dx + dy * dy;
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = o.id;
                    }
                }
                Cpe c;
                c.id = next_id++;
                c.oru_id = best;
                c.service_id = sv.id;
                c.distance_m = std::max(min_dist, std::sqrt(best_d2));
                c.tx_power_w = tx_power;
                s.cpes.push_back(c);
            }
        }
    }

    // --- slice placement ---
    if (doc.has("topology", "slice_to_odu")) {
        auto map = doc.get_int_array("topology", "slice_to_odu");
        if (map.size() != K) throw ConfigError("slice_to_odu length != number of services");
        for (auto d : map) s.slice_to_odu.push_back(static_cast<int>(d));
    } else {
        s.slice_to_odu = assign_slices_round_robin(static_cast<int>(K), D);
    }

    // --- prices ---
    s.prices.zeta_c_per_mbps = doc.get_double("prices", "zeta_c_per_mbps", 6.0);
    s.prices.zeta_e_buy = doc.get_double("prices", "zeta_e_buy", 0.073);
    s.prices.zeta_e_sell = doc.get_double("prices", "zeta_e_sell", 0.070);

    // --- loops ---
    s.loops.loop1_period_ms = doc.get_double("loops", "loop1_period_ms", 5.0);
    s.loops.loop2_period_ms = doc.get_double("loops", "loop2_period_ms", 100.0);
    s.loops.energy_tick_s = doc.get_double("loops", "energy_tick_s", 3600.0);
    s.loops.ewma_alpha = doc.get_double("loops", "ewma_alpha", 0.3);
    s.loops.fill_target = doc.get_double("loops", "fill_target", 0.8);
    s.loops.lambda_zero_eps = doc.get_double("loops", "lambda_zero_eps", 0.5);
    s.loops.buffer_cap_pkts = doc.get_double_array_or_empty("loops", "buffer_cap_pkts");
    s.loops.buffer_threshold_pkts = doc.get_double_array_or_empty("loops", "buffer_threshold_pkts");
    if (s.loops.buffer_cap_pkts.empty()) {
        // Default buffers sized from the traffic profile so that all four
        // loop-1 actions are reachable: threshold at half capacity, capacity
        // at 4x the expected per-window arrivals.
        double window_s = s.loops.loop2_period_ms / 1000.0;
        for (const auto& sv : s.services) {
            double mean_window_pkts = sv.cpe_count * sv.mean_demand_mbps * 1e6 * window_s / s.radio.packet_bits;
            double cap = std::max(40.0, std::ceil(4.0 * mean_window_pkts));
            s.loops.buffer_cap_pkts.push_back(cap);
            s.loops.buffer_threshold_pkts.push_back(std::ceil(cap / 2.0));
        }
    }
    if (s.loops.buffer_cap_pkts.size() != K || s.loops.buffer_threshold_pkts.size() != K)
        throw ConfigError("buffer arrays must have one entry per service");

    // --- traffic ---
    s.traffic.diurnal = doc.get_bool("traffic", "diurnal", true);
    s.traffic.diurnal_min = doc.get_double("traffic", "diurnal_min", 0.8);
    s.traffic.diurnal_max = doc.get_double("traffic", "diurnal_max", 1.2);

    // --- energy ---
    s.energy.limits.h_max_kw = doc.get_double("energy", "h_max_kw", 5.0);
    s.energy.limits.g_max_kw = doc.get_double("energy", "g_max_kw", 5.0);
    s.energy.limits.phi_plus_max_kwh = doc.get_double("energy", "phi_plus_max_kwh", 5.0);
    s.energy.limits.phi_minus_max_kwh = doc.get_double("energy", "phi_minus_max_kwh", 3.0);
    s.energy.storage_init_kwh = doc.get_double("energy", "storage_init_kwh", 0.0);
    s.energy.reserve_frac = doc.get_double("energy", "reserve_frac", 0.6);
    s.energy.server_service_rate_pps = doc.get_double("energy", "server_service_rate_pps", 20000.0);
    s.energy.solar.peak_kw = doc.get_double("energy", "solar_peak_kw", 2.0);
    s.energy.solar.sunrise_h = doc.get_double("energy", "sunrise_h", 6.5);
    s.energy.solar.sunset_h = doc.get_double("energy", "sunset_h", 21.0);
    s.energy.solar.trace_csv = doc.get_string("energy", "solar_trace", "");

    // --- rewards ---
    s.penalties.delta_d = doc.get_double("rewards", "delta_d", 1.0);
    s.penalties.delta_beta = doc.get_double("rewards", "delta_beta", 0.005);
    s.penalties.delta_m = doc.get_double("rewards", "delta_m", 0.1);
    s.penalties.delta_v = doc.get_double("rewards", "delta_v", 1.0);
    s.penalties.delta_z = doc.get_double("rewards", "delta_z", 0.005);
    s.penalties.phi_dis = doc.get_double("rewards", "phi_dis", 0.5);

    // --- rl ---
    s.rl.gamma = doc.get_double("rl", "gamma", 0.99);
    s.rl.lr = doc.get_double("rl", "lr", 1e-3);
    s.rl.n_step = static_cast<int>(doc.get_int("rl", "n_step", 3));
    s.rl.batch_size = static_cast<int>(doc.get_int("rl", "batch_size", 32));
    s.rl.replay_capacity = static_cast<int>(doc.get_int("rl", "replay_capacity", 50000));
    s.rl.replay_warmup = static_cast<int>(doc.get_int("rl", "replay_warmup", 500));
    s.rl.priority_alpha = doc.get_double("rl", "priority_alpha", 0.6);
    s.rl.is_beta_start = doc.get_double("rl", "is_beta_start", 0.4);
    s.rl.is_beta_end = doc.get_double("rl", "is_beta_end", 1.0);
    s.rl.eps_start = doc.get_double("rl", "eps_start", 1.0);
    s.rl.eps_end = doc.get_double("rl", "eps_end", 0.05);
    s.rl.eps_anneal_frac = doc.get_double("rl", "eps_anneal_frac", 0.5);
    s.rl.target_sync = static_cast<int>(doc.get_int("rl", "target_sync", 500));
    s.rl.grad_clip = doc.get_double("rl", "grad_clip", 10.0);
    if (doc.has("rl", "hidden")) {
        s.rl.hidden.clear();
        for (auto h : doc.get_int_array("rl", "hidden")) s.rl.hidden.push_back(static_cast<int>(h));
    }

    // --- twin ---
    s.twin.chunk_records = static_cast<int>(doc.get_int("twin", "chunk_records", 60));
    s.twin.window = static_cast<int>(doc.get_int("twin", "window", 60));
    s.twin.hidden = static_cast<int>(doc.get_int("twin", "hidden", 128));
    s.twin.initial_epochs = static_cast<int>(doc.get_int("twin", "initial_epochs", 250));
    s.twin.update_epochs = static_cast<int>(doc.get_int("twin", "update_epochs", 5));
    s.twin.lr = doc.get_double("twin", "lr", 1e-2);
    s.twin.warmup_chunks = static_cast<int>(doc.get_int("twin", "warmup_chunks", 4));
    s.twin.history_cap = static_cast<int>(doc.get_int("twin", "history_cap", 600));
    s.twin.cycles_per_bit = doc.get_double("twin", "cycles_per_bit", 100.0);
    s.twin.mec_cycles_per_bit = doc.get_double("twin", "mec_cycles_per_bit", 100.0);
    s.twin.cpu_hz = doc.get_double("twin", "cpu_hz", 2e9);
    s.twin.mec_cpu_hz = doc.get_double("twin", "mec_cpu_hz", 3e9);
    s.twin.mec_iterations = doc.get_double("twin", "mec_iterations", 250.0);
    s.twin.p_pl = doc.get_double("twin", "p_pl", 1e-27);
    s.twin.transfer_window_s = doc.get_double("twin", "transfer_window_s", 1.0);
    s.twin.zeta_bw = doc.get_double("twin", "zeta_bw", 1e-9);
    s.twin.w_mec = doc.get_bool("twin", "w_mec", true);
    s.twin.feedback = doc.get_bool("twin", "feedback", false);
    s.twin.bits_per_value = static_cast<int>(doc.get_int("twin", "bits_per_value", 64));

    validate(s);
    return s;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config file not found: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    return scenario_from_config(ConfigDoc::parse_string(text, path), text);
}

void validate(const Scenario& s) {
    if (s.prices.zeta_e_sell > s.prices.zeta_e_buy)
        throw ConfigError("price ordering violated: zeta_e_sell must be <= zeta_e_buy");

    int K = s.slice_count();
    if (static_cast<int>(s.slice_to_odu.size()) != K)
        throw ConfigError("slice_to_odu must map every slice");
    for (int c = 0; c < K; ++c) {
        int d = s.slice_to_odu[static_cast<std::size_t>(c)];
        if (d < 0 || d >= s.odu_count())
            throw ConfigError("slice_to_odu[" + std::to_string(c) + "] out of range");
    }

    long total_budget = 0;
    for (const auto& o : s.odus) {
        if (o.rb_budget < 0) throw ConfigError("rb_budget negative for O-DU " + std::to_string(o.id));
        if (o.fronthaul_capacity_bps <= 0.0)
            throw ConfigError("fronthaul_capacity must be positive for O-DU " + std::to_string(o.id));
        total_budget += o.rb_budget;
    }
    if (total_budget > s.total_rb)
        throw ConfigError("sum of O-DU RB budgets exceeds total_rb");

    // Each O-RU on exactly one O-DU.
    std::vector<int> owner(static_cast<std::size_t>(s.orus.size()), -1);
    for (const auto& o : s.odus) {
        for (int m : o.oru_ids) {
            if (m < 0 || m >= static_cast<int>(s.orus.size()))
                throw ConfigError("O-DU " + std::to_string(o.id) + " references unknown O-RU");
            if (owner[static_cast<std::size_t>(m)] != -1)
                throw ConfigError("O-RU " + std::to_string(m) + " attached to two O-DUs");
            owner[static_cast<std::size_t>(m)] = o.id;
        }
    }
    for (std::size_t m = 0; m < owner.size(); ++m)
        if (owner[m] == -1) throw ConfigError("O-RU " + std::to_string(m) + " attached to no O-DU");

    for (const auto& c : s.cpes) {
        if (c.distance_m <= 0.0)
            throw ConfigError("distance_m must be positive (CPE " + std::to_string(c.id) + ")");
        if (c.oru_id < 0 || c.oru_id >= static_cast<int>(s.orus.size()))
            throw ConfigError("CPE " + std::to_string(c.id) + " references unknown O-RU");
        if (c.service_id < 0 || c.service_id >= K)
            throw ConfigError("CPE " + std::to_string(c.id) + " references unknown service");
        if (c.tx_power_w <= 0.0)
            throw ConfigError("tx_power_w must be positive (CPE " + std::to_string(c.id) + ")");
    }

    const auto& r = s.radio;
    std::size_t J = r.layers.size();
    if (J == 0 || r.mod_order.size() != J || r.scaling.size() != J || r.overhead.size() != J)
        throw ConfigError("radio carrier arrays must be nonempty and equal length");
    for (std::size_t j = 0; j < J; ++j) {
        if (r.layers[j] <= 0 || r.mod_order[j] <= 0)
            throw ConfigError("radio layers/mod_order must be positive");
        if (r.scaling[j] <= 0.0 || r.scaling[j] > 1.0)
            throw ConfigError("radio scaling must be in (0,1]");
        if (r.overhead[j] < 0.0 || r.overhead[j] >= 1.0)
            throw ConfigError("radio overhead must be in [0,1)");
    }
    if (r.r_max <= 0.0) throw ConfigError("radio r_max must be positive");
    if (r.numerology_i < 0) throw ConfigError("radio numerology must be >= 0");
    if (r.noise_power_w <= 0.0) throw ConfigError("radio noise_power_w must be positive");

    const auto& lp = s.loops;
    if (!(lp.loop1_period_ms > 0.0 && lp.loop1_period_ms < 10.0))
        throw ConfigError("loop1_period_ms must be in (0, 10)");
    if (!(lp.loop2_period_ms >= 10.0 && lp.loop2_period_ms < 1000.0))
        throw ConfigError("loop2_period_ms must be in [10, 1000)");
    double ratio = lp.loop2_period_ms / lp.loop1_period_ms;
    if (std::abs(ratio - std::round(ratio)) > 1e-9)
        throw ConfigError("loop2 period must be an integer multiple of loop1 period");
    double per_second = 1000.0 / lp.loop2_period_ms;
    if (std::abs(per_second - std::round(per_second)) > 1e-9)
        throw ConfigError("one second must contain a whole number of loop2 periods");
    if (lp.energy_tick_s < 1.0 || std::abs(lp.energy_tick_s - std::round(lp.energy_tick_s)) > 1e-9)
        throw ConfigError("energy_tick_s must be a whole number of seconds");

    for (int c = 0; c < K; ++c) {
        double cap = lp.buffer_cap_pkts[static_cast<std::size_t>(c)];
        double thr = lp.buffer_threshold_pkts[static_cast<std::size_t>(c)];
        if (!(thr > 0.0 && thr <= cap))
            throw ConfigError("buffer threshold must satisfy 0 < B <= B~ (slice " + std::to_string(c) + ")");
    }

    if (s.energy.limits.phi_plus_max_kwh < 0 || s.energy.limits.phi_minus_max_kwh < 0 ||
        s.energy.limits.h_max_kw < 0 || s.energy.limits.g_max_kw < 0)
        throw ConfigError("energy limits must be nonnegative");
    if (s.penalties.phi_dis < 0.0 || s.penalties.phi_dis > 1.0)
        throw ConfigError("phi_dis must be in [0,1]");
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += format_double(v[i]);
    }
    return out + "]";
}

std::string join_ints(const std::vector<int>& v) {
    std::string out = "[";
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ", ";
        out += std::to_string(v[i]);
    }
    return out + "]";
}

} // namespace

std::string serialize(const Scenario& s) {
    std::ostringstream o;
    o << "[run]\n";
    o << "seed = " << s.rng_seed << "\n";

    o << "\n[topology]\n";
    o << "orus = " << s.orus.size() << "\n";
    o << "odus = " << s.odus.size() << "\n";
    o << "servers = " << s.servers.size() << "\n";
    o << "ocus = " << s.ocu_count << "\n";
    o << "slice_to_odu = " << join_ints(s.slice_to_odu) << "\n";

    o << "\n[services]\n";
    std::vector<int> fiveqi, counts;
    std::vector<double> budgets, means, cvs, caps;
    for (const auto& sv : s.services) {
        fiveqi.push_back(sv.fiveqi);
        counts.push_back(sv.cpe_count);
        budgets.push_back(sv.delay_budget_ms);
        means.push_back(sv.mean_demand_mbps);
        cvs.push_back(sv.demand_cv);
        caps.push_back(sv.demand_cap_mbps);
    }
    o << "fiveqi = " << join_ints(fiveqi) << "\n";
    o << "delay_budget_ms = " << join_doubles(budgets) << "\n";
    o << "cpes = " << join_ints(counts) << "\n";
    o << "mean_demand_mbps = " << join_doubles(means) << "\n";
    o << "demand_cv = " << join_doubles(cvs) << "\n";
    o << "demand_cap_mbps = " << join_doubles(caps) << "\n";

    o << "\n[orus]\n";
    std::vector<double> ox, oy;
    for (const auto& u : s.orus) {
        ox.push_back(u.x_m);
        oy.push_back(u.y_m);
    }
    o << "x_m = " << join_doubles(ox) << "\n";
    o << "y_m = " << join_doubles(oy) << "\n";

    o << "\n[cpes]\n";
    std::vector<int> coru, csvc;
    std::vector<double> cdist, cpow;
    for (const auto& c : s.cpes) {
        coru.push_back(c.oru_id);
        csvc.push_back(c.service_id);
        cdist.push_back(c.distance_m);
        cpow.push_back(c.tx_power_w);
    }
    o << "oru_id = " << join_ints(coru) << "\n";
    o << "service_id = " << join_ints(csvc) << "\n";
    o << "distance_m = " << join_doubles(cdist) << "\n";
    o << "tx_power_w = " << join_doubles(cpow) << "\n";

    const auto& r = s.radio;
    o << "\n[radio]\n";
    o << "numerology = " << r.numerology_i << "\n";
    o << "total_rb = " << s.total_rb << "\n";
    o << "subcarrier_khz = " << format_double(r.subcarrier_spacing_hz / 1e3) << "\n";
    o << "layers = " << join_doubles(r.layers) << "\n";
    o << "mod_order = " << join_doubles(r.mod_order) << "\n";
    o << "scaling = " << join_doubles(r.scaling) << "\n";
    o << "overhead = " << join_doubles(r.overhead) << "\n";
    o << "r_max = " << format_double(r.r_max) << "\n";
    o << "noise_power_w = " << format_double(r.noise_power_w) << "\n";
    o << "pathloss_exp = " << format_double(r.pathloss_exp) << "\n";
    o << "channel_error_var = " << format_double(r.channel_error_var) << "\n";
    o << "reference_snr = " << format_double(r.reference_snr) << "\n";
    o << "packet_bits = " << format_double(r.packet_bits) << "\n";
    o << "propagation_mps = " << format_double(r.propagation_mps) << "\n";
    o << "fronthaul_capacity_gbps = " << format_double(s.odus[0].fronthaul_capacity_bps / 1e9) << "\n";
    o << "fronthaul_length_m = " << format_double(s.odus[0].fronthaul_length_m) << "\n";

    const auto& lp = s.loops;
    o << "\n[loops]\n";
    o << "loop1_period_ms = " << format_double(lp.loop1_period_ms) << "\n";
    o << "loop2_period_ms = " << format_double(lp.loop2_period_ms) << "\n";
    o << "energy_tick_s = " << format_double(lp.energy_tick_s) << "\n";
    o << "ewma_alpha = " << format_double(lp.ewma_alpha) << "\n";
    o << "fill_target = " << format_double(lp.fill_target) << "\n";
    o << "lambda_zero_eps = " << format_double(lp.lambda_zero_eps) << "\n";
    o << "buffer_cap_pkts = " << join_doubles(lp.buffer_cap_pkts) << "\n";
    o << "buffer_threshold_pkts = " << join_doubles(lp.buffer_threshold_pkts) << "\n";

    o << "\n[traffic]\n";
    o << "diurnal = " << (s.traffic.diurnal ? "true" : "false") << "\n";
    o << "diurnal_min = " << format_double(s.traffic.diurnal_min) << "\n";
    o << "diurnal_max = " << format_double(s.traffic.diurnal_max) << "\n";

    const auto& e = s.energy;
    o << "\n[energy]\n";
    o << "h_max_kw = " << format_double(e.limits.h_max_kw) << "\n";
    o << "g_max_kw = " << format_double(e.limits.g_max_kw) << "\n";
    o << "phi_plus_max_kwh = " << format_double(e.limits.phi_plus_max_kwh) << "\n";
    o << "phi_minus_max_kwh = " << format_double(e.limits.phi_minus_max_kwh) << "\n";
    o << "storage_init_kwh = " << format_double(e.storage_init_kwh) << "\n";
    o << "reserve_frac = " << format_double(e.reserve_frac) << "\n";
    o << "server_service_rate_pps = " << format_double(e.server_service_rate_pps) << "\n";
    o << "server_base_w = " << format_double(s.servers[0].base_power_w) << "\n";
    o << "server_instance_w = " << join_doubles(s.servers[0].instance_power_w) << "\n";
    o << "solar_peak_kw = " << format_double(e.solar.peak_kw) << "\n";
    o << "sunrise_h = " << format_double(e.solar.sunrise_h) << "\n";
    o << "sunset_h = " << format_double(e.solar.sunset_h) << "\n";
    if (!e.solar.trace_csv.empty()) o << "solar_trace = \"" << e.solar.trace_csv << "\"\n";

    o << "\n[prices]\n";
    o << "zeta_c_per_mbps = " << format_double(s.prices.zeta_c_per_mbps) << "\n";
    o << "zeta_e_buy = " << format_double(s.prices.zeta_e_buy) << "\n";
    o << "zeta_e_sell = " << format_double(s.prices.zeta_e_sell) << "\n";

    const auto& pc = s.penalties;
    o << "\n[rewards]\n";
    o << "delta_d = " << format_double(pc.delta_d) << "\n";
    o << "delta_beta = " << format_double(pc.delta_beta) << "\n";
    o << "delta_m = " << format_double(pc.delta_m) << "\n";
    o << "delta_v = " << format_double(pc.delta_v) << "\n";
    o << "delta_z = " << format_double(pc.delta_z) << "\n";
    o << "phi_dis = " << format_double(pc.phi_dis) << "\n";

    const auto& rl = s.rl;
    o << "\n[rl]\n";
    o << "gamma = " << format_double(rl.gamma) << "\n";
    o << "lr = " << format_double(rl.lr) << "\n";
    o << "n_step = " << rl.n_step << "\n";
    o << "batch_size = " << rl.batch_size << "\n";
    o << "replay_capacity = " << rl.replay_capacity << "\n";
    o << "replay_warmup = " << rl.replay_warmup << "\n";
    o << "priority_alpha = " << format_double(rl.priority_alpha) << "\n";
    o << "is_beta_start = " << format_double(rl.is_beta_start) << "\n";
    o << "is_beta_end = " << format_double(rl.is_beta_end) << "\n";
    o << "eps_start = " << format_double(rl.eps_start) << "\n";
    o << "eps_end = " << format_double(rl.eps_end) << "\n";
    o << "eps_anneal_frac = " << format_double(rl.eps_anneal_frac) << "\n";
    o << "target_sync = " << rl.target_sync << "\n";
    o << "grad_clip = " << format_double(rl.grad_clip) << "\n";
    o << "hidden = " << join_ints(rl.hidden) << "\n";

    const auto& tw = s.twin;
    o << "\n[twin]\n";
    o << "chunk_records = " << tw.chunk_records << "\n";
    o << "window = " << tw.window << "\n";
    o << "hidden = " << tw.hidden << "\n";
    o << "initial_epochs = " << tw.initial_epochs << "\n";
    o << "update_epochs = " << tw.update_epochs << "\n";
    o << "lr = " << format_double(tw.lr) << "\n";
    o << "warmup_chunks = " << tw.warmup_chunks << "\n";
    o << "history_cap = " << tw.history_cap << "\n";
    o << "cycles_per_bit = " << format_double(tw.cycles_per_bit) << "\n";
    o << "mec_cycles_per_bit = " << format_double(tw.mec_cycles_per_bit) << "\n";
    o << "cpu_hz = " << format_double(tw.cpu_hz) << "\n";
    o << "mec_cpu_hz = " << format_double(tw.mec_cpu_hz) << "\n";
    o << "mec_iterations = " << format_double(tw.mec_iterations) << "\n";
    o << "p_pl = " << format_double(tw.p_pl) << "\n";
    o << "transfer_window_s = " << format_double(tw.transfer_window_s) << "\n";
    o << "zeta_bw = " << format_double(tw.zeta_bw) << "\n";
    o << "w_mec = " << (tw.w_mec ? "true" : "false") << "\n";
    o << "feedback = " << (tw.feedback ? "true" : "false") << "\n";
    o << "bits_per_value = " << tw.bits_per_value << "\n";
    return o.str();
}

} // namespace topology
} // namespace fwa
