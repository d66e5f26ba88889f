#include "fwa/energy_model.hpp"

#include "fwa/common.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace fwa::energy {

double ServerPower::total_power_w() const {
    if (!enabled) return 0.0;
    double p = base_w;
    int w = 0;
    for (double iw : instance_w) {
        if (w >= enabled_instances) break;
        p += iw;
        ++w;
    }
    return p;
}

double power_draw(const std::vector<ServerPower>& servers, const std::vector<CpeLoad>& loads) {
    double total = 0.0;
    for (std::size_t p = 0; p < servers.size(); ++p) {
        const ServerPower& sp = servers[p];
        if (!sp.enabled || sp.enabled_instances == 0) continue;
        double util = 0.0;
        for (const CpeLoad& l : loads) {
            if (l.server_id != static_cast<int>(p) || l.y == 0) continue;
            if (l.service_pps <= 0.0) {
                if (l.arrival_pps > 0.0)
                    throw InvariantError("active CPE with zero service rate in power model");
                continue;
            }
            util += l.arrival_pps / (static_cast<double>(sp.enabled_instances) * l.service_pps);
        }
        total += sp.total_power_w() * util;
    }
    return total;
}

double consumption_kwh(double power_w, double duration_s) {
    FWA_CHECK(duration_s > 0.0, "duration must be positive");
    return power_w * duration_s / 3.6e6;
}

double supply_kwh(const SupplyInputs& in, const EnergyLimits& lim) {
    double z = static_cast<double>(in.z);
    double t = in.duration_h;
    FWA_CHECK(t > 0.0, "tick duration must be positive");
    const double eps = 1e-9;
    double grid_term = (1.0 - z) * in.grid_buy_kw;
    if (grid_term < -eps || grid_term > lim.h_max_kw + eps)
        throw InvariantError("grid draw bound violated: (1-z)h+ outside [0, h_max]");
    double solar_term = z * in.solar_kw;
    if (solar_term < -eps || solar_term > lim.g_max_kw + eps)
        throw InvariantError("renewable bound violated: z*g outside [0, g_max]");
    double charge_term = z * in.charge_kw * t;
    if (charge_term < -eps || charge_term > lim.phi_plus_max_kwh + eps)
        throw InvariantError("storage charge bound violated: z*Phi+ outside [0, Phi+_max]");
    double discharge_term = z * in.discharge_kw * t;
    if (discharge_term < -eps || discharge_term > lim.phi_minus_max_kwh + eps)
        throw InvariantError("storage discharge bound violated: z*Phi- outside [0, Phi-_max]");

    return t * ((1.0 - z) * ((in.solar_kw + in.grid_buy_kw) - in.charge_kw) + z * in.discharge_kw);
}

SurplusCost surplus_and_cost(double available_kwh, double consumed_kwh,
                             double grid_buy_kwh, const Prices& prices) {
    SurplusCost sc;
    sc.surplus_kwh = available_kwh > consumed_kwh ? available_kwh - consumed_kwh : 0.0;
    sc.cost_usd = grid_buy_kwh * prices.zeta_e_buy - sc.surplus_kwh * prices.zeta_e_sell;
    return sc;
}

bool feasibility_gate(int z, int x, int y) {
    return (z + (1 - z)) * (x + y) > 1;
}

SolarProfile::SolarProfile(const SolarParams& params) : params_(params) {
    if (!params_.trace_csv.empty()) {
        std::ifstream in(params_.trace_csv);
        if (!in) throw ConfigError("solar trace not found: " + params_.trace_csv);
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            if (first) { first = false; continue; } // header
            auto comma = line.find(',');
            if (comma == std::string::npos) throw ConfigError("malformed solar trace row: " + line);
            trace_kw_.push_back(std::stod(line.substr(comma + 1)));
        }
        if (trace_kw_.empty()) throw ConfigError("solar trace has no data rows");
    }
}

double SolarProfile::kw_at(double sim_time_s) const {
    if (!trace_kw_.empty()) {
        auto idx = static_cast<std::size_t>(sim_time_s / 3600.0);
        return trace_kw_[idx % trace_kw_.size()];
    }
    double h = std::fmod(sim_time_s / 3600.0, 24.0);
    if (h < params_.sunrise_h || h > params_.sunset_h) return 0.0;
    double span = params_.sunset_h - params_.sunrise_h;
    if (span <= 0.0) return 0.0;
    return params_.peak_kw * std::sin(M_PI * (h - params_.sunrise_h) / span);
}

EnergyLedger::EnergyLedger(const EnergyParams& params, const Prices& prices)
    : params_(params), prices_(prices), storage_kwh_(params.storage_init_kwh) {}

TickPlan EnergyLedger::plan_for(int z, double consumption_kwh, double solar_kw, double duration_h) const {
    const EnergyLimits& lim = params_.limits;
    TickPlan plan;
    plan.z = z;
    plan.solar_kw = solar_kw;
    double available_storage = storage_kwh_ - pending_sale_kwh_;
    double need_kw = consumption_kwh / duration_h;
    if (z == 1) {
        // Discharge serves the whole load; solar only charges storage.
        plan.discharge_kw = std::min({need_kw, lim.phi_minus_max_kwh / duration_h,
                                      std::max(0.0, available_storage) / duration_h});
        double headroom_kwh = std::max(0.0, lim.phi_plus_max_kwh - storage_kwh_ +
                                       plan.discharge_kw * duration_h);
        plan.charge_kw = std::min(solar_kw, headroom_kwh / duration_h);
        plan.grid_buy_kw = 0.0;
    } else {
        // Grid/solar serve the load; charge toward the reserve target from
        // solar surplus so headroom remains for the sale parking.
        double surplus_kw = std::max(0.0, solar_kw - need_kw);
        double reserve_target = params_.reserve_frac * lim.phi_plus_max_kwh;
        double headroom_kwh = std::max(0.0, std::min(reserve_target, lim.phi_plus_max_kwh) - storage_kwh_);
        plan.charge_kw = std::min(surplus_kw, headroom_kwh / duration_h);
        plan.grid_buy_kw = std::min(std::max(0.0, need_kw - solar_kw), lim.h_max_kw);
    }
    return plan;
}

int EnergyLedger::greedy_z(double consumption_kwh, double solar_kw, double duration_h,
                           std::optional<double> cost_forecast_usd) const {
    double solar_kwh = solar_kw * duration_h;
    if (solar_kwh >= consumption_kwh) return 0;
    double available = storage_kwh_ - pending_sale_kwh_;
    double floor = 0.05 * params_.limits.phi_plus_max_kwh;
    if (cost_forecast_usd.has_value() && *cost_forecast_usd > 0.0) floor = 0.0;
    bool covers = available >= consumption_kwh + floor &&
                  params_.limits.phi_minus_max_kwh >= consumption_kwh;
    return covers ? 1 : 0;
}

double EnergyLedger::cost_of(const TickPlan& plan, double consumption_kwh, double duration_h) const {
    SupplyInputs in{plan.solar_kw, plan.grid_buy_kw, plan.charge_kw, plan.discharge_kw, plan.z, duration_h};
    double available = supply_kwh(in, params_.limits);
    double raw_surplus = std::max(0.0, available - consumption_kwh);
    double storage_after = storage_kwh_ - pending_sale_kwh_ +
                           plan.charge_kw * duration_h - plan.discharge_kw * duration_h;
    double parked = std::min(raw_surplus, std::max(0.0, params_.limits.phi_plus_max_kwh - storage_after));
    return plan.grid_buy_kw * duration_h * prices_.zeta_e_buy - parked * prices_.zeta_e_sell;
}

EnergyTick EnergyLedger::commit(const TickPlan& plan, double consumption_kwh, double duration_h) {
    const double eps = 1e-9;
    double storage_begin = storage_kwh_;

    // Deliver the surplus parked last tick to the market.
    double sold = pending_sale_kwh_;
    storage_kwh_ -= sold;
    pending_sale_kwh_ = 0.0;

    SupplyInputs in{plan.solar_kw, plan.grid_buy_kw, plan.charge_kw, plan.discharge_kw, plan.z, duration_h};
    double available = supply_kwh(in, params_.limits);
    if (consumption_kwh > available + eps)
        throw InvariantError("energy shortfall: consumption exceeds available supply");

    double discharge_kwh = plan.discharge_kw * duration_h;
    if (discharge_kwh > storage_kwh_ + eps)
        throw InvariantError("storage discharge exceeds stored energy");
    storage_kwh_ -= discharge_kwh;

    double charge_kwh = plan.charge_kw * duration_h;
    storage_kwh_ += charge_kwh;
    if (storage_kwh_ > params_.limits.phi_plus_max_kwh + eps)
        throw InvariantError("storage capacity exceeded by charging plan");

    double raw_surplus = std::max(0.0, available - consumption_kwh);
    double headroom = std::max(0.0, params_.limits.phi_plus_max_kwh - storage_kwh_);
    double parked = std::min(raw_surplus, headroom);
    double curtailed = raw_surplus - parked;
    storage_kwh_ += parked;
    pending_sale_kwh_ = parked;

    EnergyTick tick;
    tick.hour = hour_++;
    tick.z = plan.z;
    tick.solar_kwh = plan.solar_kw * duration_h;
    tick.grid_buy_kwh = plan.grid_buy_kw * duration_h;
    tick.charge_kwh = charge_kwh;
    tick.discharge_kwh = discharge_kwh;
    tick.sold_kwh = sold;
    tick.surplus_kwh = parked;
    tick.curtailed_kwh = curtailed;
    tick.consumption_kwh = consumption_kwh;
    tick.available_kwh = available;
    tick.storage_kwh = storage_kwh_;
    tick.cost_usd = tick.grid_buy_kwh * prices_.zeta_e_buy - parked * prices_.zeta_e_sell;

    // Storage balance: begin + charge + parked surplus - discharge - sold.
    last_residual_kwh_ = storage_kwh_ -
                         (storage_begin + charge_kwh + parked - discharge_kwh - sold);
    ticks_.push_back(tick);
    return tick;
}

} // namespace fwa::energy
