#pragma once

#include "fwa/topology.hpp"

#include <optional>
#include <string>
#include <vector>

namespace fwa::energy {

/// Power state of one physical server hosting virtual instances.
struct ServerPower {
    double base_w = 0.0;
    std::vector<double> instance_w;
    int enabled_instances = 0; // W in the power formula
    bool enabled = true;

    /// p_pow = p_base + sum of enabled instance powers; zero when disabled.
    double total_power_w() const;
};

struct CpeLoad {
    int server_id = 0;
    int y = 0;
    double arrival_pps = 0.0;
    double service_pps = 0.0;
};

/// Utilization-scaled draw over all servers in watts; disabled servers
/// contribute nothing. Throws if an active CPE has zero service rate.
double power_draw(const std::vector<ServerPower>& servers, const std::vector<CpeLoad>& loads);

/// Energy in kWh for a constant draw over a duration.
double consumption_kwh(double power_w, double duration_s);

struct SupplyInputs {
    double solar_kw = 0.0;      // g_t
    double grid_buy_kw = 0.0;   // h+_t
    double charge_kw = 0.0;     // Phi+_t (power equivalent over the tick)
    double discharge_kw = 0.0;  // Phi-_t
    int z = 0;                  // 1 = discharge from storage
    double duration_h = 1.0;    // t
};

/// Available energy L(t). Validates the source/storage bounds and throws a
/// constraint error naming the violated bound.
double supply_kwh(const SupplyInputs& in, const EnergyLimits& lim);

struct SurplusCost {
    double surplus_kwh = 0.0; // h-_{t+1}
    double cost_usd = 0.0;    // H(t)
};

/// Surplus and monetary cost for the tick: h- = max(L - L_cons, 0),
/// H = h+ * zeta_buy - h- * zeta_sell.
SurplusCost surplus_and_cost(double available_kwh, double consumed_kwh,
                             double grid_buy_kwh, const Prices& prices);

/// Constraint (z + (1-z))(x + y) > 1, which reduces to x + y > 1 for
/// binary z.
bool feasibility_gate(int z, int x, int y);

/// Synthetic clamped-sinusoid solar profile (kW at an hour of day), or a
/// trace loaded from CSV (timestamp_iso8601, solar_kw) when configured.
class SolarProfile {
public:
    explicit SolarProfile(const SolarParams& params);

    double kw_at(double sim_time_s) const;

private:
    SolarParams params_;
    std::vector<double> trace_kw_; // hourly when loaded from CSV
};

/// One completed energy accounting tick.
struct EnergyTick {
    long long hour = 0;
    int z = 0;
    double solar_kwh = 0.0;
    double grid_buy_kwh = 0.0;
    double charge_kwh = 0.0;
    double discharge_kwh = 0.0;
    double sold_kwh = 0.0;       // previous tick's parked surplus, delivered now
    double surplus_kwh = 0.0;    // parked this tick for sale at t+1
    double curtailed_kwh = 0.0;
    double consumption_kwh = 0.0;
    double available_kwh = 0.0;  // L(t)
    double storage_kwh = 0.0;    // at end of tick
    double cost_usd = 0.0;       // H(t)
};

/// Per-tick decision handed to the ledger: either the greedy policy below
/// or the SCA solver picks z.
struct TickPlan {
    int z = 0;
    double solar_kw = 0.0;
    double grid_buy_kw = 0.0;
    double charge_kw = 0.0;
    double discharge_kw = 0.0;
};

/// Sequential energy ledger; one writer per tick. Completed ticks are
/// immutable.
class EnergyLedger {
public:
    EnergyLedger(const EnergyParams& params, const Prices& prices);

    double storage_kwh() const { return storage_kwh_; }
    double pending_sale_kwh() const { return pending_sale_kwh_; }
    const std::vector<EnergyTick>& ticks() const { return ticks_; }

    /// Builds the flow plan for a tick under the given z decision.
    TickPlan plan_for(int z, double consumption_kwh, double solar_kw, double duration_h) const;

    /// Greedy default: discharge when storage covers the tick's demand and
    /// the reserve floor (or the forecast marks the hour expensive).
    int greedy_z(double consumption_kwh, double solar_kw, double duration_h,
                 std::optional<double> cost_forecast_usd) const;

    /// Evaluates H(t) for a plan without committing anything.
    double cost_of(const TickPlan& plan, double consumption_kwh, double duration_h) const;

    /// Applies a plan, enforcing every bound; returns the completed tick.
    EnergyTick commit(const TickPlan& plan, double consumption_kwh, double duration_h);

    /// Conservation residual of the last committed tick (kWh).
    double last_residual_kwh() const { return last_residual_kwh_; }

    const EnergyParams& params() const { return params_; }
    const Prices& prices() const { return prices_; }

private:
    EnergyParams params_;
    Prices prices_;
    double storage_kwh_ = 0.0;
    double pending_sale_kwh_ = 0.0;
    double last_residual_kwh_ = 0.0;
    long long hour_ = 0;
    std::vector<EnergyTick> ticks_;
};

} // namespace fwa::energy
