#include "fwa/closed_loops.hpp"

#include "fwa/common.hpp"

#include <algorithm>
#include <cmath>

namespace fwa::loops {

std::string action_name(Action a) {
    switch (a) {
        case Action::Keep: return "keep";
        case Action::ScaleUp: return "scale_up";
        case Action::ScaleDown: return "scale_down";
        case Action::Stop: return "stop";
    }
    return "unknown";
}

Loop1Decision loop1_decide(int slice_id, const Loop1Inputs& in) {
    FWA_CHECK(in.threshold > 0.0 && in.cap >= in.threshold, "buffer geometry must satisfy 0 < B <= B~");
    Loop1Decision d;
    d.slice_id = slice_id;
    if (in.psi == in.cap) {
        // No demand for the service: stop allocation and disable the slice.
        d.action = Action::Stop;
        d.omega = 0.0;
    } else if (in.psi == in.threshold && in.phi < 1.0) {
        d.action = Action::ScaleUp;
        d.omega = in.cap / in.threshold;
    } else if (in.psi > in.threshold && in.util < 1.0) {
        d.action = Action::ScaleDown;
        d.omega = in.threshold / in.cap;
    } else {
        d.action = Action::Keep;
        d.omega = 1.0;
    }
    // Omega stays within [0, B~/B] by construction of the four rules.
    return d;
}

AllocationResult loop1_allocate(int slice_id, int slice_budget,
                                const std::vector<CpeDemand>& demands,
                                double omega, Action action,
                                std::vector<double>* fronthaul_headroom_bps) {
    FWA_CHECK(slice_budget >= 0, "slice budget must be nonnegative");
    AllocationResult res;
    res.feedback.slice_id = slice_id;
    res.feedback.omega = omega;
    res.feedback.action = action;
    res.feedback.slice_budget = slice_budget;

    // Smallest demands first maximizes the number of satisfied CPEs when the
    // budget is tight; ties broken by id for determinism.
    std::vector<const CpeDemand*> order;
    order.reserve(demands.size());
    for (const auto& d : demands) order.push_back(&d);
    std::sort(order.begin(), order.end(), [](const CpeDemand* a, const CpeDemand* b) {
        if (a->required_rb != b->required_rb) return a->required_rb < b->required_rb;
        return a->cpe_id < b->cpe_id;
    });

    int remaining = slice_budget;
    res.grants.reserve(demands.size());
    for (const CpeDemand* d : order) {
        CpeGrant g;
        g.cpe_id = d->cpe_id;
        bool stopped = action == Action::Stop;
        bool fits_budget = d->required_rb <= remaining;
        bool fits_fronthaul = true;
        if (fronthaul_headroom_bps != nullptr) {
            double& headroom = (*fronthaul_headroom_bps)[static_cast<std::size_t>(d->oru_id)];
            fits_fronthaul = d->demand_bps <= headroom;
            if (!stopped && fits_budget && fits_fronthaul && d->required_rb > 0) headroom -= d->demand_bps;
        }
        if (!stopped && d->required_rb > 0 && fits_budget && fits_fronthaul) {
            g.granted_rb = d->required_rb;
            g.y = 1;
            remaining -= g.granted_rb;
            res.granted_rb += g.granted_rb;
            res.granted_bps += d->demand_bps;
        } else if (d->required_rb > 0) {
            res.rejected_cpes += 1;
            res.rejected_bps += d->demand_bps;
        }
        res.grants.push_back(g);
    }
    // Restore caller-visible grant order.
    std::sort(res.grants.begin(), res.grants.end(),
              [](const CpeGrant& a, const CpeGrant& b) { return a.cpe_id < b.cpe_id; });

    res.feedback.granted_sum = res.granted_rb;
    res.feedback.nu = static_cast<long long>(slice_budget) -
                      static_cast<long long>(std::floor(omega * res.granted_rb));
    return res;
}

Loop2Decision loop2_decide(const LoopFeedback& fb, const Loop2Inputs& in) {
    Loop2Decision d;
    d.odu_id = in.odu_id;
    d.slice_id = fb.slice_id;

    if (fb.nu == fb.slice_budget && fb.slice_budget >= 0 &&
        static_cast<long long>(std::floor(fb.omega * fb.granted_sum)) == 0) {
        // The slice's RBs are unused: terminate allocation. Freed RBs stay
        // in the O-DU's free budget; the engine reclaims excess to the pool.
        d.action = Action::Stop;
        d.new_beta = 0;
        d.pool_draw = 0;
        return d;
    }
    if (fb.nu < 0) {
        d.action = Action::ScaleUp;
        long long want = static_cast<long long>(std::ceil(fb.omega * in.current_beta));
        long long cap = static_cast<long long>(in.current_beta) + in.odu_free_rb + in.ric_pool_rb;
        long long granted = std::min(want, cap);
        d.new_beta = static_cast<int>(std::max<long long>(granted, in.current_beta));
        int growth = d.new_beta - in.current_beta;
        d.pool_draw = std::max(0, growth - in.odu_free_rb);
        return d;
    }
    if (fb.nu > 0) {
        d.action = Action::ScaleDown;
        int next = static_cast<int>(std::ceil(fb.omega * in.current_beta));
        d.new_beta = std::min(next, in.current_beta);
        d.pool_draw = 0;
        return d;
    }
    d.action = Action::Keep;
    d.new_beta = in.current_beta;
    return d;
}

DisableResult disable_unused(const std::vector<SliceActivity>& slices,
                             const std::vector<int>& odu_to_server,
                             int server_count) {
    DisableResult res;
    int odu_count = static_cast<int>(odu_to_server.size());
    std::vector<int> active(static_cast<std::size_t>(odu_count), 0);
    std::vector<int> hosted(static_cast<std::size_t>(odu_count), 0);
    for (const auto& s : slices) {
        hosted[static_cast<std::size_t>(s.odu_id)] += 1;
        if (!s.stopped) active[static_cast<std::size_t>(s.odu_id)] += 1;
    }
    std::vector<int> server_hosted(static_cast<std::size_t>(server_count), 0);
    std::vector<int> server_active(static_cast<std::size_t>(server_count), 0);
    for (int d = 0; d < odu_count; ++d) {
        bool disabled = hosted[static_cast<std::size_t>(d)] > 0 && active[static_cast<std::size_t>(d)] == 0;
        if (disabled) res.disabled_odus.push_back(d);
        int p = odu_to_server[static_cast<std::size_t>(d)];
        server_hosted[static_cast<std::size_t>(p)] += 1;
        if (!disabled) server_active[static_cast<std::size_t>(p)] += 1;
    }
    for (int p = 0; p < server_count; ++p) {
        if (server_hosted[static_cast<std::size_t>(p)] > 0 && server_active[static_cast<std::size_t>(p)] == 0)
            res.disabled_servers.push_back(p);
    }
    return res;
}

} // namespace fwa::loops
