#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fwa::loops {

/// The four zero-touch actions, shared by both loops and by the RL action
/// space (Keep/ScaleUp/ScaleDown/Stop).
enum class Action : int { Keep = 0, ScaleUp = 1, ScaleDown = 2, Stop = 3 };

std::string action_name(Action a);

struct Loop1Decision {
    int slice_id = 0;
    Action action = Action::Keep;
    double omega = 1.0;
};

struct Loop1Inputs {
    double psi = 0.0;        // queue status
    double threshold = 0.0;  // B
    double cap = 0.0;        // B~
    double phi = 1.0;        // slice requirement satisfaction
    double util = 1.0;       // slice-level RB utilization
};

/// Rule table for closed-loop 1. Stop is checked first, then scale-up, then
/// scale-down, else keep; exactly one action fires for any input.
Loop1Decision loop1_decide(int slice_id, const Loop1Inputs& in);

struct CpeDemand {
    int cpe_id = 0;
    int required_rb = 0;
    double demand_bps = 0.0;
    int oru_id = 0;
};

struct CpeGrant {
    int cpe_id = 0;
    int granted_rb = 0;
    int y = 0;
};

struct LoopFeedback {
    int slice_id = 0;
    double omega = 1.0;
    Action action = Action::Keep;
    int slice_budget = 0;  // beta^{c,k}_d at allocation time
    int granted_sum = 0;   // sum of granted RBs
    long long nu = 0;      // slice_budget - floor(omega * granted_sum)
};

struct AllocationResult {
    std::vector<CpeGrant> grants;
    int granted_rb = 0;
    int rejected_cpes = 0;
    double granted_bps = 0.0;
    double rejected_bps = 0.0;
    LoopFeedback feedback;
};

/// Intra-slice allocation: grants CPEs in ascending (required RB, id) order
/// against the raw slice budget and the per-fronthaul-link headroom;
/// ungrantable CPEs keep y = 0 and count as rejections. The feedback nu
/// compares the slice budget with the omega-scaled granted demand.
AllocationResult loop1_allocate(int slice_id, int slice_budget,
                                const std::vector<CpeDemand>& demands,
                                double omega, Action action,
                                std::vector<double>* fronthaul_headroom_bps);

struct Loop2Decision {
    int odu_id = 0;
    int slice_id = 0;
    Action action = Action::Keep;
    int new_beta = 0;
    int pool_draw = 0; // RBs taken from (+) or returned to (-) the RIC pool
};

struct Loop2Inputs {
    int odu_id = 0;
    int current_beta = 0;
    int odu_free_rb = 0;  // unallocated budget at the O-DU
    int ric_pool_rb = 0;  // remainder pool at the Near-RT RIC
    int odu_budget = 0;   // beta_d
};

/// Rule table for closed-loop 2 driven by loop-1 feedback. Scale-up draws
/// first from the O-DU's free budget, then from the RIC pool.
Loop2Decision loop2_decide(const LoopFeedback& fb, const Loop2Inputs& in);

struct SliceActivity {
    int slice_id = 0;
    int odu_id = 0;
    bool stopped = false;
};

struct DisableResult {
    std::vector<int> disabled_odus;
    std::vector<int> disabled_servers;
};

/// O-DU disabled iff every slice it hosts is stopped; a server is disabled
/// iff every O-DU it hosts is disabled (servers hosting no O-DU stay up).
DisableResult disable_unused(const std::vector<SliceActivity>& slices,
                             const std::vector<int>& odu_to_server,
                             int server_count);

} // namespace fwa::loops
