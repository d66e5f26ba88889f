#pragma once

#include "fwa/mlp.hpp"
#include "fwa/replay.hpp"
#include "fwa/topology.hpp"

#include <array>
#include <span>
#include <string>
#include <vector>

namespace fwa::rl {

/// n-step double-Q return: discounted rewards plus the target network's
/// value of the online network's argmax action at s_{j+n}.
double n_step_return(std::span<const double> rewards, double gamma,
                     const std::array<double, kStateDim>& state_n,
                     const Mlp& online, const Mlp& target);

/// Squared TD loss 0.5 (G - Q)^2.
double td_loss(double g, double q);

struct TrainConfig {
    long long steps = 20000;     // total environment steps across actors
    int actor_count = 1;
    bool train_loop1 = true;
    bool train_loop2 = true;
    bool dqn_baseline = false;   // single actor, uniform replay, 1-step return
    int curve_stride = 100;      // reward-curve resolution in env steps
};

struct TrainResult {
    Mlp loop1_net;
    Mlp loop2_net;
    std::vector<long long> curve_steps;
    std::vector<double> curve_reward; // windowed mean r_s
    std::vector<double> curve_loss;
    std::vector<double> curve_epsilon;
    long long env_steps = 0;
    long long learner_steps = 0;
};

/// Runs the distributed actor/learner pipeline on the scenario. With
/// actor_count == 1 the loop is fully synchronous and bit-reproducible for
/// a fixed seed; more actors run as threads against the shared replay.
/// Throws on a diverging (non-finite) loss.
TrainResult train(const Scenario& scenario, std::uint64_t seed, const TrainConfig& cfg);

/// Plain DQN comparison baseline: same contract as train() with the
/// baseline switches forced.
TrainResult train_dqn_baseline(const Scenario& scenario, std::uint64_t seed, long long steps);

std::string checkpoint_to_json(const TrainResult& result);
void checkpoint_from_json(const std::string& text, Mlp& loop1, Mlp& loop2);

} // namespace fwa::rl
