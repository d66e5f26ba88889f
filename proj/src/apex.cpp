#include "fwa/apex.hpp"

#include "fwa/common.hpp"
#include "fwa/sim.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <mutex>
#include <thread>

namespace fwa::rl {

double n_step_return(std::span<const double> rewards, double gamma,
                     const std::array<double, kStateDim>& state_n,
                     const Mlp& online, const Mlp& target) {
    double g = 0.0;
    double discount = 1.0;
    for (double r : rewards) {
        g += discount * r;
        discount *= gamma;
    }
    auto q_online = online.forward(state_n);
    int argmax = 0;
    for (std::size_t a = 1; a < q_online.size(); ++a)
        if (q_online[a] > q_online[static_cast<std::size_t>(argmax)]) argmax = static_cast<int>(a);
    auto q_target = target.forward(state_n);
    return g + discount * q_target[static_cast<std::size_t>(argmax)];
}

double td_loss(double g, double q) {
    double d = g - q;
    return 0.5 * d * d;
}

namespace {

constexpr int kActionCount = 4;

// Index mapping shared with the zero-touch action table.
loops::Action to_action(int a) { return static_cast<loops::Action>(a); }

struct PendingStep {
    std::array<double, kStateDim> state{};
    int action = 0;
    std::vector<double> rewards;
};

// Accumulates per-stream transitions until n rewards are available.
struct StreamBuffer {
    std::deque<PendingStep> pending;

    void feed_reward(double r, int n, const std::array<double, kStateDim>& current_state,
                     std::vector<Experience>& out) {
        for (auto& p : pending) p.rewards.push_back(r);
        while (!pending.empty() && static_cast<int>(pending.front().rewards.size()) >= n) {
            Experience exp;
            exp.state = pending.front().state;
            exp.action = pending.front().action;
            exp.rewards = pending.front().rewards;
            exp.next_state = current_state;
            out.push_back(std::move(exp));
            pending.pop_front();
        }
    }
};

// Snapshot-published learner parameters shared with the actors.
struct ParamServer {
    std::mutex mu;
    Mlp online;
    std::atomic<long long> version{0};

    void publish(const Mlp& net) {
        std::lock_guard<std::mutex> lock(mu);
        online = net;
        version.fetch_add(1);
    }
    Mlp snapshot() {
        std::lock_guard<std::mutex> lock(mu);
        return online;
    }
};

struct PolicyLane {
    bool enabled = false;
    bool is_loop2 = false;
    Mlp net;     // learner-owned online network
    Mlp target;
    PrioritizedReplay replay;
    ParamServer params;
    std::mutex learn_mu;

    PolicyLane(std::size_t capacity, double alpha) : replay(capacity, alpha) {}
};

int greedy_action(const Mlp& net, const std::array<double, kStateDim>& s) {
    auto q = net.forward(s);
    int best = 0;
    for (std::size_t a = 1; a < q.size(); ++a)
        if (q[a] > q[static_cast<std::size_t>(best)]) best = static_cast<int>(a);
    return best;
}

double epsilon_at(const RlParams& rl, long long step, long long total) {
    double frac = rl.eps_anneal_frac <= 0.0
                      ? 1.0
                      : std::min(1.0, static_cast<double>(step) /
                                          (rl.eps_anneal_frac * static_cast<double>(total)));
    return rl.eps_start + (rl.eps_end - rl.eps_start) * frac;
}

struct LearnStats {
    double loss = 0.0;
};

// One SGD step on a sampled batch; returns the mean TD loss.
LearnStats learner_step(PolicyLane& lane, const RlParams& rl, bool dqn, double beta_is, Rng& rng) {
    std::lock_guard<std::mutex> lock(lane.learn_mu);
    SampledBatch batch = dqn ? lane.replay.sample_uniform(static_cast<std::size_t>(rl.batch_size), rng)
                             : lane.replay.sample(static_cast<std::size_t>(rl.batch_size), beta_is, rng);
    auto grads = lane.net.make_gradients();
    grads.zero();
    std::vector<double> new_priorities(batch.items.size(), 0.0);
    double loss_sum = 0.0;
    for (std::size_t i = 0; i < batch.items.size(); ++i) {
        const Experience& exp = batch.items[i];
        double g;
        if (dqn) {
            // Vanilla target: both argmax and evaluation from the target net.
            g = n_step_return(exp.rewards, rl.gamma, exp.next_state, lane.target, lane.target);
        } else {
            g = n_step_return(exp.rewards, rl.gamma, exp.next_state, lane.net, lane.target);
        }
        Mlp::Tape tape;
        auto q = lane.net.forward(exp.state, tape);
        double td = g - q[static_cast<std::size_t>(exp.action)];
        loss_sum += td_loss(g, q[static_cast<std::size_t>(exp.action)]);
        new_priorities[i] = std::abs(td);
        std::vector<double> dloss(q.size(), 0.0);
        dloss[static_cast<std::size_t>(exp.action)] =
            -td * batch.is_weights[i] / static_cast<double>(batch.items.size());
        lane.net.backward(tape, dloss, grads);
    }
    if (!std::isfinite(loss_sum))
        throw InvariantError("training diverged: non-finite TD loss");
    lane.net.apply_sgd(grads, rl.lr, rl.grad_clip);
    if (!dqn) lane.replay.update_priorities(batch.indices, new_priorities);
    return {loss_sum / static_cast<double>(batch.items.size())};
}

struct ActorContext {
    int actor_id = 0;
    std::uint64_t seed = 0;
    double fixed_epsilon = -1.0; // >= 0: explore at this fixed rate
};

} // namespace

TrainResult train(const Scenario& scenario, std::uint64_t seed, const TrainConfig& cfg) {
    const RlParams& rl = scenario.rl;
    FWA_CHECK(cfg.actor_count >= 1, "need at least one actor");
    FWA_CHECK(rl.replay_capacity <= 50000, "replay capacity above the configured maximum");

    std::vector<int> sizes{kStateDim};
    for (int h : rl.hidden) sizes.push_back(h);
    sizes.push_back(kActionCount);

    Rng root(seed);
    Rng net_rng1 = root.fork("net.loop1");
    Rng net_rng2 = root.fork("net.loop2");

    PolicyLane lane1(static_cast<std::size_t>(rl.replay_capacity), cfg.dqn_baseline ? 0.0 : rl.priority_alpha);
    PolicyLane lane2(static_cast<std::size_t>(rl.replay_capacity), cfg.dqn_baseline ? 0.0 : rl.priority_alpha);
    lane1.enabled = cfg.train_loop1;
    lane2.enabled = cfg.train_loop2;
    lane2.is_loop2 = true;
    lane1.net = Mlp(sizes, net_rng1);
    lane2.net = Mlp(sizes, net_rng2);
    lane1.target = lane1.net;
    lane2.target = lane2.net;
    lane1.params.publish(lane1.net);
    lane2.params.publish(lane2.net);

    int n_step = cfg.dqn_baseline ? 1 : rl.n_step;

    std::atomic<long long> env_steps{0};
    std::atomic<long long> learner_steps{0};
    std::atomic<bool> failed{false};
    std::mutex curve_mu;
    std::string failure_msg;
    TrainResult result;

    auto actor_loop = [&](const ActorContext& ctx, bool synchronous) {
        try {
            Rng explore = Rng(ctx.seed).fork("explore");
            Rng learn_rng = Rng(ctx.seed).fork("learn");

            Mlp actor_net1 = lane1.params.snapshot();
            Mlp actor_net2 = lane2.params.snapshot();
            long long seen_version1 = -1, seen_version2 = -1;

            int slices = scenario.slice_count();
            std::vector<StreamBuffer> streams1(static_cast<std::size_t>(slices));
            std::vector<StreamBuffer> streams2(static_cast<std::size_t>(slices));
            std::vector<std::array<double, kStateDim>> last_state1(static_cast<std::size_t>(slices));
            std::vector<std::array<double, kStateDim>> last_state2(static_cast<std::size_t>(slices));
            std::vector<int> last_action1(static_cast<std::size_t>(slices), 0);
            std::vector<int> last_action2(static_cast<std::size_t>(slices), 0);

            double epsilon = rl.eps_start;
            sim::EngineOptions engine_opt;
            engine_opt.keep_series = false;
            engine_opt.twin_enabled = false;
            engine_opt.validate_every_tick = false;
            engine_opt.hooks.loop1 = [&](int slice, const loops::Loop1Inputs&,
                                         const std::array<double, 3>& st) -> std::optional<loops::Action> {
                if (!lane1.enabled) return std::nullopt;
                int a = explore.uniform() < epsilon
                            ? static_cast<int>(explore.uniform_index(kActionCount))
                            : greedy_action(actor_net1, st);
                last_state1[static_cast<std::size_t>(slice)] = st;
                last_action1[static_cast<std::size_t>(slice)] = a;
                streams1[static_cast<std::size_t>(slice)].pending.push_back(
                    {st, a, {}});
                return to_action(a);
            };
            engine_opt.hooks.loop2 = [&](int slice,
                                         const std::array<double, 3>& st) -> std::optional<loops::Action> {
                if (!lane2.enabled) return std::nullopt;
                int a = explore.uniform() < epsilon
                            ? static_cast<int>(explore.uniform_index(kActionCount))
                            : greedy_action(actor_net2, st);
                last_state2[static_cast<std::size_t>(slice)] = st;
                last_action2[static_cast<std::size_t>(slice)] = a;
                streams2[static_cast<std::size_t>(slice)].pending.push_back(
                    {st, a, {}});
                return to_action(a);
            };

            sim::Engine engine(scenario, ctx.seed, engine_opt);

            double window_reward = 0.0;
            double window_loss = 0.0;
            int window_n = 0;

            while (!failed.load()) {
                long long my_step = env_steps.fetch_add(1);
                if (my_step >= cfg.steps) {
                    env_steps.fetch_sub(1);
                    break;
                }
                epsilon = ctx.fixed_epsilon >= 0.0 ? ctx.fixed_epsilon
                                                   : epsilon_at(rl, my_step, cfg.steps);

                engine.step_second();
                double r1 = engine.last_r_sc();
                double r2 = engine.last_r_s();

                std::vector<Experience> ready;
                for (int c = 0; c < slices; ++c) {
                    if (lane1.enabled)
                        streams1[static_cast<std::size_t>(c)].feed_reward(
                            r1, n_step, engine.loop1_state(c), ready);
                }
                for (auto& exp : ready) {
                    double g = n_step_return(exp.rewards, rl.gamma, exp.next_state, actor_net1, actor_net1);
                    double q = actor_net1.forward(exp.state)[static_cast<std::size_t>(exp.action)];
                    exp.priority = std::abs(g - q);
                    lane1.replay.insert(std::move(exp));
                }
                ready.clear();
                for (int c = 0; c < slices; ++c) {
                    if (lane2.enabled)
                        streams2[static_cast<std::size_t>(c)].feed_reward(
                            r2, n_step, engine.loop2_state(c), ready);
                }
                for (auto& exp : ready) {
                    double g = n_step_return(exp.rewards, rl.gamma, exp.next_state, actor_net2, actor_net2);
                    double q = actor_net2.forward(exp.state)[static_cast<std::size_t>(exp.action)];
                    exp.priority = std::abs(g - q);
                    lane2.replay.insert(std::move(exp));
                }

                window_reward += r2;
                window_n += 1;

                // Synchronous mode interleaves one learner pass per env step
                // so a single-actor run is bit-reproducible.
                if (synchronous) {
                    double beta_is = rl.is_beta_start +
                                     (rl.is_beta_end - rl.is_beta_start) *
                                         std::min(1.0, static_cast<double>(my_step) /
                                                           static_cast<double>(cfg.steps));
                    for (PolicyLane* lane : {&lane1, &lane2}) {
                        if (!lane->enabled) continue;
                        if (lane->replay.size() < static_cast<std::size_t>(rl.replay_warmup)) continue;
                        auto stats = learner_step(*lane, rl, cfg.dqn_baseline, beta_is, learn_rng);
                        window_loss += stats.loss;
                        long long ls = learner_steps.fetch_add(1) + 1;
                        if (ls % rl.target_sync == 0) lane->target = lane->net;
                        lane->params.publish(lane->net);
                    }
                    actor_net1 = lane1.params.snapshot();
                    actor_net2 = lane2.params.snapshot();
                } else {
                    // Refresh actor snapshots when the learner published.
                    long long v1 = lane1.params.version.load();
                    if (v1 != seen_version1) {
                        actor_net1 = lane1.params.snapshot();
                        seen_version1 = v1;
                    }
                    long long v2 = lane2.params.version.load();
                    if (v2 != seen_version2) {
                        actor_net2 = lane2.params.snapshot();
                        seen_version2 = v2;
                    }
                }

                if ((my_step + 1) % cfg.curve_stride == 0 && ctx.actor_id == 0) {
                    std::lock_guard<std::mutex> lock(curve_mu);
                    result.curve_steps.push_back(my_step + 1);
                    result.curve_reward.push_back(window_reward / std::max(window_n, 1));
                    result.curve_loss.push_back(window_loss / std::max(window_n, 1));
                    result.curve_epsilon.push_back(epsilon);
                    window_reward = 0.0;
                    window_loss = 0.0;
                    window_n = 0;
                }
            }
        } catch (const std::exception& e) {
            failed.store(true);
            std::lock_guard<std::mutex> lock(curve_mu);
            failure_msg = e.what();
        }
    };

    if (cfg.actor_count == 1) {
        ActorContext ctx{0, seed, -1.0};
        actor_loop(ctx, true);
    } else {
        std::vector<std::thread> actors;
        for (int i = 0; i < cfg.actor_count; ++i) {
            ActorContext ctx;
            ctx.actor_id = i;
            ctx.seed = seed + static_cast<std::uint64_t>(i) * 0x9e3779b9ULL;
            ctx.fixed_epsilon = i == 0 ? -1.0 : 0.4; // diverse exploration on extra actors
            actors.emplace_back([&, ctx] { actor_loop(ctx, false); });
        }
        // Asynchronous learner keeps one SGD pass per env step on average.
        std::thread learner([&] {
            try {
                Rng learn_rng = Rng(seed).fork("learner.async");
                while (!failed.load() && env_steps.load() < cfg.steps) {
                    long long target_ls = env_steps.load();
                    if (learner_steps.load() >= target_ls) {
                        std::this_thread::yield();
                        continue;
                    }
                    double beta_is = rl.is_beta_start +
                                     (rl.is_beta_end - rl.is_beta_start) *
                                         std::min(1.0, static_cast<double>(env_steps.load()) /
                                                           static_cast<double>(cfg.steps));
                    for (PolicyLane* lane : {&lane1, &lane2}) {
                        if (!lane->enabled) continue;
                        if (lane->replay.size() < static_cast<std::size_t>(rl.replay_warmup)) continue;
                        learner_step(*lane, rl, cfg.dqn_baseline, beta_is, learn_rng);
                        long long ls = learner_steps.fetch_add(1) + 1;
                        if (ls % rl.target_sync == 0) lane->target = lane->net;
                        if (ls % 20 == 0) lane->params.publish(lane->net);
                    }
                }
                lane1.params.publish(lane1.net);
                lane2.params.publish(lane2.net);
            } catch (const std::exception& e) {
                failed.store(true);
                std::lock_guard<std::mutex> lock(curve_mu);
                failure_msg = e.what();
            }
        });
        for (auto& a : actors) a.join();
        learner.join();
    }

    if (failed.load()) throw InvariantError("training aborted: " + failure_msg);

    result.loop1_net = lane1.net;
    result.loop2_net = lane2.net;
    result.env_steps = env_steps.load();
    result.learner_steps = learner_steps.load();
    return result;
}

TrainResult train_dqn_baseline(const Scenario& scenario, std::uint64_t seed, long long steps) {
    TrainConfig cfg;
    cfg.steps = steps;
    cfg.actor_count = 1;
    cfg.dqn_baseline = true;
    return train(scenario, seed, cfg);
}

std::string checkpoint_to_json(const TrainResult& result) {
    nlohmann::json j;
    j["version"] = 1;
    j["loop1"] = nlohmann::json::parse(result.loop1_net.to_json());
    j["loop2"] = nlohmann::json::parse(result.loop2_net.to_json());
    return j.dump();
}

void checkpoint_from_json(const std::string& text, Mlp& loop1, Mlp& loop2) {
    nlohmann::json j = nlohmann::json::parse(text);
    FWA_CHECK(j.at("version").get<int>() == 1, "unsupported checkpoint version");
    loop1 = Mlp::from_json(j.at("loop1").dump());
    loop2 = Mlp::from_json(j.at("loop2").dump());
}

} // namespace fwa::rl
