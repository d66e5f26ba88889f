#pragma once

#include "fwa/rng.hpp"

#include <array>
#include <cstddef>
#include <mutex>
#include <vector>

namespace fwa::rl {

constexpr int kStateDim = 3;

/// One actor observation: state, action, the n future rewards and the state
/// n steps ahead, plus the |TD error|-based priority.
struct Experience {
    std::array<double, kStateDim> state{};
    int action = 0;
    std::vector<double> rewards; // r_{j+1} .. r_{j+n}
    std::array<double, kStateDim> next_state{};
    double priority = 1.0;
};

struct SampledBatch {
    std::vector<std::size_t> indices;
    std::vector<Experience> items; // copies, so concurrent inserts cannot mutate a batch
    std::vector<double> is_weights; // normalized by the batch maximum
};

/// Proportional prioritized replay over a ring buffer: sampling probability
/// follows priority^alpha through a sum tree; eviction overwrites the
/// oldest record. Insert/sample/update are safe to call concurrently.
class PrioritizedReplay {
public:
    PrioritizedReplay(std::size_t capacity, double alpha, double priority_eps = 1e-3);

    std::size_t size() const;
    std::size_t capacity() const { return capacity_; }

    void insert(Experience exp);

    /// Throws InvariantError when empty. beta_is is the importance-sampling
    /// exponent; pass 0 for unweighted draws.
    SampledBatch sample(std::size_t batch_size, double beta_is, Rng& rng);

    /// Uniform sampling path used by the plain DQN baseline.
    SampledBatch sample_uniform(std::size_t batch_size, Rng& rng);

    void update_priorities(const std::vector<std::size_t>& indices,
                           const std::vector<double>& new_priorities);

private:
    double tree_total() const;
    void tree_set(std::size_t slot, double value);
    std::size_t tree_find(double mass) const;

    std::size_t capacity_;
    double alpha_;
    double priority_eps_;
    std::vector<Experience> items_;
    std::vector<double> tree_; // binary indexed sum tree, size 2 * tree_base_
    std::size_t tree_base_;
    std::size_t next_slot_ = 0;
    std::size_t count_ = 0;
    mutable std::mutex mu_;
};

} // namespace fwa::rl
