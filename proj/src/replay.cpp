#include "fwa/replay.hpp"

#include "fwa/common.hpp"

#include <algorithm>
#include <cmath>

namespace fwa::rl {

PrioritizedReplay::PrioritizedReplay(std::size_t capacity, double alpha, double priority_eps)
    : capacity_(capacity), alpha_(alpha), priority_eps_(priority_eps) {
    FWA_CHECK(capacity_ > 0, "replay capacity must be positive");
    tree_base_ = 1;
    while (tree_base_ < capacity_) tree_base_ <<= 1;
    tree_.assign(2 * tree_base_, 0.0);
    items_.resize(capacity_);
}

std::size_t PrioritizedReplay::size() const {
    std::lock_guard<std::mutex> lock(mu_);
    return count_;
}

double PrioritizedReplay::tree_total() const { return tree_[1]; }

void PrioritizedReplay::tree_set(std::size_t slot, double value) {
    std::size_t node = tree_base_ + slot;
    tree_[node] = value;
    node >>= 1;
    while (node >= 1) {
        tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
        if (node == 1) break;
        node >>= 1;
    }
}

std::size_t PrioritizedReplay::tree_find(double mass) const {
    std::size_t node = 1;
    while (node < tree_base_) {
        double left = tree_[2 * node];
        if (mass <= left || tree_[2 * node + 1] <= 0.0) {
            node = 2 * node;
        } else {
            mass -= left;
            node = 2 * node + 1;
        }
    }
    std::size_t slot = node - tree_base_;
    return std::min(slot, count_ > 0 ? count_ - 1 : 0);
}

void PrioritizedReplay::insert(Experience exp) {
    std::lock_guard<std::mutex> lock(mu_);
    double p = std::pow(std::max(exp.priority, 0.0) + priority_eps_, alpha_);
    std::size_t slot = next_slot_;
    items_[slot] = std::move(exp);
    tree_set(slot, p);
    next_slot_ = (next_slot_ + 1) % capacity_;
    count_ = std::min(count_ + 1, capacity_);
}

SampledBatch PrioritizedReplay::sample(std::size_t batch_size, double beta_is, Rng& rng) {
    std::lock_guard<std::mutex> lock(mu_);
    if (count_ == 0) throw InvariantError("sample from empty replay buffer");
    SampledBatch batch;
    batch.indices.reserve(batch_size);
    batch.items.reserve(batch_size);
    batch.is_weights.reserve(batch_size);
    double total = tree_total();
    FWA_CHECK(total > 0.0, "replay priority mass is zero");
    double n = static_cast<double>(count_);
    double max_w = 0.0;
    // Stratified draw: one sample per equal-mass segment.
    for (std::size_t b = 0; b < batch_size; ++b) {
        double lo = total * static_cast<double>(b) / static_cast<double>(batch_size);
        double hi = total * static_cast<double>(b + 1) / static_cast<double>(batch_size);
        double mass = rng.uniform(lo, hi);
        std::size_t idx = tree_find(mass);
        double p = tree_[tree_base_ + idx] / total;
        double w = beta_is > 0.0 ? std::pow(n * std::max(p, 1e-12), -beta_is) : 1.0;
        batch.indices.push_back(idx);
        batch.items.push_back(items_[idx]);
        batch.is_weights.push_back(w);
        max_w = std::max(max_w, w);
    }
    if (max_w > 0.0)
        for (double& w : batch.is_weights) w /= max_w;
    return batch;
}

SampledBatch PrioritizedReplay::sample_uniform(std::size_t batch_size, Rng& rng) {
    std::lock_guard<std::mutex> lock(mu_);
    if (count_ == 0) throw InvariantError("sample from empty replay buffer");
    SampledBatch batch;
    for (std::size_t b = 0; b < batch_size; ++b) {
        std::size_t idx = static_cast<std::size_t>(rng.uniform_index(count_));
        batch.indices.push_back(idx);
        batch.items.push_back(items_[idx]);
        batch.is_weights.push_back(1.0);
    }
    return batch;
}

void PrioritizedReplay::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& new_priorities) {
    std::lock_guard<std::mutex> lock(mu_);
    FWA_CHECK(indices.size() == new_priorities.size(), "priority update size mismatch");
    for (std::size_t i = 0; i < indices.size(); ++i) {
        double p = std::pow(std::max(new_priorities[i], 0.0) + priority_eps_, alpha_);
        tree_set(indices[i], p);
    }
}

} // namespace fwa::rl
