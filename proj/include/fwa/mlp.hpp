#pragma once

#include "fwa/rng.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace fwa::rl {

/// Dense multi-layer perceptron with tanh hidden units and a linear output
/// layer. Small enough that plain loops beat any BLAS round trip; the
/// backward pass is checked against central finite differences in the tests.
class Mlp {
public:
    struct Gradients {
        std::vector<std::vector<double>> w; // per layer, row-major [out][in]
        std::vector<std::vector<double>> b;

        void zero();
        double global_norm() const;
        void scale(double s);
        void add(const Gradients& other);
    };

    /// Activations recorded by forward() for use in backward().
    struct Tape {
        std::vector<std::vector<double>> inputs; // layer inputs (post-activation of previous)
        std::vector<std::vector<double>> pre;    // pre-activation per layer
    };

    Mlp() = default;
    Mlp(const std::vector<int>& sizes, Rng& rng);

    int input_size() const { return sizes_.empty() ? 0 : sizes_.front(); }
    int output_size() const { return sizes_.empty() ? 0 : sizes_.back(); }
    const std::vector<int>& sizes() const { return sizes_; }
    bool initialized() const { return !sizes_.empty(); }

    std::vector<double> forward(std::span<const double> in) const;
    std::vector<double> forward(std::span<const double> in, Tape& tape) const;

    /// Accumulates parameter gradients for the given dLoss/dOutput.
    void backward(const Tape& tape, std::span<const double> dloss_dout, Gradients& grads) const;

    Gradients make_gradients() const;

    /// One SGD step; gradients are clipped to the given global norm first
    /// (clip <= 0 disables clipping).
    void apply_sgd(const Gradients& grads, double lr, double clip);

    /// Flat parameter access for tests and checkpoints.
    std::vector<double> flatten() const;
    void unflatten(std::span<const double> params);
    std::size_t parameter_count() const;

    std::string to_json() const;
    static Mlp from_json(const std::string& text);

private:
    std::vector<int> sizes_;
    std::vector<std::vector<double>> w_;
    std::vector<std::vector<double>> b_;
};

} // namespace fwa::rl
