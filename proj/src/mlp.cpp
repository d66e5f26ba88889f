#include "fwa/mlp.hpp"

#include "fwa/common.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace fwa::rl {

void Mlp::Gradients::zero() {
    for (auto& layer : w) std::fill(layer.begin(), layer.end(), 0.0);
    for (auto& layer : b) std::fill(layer.begin(), layer.end(), 0.0);
}

double Mlp::Gradients::global_norm() const {
    double sq = 0.0;
    for (const auto& layer : w)
        for (double g : layer) sq += g * g;
    for (const auto& layer : b)
        for (double g : layer) sq += g * g;
    return std::sqrt(sq);
}

void Mlp::Gradients::scale(double s) {
    for (auto& layer : w)
        for (double& g : layer) g *= s;
    for (auto& layer : b)
        for (double& g : layer) g *= s;
}

void Mlp::Gradients::add(const Gradients& other) {
    for (std::size_t l = 0; l < w.size(); ++l) {
        for (std::size_t i = 0; i < w[l].size(); ++i) w[l][i] += other.w[l][i];
        for (std::size_t i = 0; i < b[l].size(); ++i) b[l][i] += other.b[l][i];
    }
}

Mlp::Mlp(const std::vector<int>& sizes, Rng& rng) : sizes_(sizes) {
    FWA_CHECK(sizes.size() >= 2, "MLP needs at least input and output layers");
    for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
        int in = sizes_[l];
        int out = sizes_[l + 1];
        FWA_CHECK(in > 0 && out > 0, "layer sizes must be positive");
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        std::vector<double> wl(static_cast<std::size_t>(in) * out);
        for (double& v : wl) v = rng.uniform(-bound, bound);
        w_.push_back(std::move(wl));
        b_.emplace_back(static_cast<std::size_t>(out), 0.0);
    }
}

std::vector<double> Mlp::forward(std::span<const double> in) const {
    Tape tape;
    return forward(in, tape);
}

std::vector<double> Mlp::forward(std::span<const double> in, Tape& tape) const {
    FWA_CHECK(initialized(), "forward on an uninitialized network");
    FWA_CHECK(static_cast<int>(in.size()) == input_size(), "input dimension mismatch");
    for (double v : in)
        FWA_CHECK(std::isfinite(v), "non-finite network input");

    tape.inputs.clear();
    tape.pre.clear();
    std::vector<double> act(in.begin(), in.end());
    std::size_t layers = w_.size();
    for (std::size_t l = 0; l < layers; ++l) {
        int in_n = sizes_[l];
        int out_n = sizes_[l + 1];
        tape.inputs.push_back(act);
        std::vector<double> pre(static_cast<std::size_t>(out_n));
        for (int o = 0; o < out_n; ++o) {
            double sum = b_[l][static_cast<std::size_t>(o)];
            const double* row = &w_[l][static_cast<std::size_t>(o) * in_n];
            for (int i = 0; i < in_n; ++i) sum += row[i] * act[static_cast<std::size_t>(i)];
            pre[static_cast<std::size_t>(o)] = sum;
        }
        tape.pre.push_back(pre);
        bool last = l + 1 == layers;
        if (last) {
            act = pre;
        } else {
            act.resize(pre.size());
            for (std::size_t i = 0; i < pre.size(); ++i) act[i] = std::tanh(pre[i]);
        }
    }
    return act;
}

void Mlp::backward(const Tape& tape, std::span<const double> dloss_dout, Gradients& grads) const {
    FWA_CHECK(tape.pre.size() == w_.size(), "tape does not match network depth");
    std::vector<double> delta(dloss_dout.begin(), dloss_dout.end());
    for (std::size_t li = w_.size(); li-- > 0;) {
        int in_n = sizes_[li];
        int out_n = sizes_[li + 1];
        bool last = li + 1 == w_.size();
        if (!last) {
            // delta currently holds dL/d(activation); convert through tanh'.
            for (int o = 0; o < out_n; ++o) {
                double t = std::tanh(tape.pre[li][static_cast<std::size_t>(o)]);
                delta[static_cast<std::size_t>(o)] *= 1.0 - t * t;
            }
        }
        const auto& input = tape.inputs[li];
        for (int o = 0; o < out_n; ++o) {
            double d = delta[static_cast<std::size_t>(o)];
            grads.b[li][static_cast<std::size_t>(o)] += d;
            double* grow = &grads.w[li][static_cast<std::size_t>(o) * in_n];
            for (int i = 0; i < in_n; ++i) grow[i] += d * input[static_cast<std::size_t>(i)];
        }
        if (li > 0) {
            std::vector<double> prev(static_cast<std::size_t>(in_n), 0.0);
            for (int o = 0; o < out_n; ++o) {
                double d = delta[static_cast<std::size_t>(o)];
                const double* row = &w_[li][static_cast<std::size_t>(o) * in_n];
                for (int i = 0; i < in_n; ++i) prev[static_cast<std::size_t>(i)] += d * row[i];
            }
            delta = std::move(prev);
        }
    }
}

Mlp::Gradients Mlp::make_gradients() const {
    Gradients g;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        g.w.emplace_back(w_[l].size(), 0.0);
        g.b.emplace_back(b_[l].size(), 0.0);
    }
    return g;
}

void Mlp::apply_sgd(const Gradients& grads, double lr, double clip) {
    double scale = 1.0;
    if (clip > 0.0) {
        double norm = grads.global_norm();
        if (norm > clip) scale = clip / norm;
    }
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (std::size_t i = 0; i < w_[l].size(); ++i) w_[l][i] -= lr * scale * grads.w[l][i];
        for (std::size_t i = 0; i < b_[l].size(); ++i) b_[l][i] -= lr * scale * grads.b[l][i];
    }
}

std::vector<double> Mlp::flatten() const {
    std::vector<double> out;
    out.reserve(parameter_count());
    for (std::size_t l = 0; l < w_.size(); ++l) {
        out.insert(out.end(), w_[l].begin(), w_[l].end());
        out.insert(out.end(), b_[l].begin(), b_[l].end());
    }
    return out;
}

void Mlp::unflatten(std::span<const double> params) {
    std::size_t k = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) {
        for (double& v : w_[l]) v = params[k++];
        for (double& v : b_[l]) v = params[k++];
    }
    FWA_CHECK(k == params.size(), "parameter vector size mismatch");
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (std::size_t l = 0; l < w_.size(); ++l) n += w_[l].size() + b_[l].size();
    return n;
}

std::string Mlp::to_json() const {
    nlohmann::json j;
    j["sizes"] = sizes_;
    j["weights"] = w_;
    j["biases"] = b_;
    return j.dump();
}

Mlp Mlp::from_json(const std::string& text) {
    nlohmann::json j = nlohmann::json::parse(text);
    Mlp net;
    net.sizes_ = j.at("sizes").get<std::vector<int>>();
    net.w_ = j.at("weights").get<std::vector<std::vector<double>>>();
    net.b_ = j.at("biases").get<std::vector<std::vector<double>>>();
    FWA_CHECK(net.w_.size() + 1 == net.sizes_.size(), "corrupt checkpoint: layer count");
    return net;
}

} // namespace fwa::rl
