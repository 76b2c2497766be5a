// Adam optimizer with bias-corrected moment estimates.

#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tsad/tensor.hpp"

namespace tsad {

using ParamList = std::vector<std::pair<std::string, Tensor>>;

struct AdamState {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::size_t step_count = 0;
    std::vector<std::vector<double>> m;  // first moments, one buffer per parameter
    std::vector<std::vector<double>> v;  // second moments

    static AdamState for_params(const ParamList& params, double lr = 1e-4) {
        AdamState s;
        s.lr = lr;
        s.m.reserve(params.size());
        s.v.reserve(params.size());
        for (const auto& [name, p] : params) {
            (void)name;
            s.m.emplace_back(p.size(), 0.0);
            s.v.emplace_back(p.size(), 0.0);
        }
        return s;
    }
};

// One Adam update over all parameters. Gradients are read, never modified;
// the caller zeroes them between steps.
inline void adam_step(ParamList& params, AdamState& state) {
    if (state.m.size() != params.size()) {
        throw Error("bad_state", "AdamState initialized for " + std::to_string(state.m.size()) +
                                     " parameters, got " + std::to_string(params.size()));
    }
    state.step_count += 1;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi].second;
        if (!p.has_grad()) {
            throw Error("missing_grad", "adam_step: no gradient for parameter '" + params[pi].first + "'");
        }
        const std::vector<double>& g = p.grad();
        std::vector<double>& m = state.m[pi];
        std::vector<double>& v = state.v[pi];
        std::vector<double>& x = p.data();
        for (std::size_t i = 0; i < x.size(); ++i) {
            m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
            v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            x[i] -= state.lr * mhat / (std::sqrt(vhat) + state.eps);
        }
    }
}

inline void zero_grads(ParamList& params) {
    for (auto& [name, p] : params) {
        (void)name;
        p.zero_grad();
    }
}

}  // namespace tsad
