#include "maskdiff/optim.hpp"

#include <cmath>
#include <string>

#include "maskdiff/errors.hpp"

namespace maskdiff {

void adam_step(std::vector<double> & params, const std::vector<double> & grads, AdamState & state,
               const AdamConfig & cfg) {
    if (grads.size() != params.size()) {
        throw validation_error("adam_step: gradient length " + std::to_string(grads.size()) +
                               " does not match parameter length " + std::to_string(params.size()));
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw validation_error("adam_step: optimizer state length does not match parameters");
    }
    for (size_t i = 0; i < grads.size(); ++i) {
        if (!std::isfinite(grads[i])) {
            throw numeric_error("adam_step: non-finite gradient at coordinate " + std::to_string(i) +
                                " (step " + std::to_string(state.step + 1) + ")");
        }
    }

    state.step += 1;
    const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
    for (size_t i = 0; i < params.size(); ++i) {
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * grads[i];
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
        if (cfg.weight_decay != 0.0) {
            params[i] -= cfg.lr * cfg.weight_decay * params[i];
        }
    }
}

double grad_norm(const std::vector<double> & grads) {
    double total = 0.0;
    for (double g : grads) {
        total += g * g;
    }
    return std::sqrt(total);
}

}  // namespace maskdiff
