#pragma once

#include <cstdint>
#include <vector>

namespace maskdiff {

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled, applied directly to the parameters
};

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    int64_t step = 0;
};

// One Adam update. Deterministic given identical inputs; aborts with a
// numeric_error naming the first offending coordinate if any gradient entry
// is non-finite.
void adam_step(std::vector<double> & params, const std::vector<double> & grads, AdamState & state,
               const AdamConfig & cfg);

double grad_norm(const std::vector<double> & grads);

}  // namespace maskdiff
