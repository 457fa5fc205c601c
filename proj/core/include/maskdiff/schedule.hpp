#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace maskdiff {

// Survival probabilities alpha_0..alpha_T over T discrete corruption steps.
// alpha_0 = 1, alpha_T = 0, strictly decreasing; a token survives step t
// with probability alpha_t, otherwise it is masked.
struct NoiseSchedule {
    std::vector<double> alphas;

    int steps() const { return static_cast<int>(alphas.size()) - 1; }
    double alpha(int t) const;

    static NoiseSchedule linear(int steps);
    static NoiseSchedule cosine(int steps);
    static NoiseSchedule from_alphas(std::vector<double> alphas);
    static NoiseSchedule make(const std::string & kind, int steps);

    nlohmann::json to_json() const;
    static NoiseSchedule from_json(const nlohmann::json & j);
};

}  // namespace maskdiff
