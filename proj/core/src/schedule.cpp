#include "maskdiff/schedule.hpp"

#include <cmath>
#include <numbers>

#include "maskdiff/errors.hpp"

namespace maskdiff {

static void check_alphas(const std::vector<double> & a) {
    if (a.size() < 2) {
        throw validation_error("NoiseSchedule: need at least one step");
    }
    if (a.front() != 1.0) {
        throw validation_error("NoiseSchedule: alpha_0 must be exactly 1");
    }
    if (a.back() != 0.0) {
        throw validation_error("NoiseSchedule: alpha_T must be exactly 0");
    }
    for (size_t t = 0; t < a.size(); ++t) {
        if (!(a[t] >= 0.0 && a[t] <= 1.0)) {
            throw validation_error("NoiseSchedule: alpha_" + std::to_string(t) + " outside [0,1]");
        }
        if (t > 0 && !(a[t] < a[t - 1])) {
            throw validation_error("NoiseSchedule: alphas must be strictly decreasing at t=" + std::to_string(t));
        }
    }
}

double NoiseSchedule::alpha(int t) const {
    if (t < 0 || t > steps()) {
        throw validation_error("NoiseSchedule: step " + std::to_string(t) + " outside [0, " +
                               std::to_string(steps()) + "]");
    }
    return alphas[static_cast<size_t>(t)];
}

NoiseSchedule NoiseSchedule::linear(int steps) {
    if (steps < 1) {
        throw validation_error("NoiseSchedule::linear: steps must be positive");
    }
    std::vector<double> a(static_cast<size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) {
        a[static_cast<size_t>(t)] = 1.0 - static_cast<double>(t) / steps;
    }
    a.front() = 1.0;
    a.back() = 0.0;
    return from_alphas(std::move(a));
}

NoiseSchedule NoiseSchedule::cosine(int steps) {
    if (steps < 1) {
        throw validation_error("NoiseSchedule::cosine: steps must be positive");
    }
    std::vector<double> a(static_cast<size_t>(steps) + 1);
    for (int t = 0; t <= steps; ++t) {
        const double c = std::cos(0.5 * std::numbers::pi * t / steps);
        a[static_cast<size_t>(t)] = c * c;
    }
    a.front() = 1.0;
    a.back() = 0.0;
    return from_alphas(std::move(a));
}

NoiseSchedule NoiseSchedule::from_alphas(std::vector<double> alphas) {
    check_alphas(alphas);
    NoiseSchedule s;
    s.alphas = std::move(alphas);
    return s;
}

NoiseSchedule NoiseSchedule::make(const std::string & kind, int steps) {
    if (kind == "linear") {
        return linear(steps);
    }
    if (kind == "cosine") {
        return cosine(steps);
    }
    throw validation_error("NoiseSchedule: unknown kind '" + kind + "'");
}

nlohmann::json NoiseSchedule::to_json() const {
    return nlohmann::json(alphas);
}

NoiseSchedule NoiseSchedule::from_json(const nlohmann::json & j) {
    if (!j.is_array()) {
        throw validation_error("NoiseSchedule: expected a JSON array of alpha values");
    }
    return from_alphas(j.get<std::vector<double>>());
}

}  // namespace maskdiff
