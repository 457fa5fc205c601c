#include "maskdiff/rng.hpp"

#include <cmath>
#include <numbers>

#include "maskdiff/errors.hpp"

namespace maskdiff {

uint64_t mix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

Rng::Rng(uint64_t seed) : seed_(seed), engine_(mix64(seed)) {}

uint64_t Rng::next_u64() {
    return engine_();
}

double Rng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    return uniform() < p;
}

int Rng::below(int n) {
    if (n <= 0) {
        throw validation_error("Rng::below: n must be positive");
    }
    return static_cast<int>(next_u64() % static_cast<uint64_t>(n));
}

int Rng::categorical(std::span<const double> probs) {
    if (probs.empty()) {
        throw validation_error("Rng::categorical: empty distribution");
    }
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw validation_error("Rng::categorical: negative or NaN mass");
        }
        total += p;
    }
    if (total <= 0.0) {
        throw validation_error("Rng::categorical: zero total mass");
    }
    const double u = uniform() * total;
    double acc = 0.0;
    for (size_t i = 0; i < probs.size(); ++i) {
        acc += probs[i];
        if (u < acc) {
            return static_cast<int>(i);
        }
    }
    return static_cast<int>(probs.size() - 1);  // rounding fell off the end
}

double Rng::normal(double mean, double stddev) {
    // Box-Muller without the cached spare, so call order stays simple
    double u1 = uniform();
    while (u1 <= 0.0) {
        u1 = uniform();
    }
    const double u2 = uniform();
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    return mean + stddev * z;
}

Rng Rng::split(uint64_t stream) const {
    return Rng(mix64(seed_ ^ mix64(stream + 1)));
}

}  // namespace maskdiff
