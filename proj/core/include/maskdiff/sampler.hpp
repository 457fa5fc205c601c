#pragma once

#include <string>
#include <vector>

#include "maskdiff/denoiser.hpp"
#include "maskdiff/rng.hpp"
#include "maskdiff/schedule.hpp"

namespace maskdiff {

enum class SampleStrategy { ancestral, low_confidence };

struct SamplerSettings {
    SampleStrategy strategy = SampleStrategy::ancestral;
    int steps = 0;       // 0 = take T from the schedule; otherwise must match it
    int block_size = 0;  // low_confidence only; must divide L
    uint64_t seed = 0;

    static SampleStrategy strategy_from_string(const std::string & s);
};

// Reverse chain t = T..1 drawing x_{t-1} from the one-step posterior mixture.
// The output is mask-free because alpha_0 = 1 forces the final unmasking.
Sequence ancestral_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                          Rng & rng);

// Semi-autoregressive greedy decoding: blocks left to right, T/num_blocks
// steps per block. Each step tentatively decodes every masked position in
// the active block (argmax token), keeps the ceil(masked/steps-left) most
// confident ones (confidence = max decoded-token probability, ties broken by
// lowest position index) and re-masks the rest.
Sequence low_confidence_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                               int block_size, Rng & rng);

Sequence draw_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                     const SamplerSettings & settings, Rng & rng);

// n independent chains with per-chain derived seeds
std::vector<Sequence> draw_samples(const Denoiser & model, const NoiseSchedule & schedule,
                                   const Context & ctx, const SamplerSettings & settings, int n, Rng & rng);

}  // namespace maskdiff
