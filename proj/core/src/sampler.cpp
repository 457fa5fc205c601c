#include "maskdiff/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "maskdiff/diffusion.hpp"
#include "maskdiff/errors.hpp"

namespace maskdiff {

SampleStrategy SamplerSettings::strategy_from_string(const std::string & s) {
    if (s == "ancestral") {
        return SampleStrategy::ancestral;
    }
    if (s == "low_confidence") {
        return SampleStrategy::low_confidence;
    }
    throw validation_error("SamplerSettings: unknown strategy '" + s + "'");
}

Sequence ancestral_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                          Rng & rng) {
    const Vocabulary vocab = model.vocabulary();
    const int T = schedule.steps();
    if (T != model.shape().steps) {
        throw validation_error("ancestral_sample: schedule has " + std::to_string(T) +
                               " steps but the model was built for " + std::to_string(model.shape().steps));
    }
    Sequence x(static_cast<size_t>(model.shape().length), vocab.mask_id());
    for (int t = T; t >= 1; --t) {
        const auto pred = model.forward(x, t, ctx);
        const auto rows = reverse_step_distribution(x, t - 1, t, pred, schedule, vocab);
        for (size_t pos = 0; pos < x.size(); ++pos) {
            if (vocab.is_mask(x[pos])) {
                x[pos] = static_cast<Token>(rng.categorical(rows[pos]));
            }
        }
    }
    if (has_mask(x, vocab)) {
        throw numeric_error("ancestral_sample: output still masked after the final step");
    }
    return x;
}

Sequence low_confidence_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                               int block_size, Rng & rng) {
    (void)rng;  // greedy decode with a fixed tie-break, nothing to draw
    const Vocabulary vocab = model.vocabulary();
    const int L = model.shape().length;
    const int T = schedule.steps();
    if (T != model.shape().steps) {
        throw validation_error("low_confidence_sample: schedule step count does not match the model");
    }
    if (block_size < 1 || L % block_size != 0) {
        throw validation_error("low_confidence_sample: block_size must divide the sequence length");
    }
    const int num_blocks = L / block_size;
    if (T % num_blocks != 0) {
        throw validation_error("low_confidence_sample: " + std::to_string(num_blocks) +
                               " blocks do not divide " + std::to_string(T) + " steps");
    }
    const int steps_per_block = T / num_blocks;

    Sequence x(static_cast<size_t>(L), vocab.mask_id());
    int t = T;
    for (int block = 0; block < num_blocks; ++block) {
        const int begin = block * block_size;
        const int end = begin + block_size;
        for (int step = 0; step < steps_per_block; ++step, --t) {
            std::vector<int> masked;
            for (int pos = begin; pos < end; ++pos) {
                if (vocab.is_mask(x[static_cast<size_t>(pos)])) {
                    masked.push_back(pos);
                }
            }
            if (masked.empty()) {
                continue;
            }
            const int steps_left = steps_per_block - step;
            const int quota = static_cast<int>(
                (masked.size() + static_cast<size_t>(steps_left) - 1) / static_cast<size_t>(steps_left));

            struct Candidate {
                double confidence;
                int pos;
                Token token;
            };
            std::vector<Candidate> candidates;
            candidates.reserve(masked.size());
            for (int pos : masked) {
                const std::vector<double> lr = model.log_row(x, t, pos);
                int best = 0;
                for (int v = 1; v < vocab.size; ++v) {
                    if (lr[static_cast<size_t>(v)] > lr[static_cast<size_t>(best)]) {
                        best = v;
                    }
                }
                candidates.push_back(Candidate{std::exp(lr[static_cast<size_t>(best)]), pos,
                                               static_cast<Token>(best)});
            }
            std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate & a, const Candidate & b) {
                if (a.confidence != b.confidence) {
                    return a.confidence > b.confidence;
                }
                return a.pos < b.pos;
            });
            for (int i = 0; i < quota && i < static_cast<int>(candidates.size()); ++i) {
                x[static_cast<size_t>(candidates[static_cast<size_t>(i)].pos)] =
                    candidates[static_cast<size_t>(i)].token;
            }
        }
    }
    if (has_mask(x, vocab)) {
        throw numeric_error("low_confidence_sample: block schedule left masked positions");
    }
    return x;
}

Sequence draw_sample(const Denoiser & model, const NoiseSchedule & schedule, const Context & ctx,
                     const SamplerSettings & settings, Rng & rng) {
    if (settings.steps != 0 && settings.steps != schedule.steps()) {
        throw validation_error("draw_sample: settings.steps=" + std::to_string(settings.steps) +
                               " does not match the schedule's " + std::to_string(schedule.steps()));
    }
    if (settings.strategy == SampleStrategy::ancestral) {
        return ancestral_sample(model, schedule, ctx, rng);
    }
    return low_confidence_sample(model, schedule, ctx, settings.block_size, rng);
}

std::vector<Sequence> draw_samples(const Denoiser & model, const NoiseSchedule & schedule,
                                   const Context & ctx, const SamplerSettings & settings, int n, Rng & rng) {
    if (n < 0) {
        throw validation_error("draw_samples: negative sample count");
    }
    std::vector<Sequence> out;
    out.reserve(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        Rng chain = rng.split(static_cast<uint64_t>(i));
        out.push_back(draw_sample(model, schedule, ctx, settings, chain));
    }
    return out;
}

}  // namespace maskdiff
