#pragma once

#include <vector>

#include "maskdiff/denoiser.hpp"
#include "maskdiff/rng.hpp"
#include "maskdiff/schedule.hpp"
#include "maskdiff/types.hpp"

namespace maskdiff {

// floor applied before taking logs of plain probabilities
inline constexpr double kProbFloor = 1e-12;

double safe_log(double p);

// Each position independently keeps its token with probability alpha_t,
// otherwise becomes the mask id. x0 must be mask-free; 0 <= t <= T.
Sequence forward_corrupt(const Sequence & x0, int t, const NoiseSchedule & schedule,
                         const Vocabulary & vocab, Rng & rng);

// Probability that a masked position resolves when stepping t -> s:
// (alpha_s - alpha_t) / (1 - alpha_t). Requires 0 <= s < t <= T.
double posterior_unmask_prob(int s, int t, const NoiseSchedule & schedule);

// One reverse step: L rows over V+1 entries (mask last). Unmasked positions
// carry over as point masses; masked positions put u * x0_pred on the clean
// tokens and 1-u on mask.
std::vector<std::vector<double>> reverse_step_distribution(const Sequence & xt, int s, int t,
                                                           const std::vector<std::vector<double>> & x0_pred,
                                                           const NoiseSchedule & schedule,
                                                           const Vocabulary & vocab);

// Monte-Carlo negative evidence lower bound: full sum over t = 1..T with one
// fresh corruption draw per step per repeat, averaged over mc_draws repeats.
// Summands pair the nonpositive coefficient (alpha_t - alpha_{t-1})/(1 -
// alpha_t) with the nonpositive masked log-likelihood, so the estimate is
// nonnegative draw by draw.
double nelbo(const Sequence & x0, const Denoiser & model, const NoiseSchedule & schedule,
             const Context & ctx, int mc_draws, Rng & rng);

// Same estimator recorded on a tape, for training and gradient checks. The
// corruption draws are consumed from rng exactly as in nelbo.
Val nelbo_tape(TapedDenoiser & model, const Sequence & x0, const NoiseSchedule & schedule, int mc_draws,
               Rng & rng);

}  // namespace maskdiff
