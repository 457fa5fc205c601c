#pragma once

#include <span>
#include <vector>

#include "maskdiff/denoiser.hpp"
#include "maskdiff/diffusion.hpp"
#include "maskdiff/optim.hpp"
#include "maskdiff/rewards.hpp"
#include "maskdiff/sampler.hpp"

namespace maskdiff {

enum class WeightKind { one_minus_alpha, uniform };

struct AlignmentConfig {
    double beta = 0.5;
    WeightKind weight = WeightKind::one_minus_alpha;
    int group_size = 2;       // N
    int steps_per_batch = 4;  // diffusion steps sampled per iteration
    int epochs = 1;
    double lr = 1e-2;
    // one shared t per group per batch slot; false draws an independent t
    // per completion
    bool shared_t = true;

    void validate() const;
    static WeightKind weight_from_string(const std::string & s);
};

// w(t); positive for t >= 1, invalid at t = 0 under the default schedule
double step_weight(const AlignmentConfig & cfg, const NoiseSchedule & schedule, int t);

// beta_t = beta / w(t)
double step_beta(const AlignmentConfig & cfg, const NoiseSchedule & schedule, int t);

// A context with N completions and their scalar rewards. -inf rewards mark
// pairwise losers; at least one reward must be finite.
struct PreferenceGroup {
    Context ctx;
    std::vector<Sequence> completions;
    std::vector<double> rewards;

    int size() const { return static_cast<int>(completions.size()); }
};

// Reward softmax over a group. -inf entries get exactly zero weight and are
// excluded from the log-sum-exp; all entries -inf is a degenerate group.
std::vector<double> target_weights(std::span<const double> rewards);

// beta * (logprob_x0 under the model - logprob_x0 under the reference) / w(t)
double implicit_reward(const Denoiser & model, const ReferenceModel & ref, const Sequence & x0,
                       const Sequence & xt, int t, const Context & ctx, const AlignmentConfig & cfg,
                       const NoiseSchedule & schedule);

// Cross-entropy between the reward softmax and the implicit-reward softmax,
// both log-sum-exp stabilized. xts[i] must be a corruption of completions[i]
// at the given step.
double group_preference_loss(const Denoiser & model, const ReferenceModel & ref,
                             const PreferenceGroup & group, int t, const std::vector<Sequence> & xts,
                             const AlignmentConfig & cfg, const NoiseSchedule & schedule);

// Same loss recorded on the model's tape (the reference side enters as
// constants). steps may assign a different t per completion (independent-t
// mode); margin_out, when given, receives the implicit-reward margin between
// the best-reward completion and the mean of the rest.
Val group_preference_loss_tape(TapedDenoiser & model, const ReferenceModel & ref,
                               const PreferenceGroup & group, std::span<const int> steps,
                               const std::vector<Sequence> & xts, const AlignmentConfig & cfg,
                               const NoiseSchedule & schedule, double * margin_out = nullptr);

struct IterationStats {
    int iter = 0;
    double mean_loss = 0.0;
    double mean_margin = 0.0;
    double grad_norm = 0.0;
    std::vector<int> t_values;
};

struct EpochStats {
    std::vector<IterationStats> iterations;
    double mean_loss() const;
    double mean_margin() const;
    double mean_grad_norm() const;
};

// One pass over the dataset: per group, draw steps_per_batch diffusion steps,
// corrupt every completion independently at the same shared t (or per-
// completion t), average the group losses, and take one optimizer step.
EpochStats align_epoch(Denoiser & model, const ReferenceModel & ref,
                       const std::vector<PreferenceGroup> & dataset, const AlignmentConfig & cfg,
                       const NoiseSchedule & schedule, AdamState & opt, Rng & rng);

// Draw n_samples completions from the model, score them, and partition into
// fresh groups of group_size within the same context. n_samples must be a
// multiple of group_size.
std::vector<PreferenceGroup> iterative_relabel(const Denoiser & model, const RewardFn & reward_fn,
                                               int n_samples, const SamplerSettings & settings,
                                               const NoiseSchedule & schedule, int group_size,
                                               const Context & ctx, Rng & rng);

}  // namespace maskdiff
