#include "maskdiff/align.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "maskdiff/dataset.hpp"
#include "maskdiff/errors.hpp"

namespace maskdiff {

void AlignmentConfig::validate() const {
    if (!(beta > 0.0)) {
        throw validation_error("AlignmentConfig: beta must be positive");
    }
    if (group_size < 2) {
        throw validation_error("AlignmentConfig: group size must be at least 2");
    }
    if (steps_per_batch < 1) {
        throw validation_error("AlignmentConfig: steps_per_batch must be at least 1");
    }
    if (epochs < 0) {
        throw validation_error("AlignmentConfig: epochs must be nonnegative");
    }
}

WeightKind AlignmentConfig::weight_from_string(const std::string & s) {
    if (s == "one_minus_alpha") {
        return WeightKind::one_minus_alpha;
    }
    if (s == "uniform") {
        return WeightKind::uniform;
    }
    throw validation_error("AlignmentConfig: unknown weight schedule '" + s + "'");
}

double step_weight(const AlignmentConfig & cfg, const NoiseSchedule & schedule, int t) {
    if (t < 1 || t > schedule.steps()) {
        throw validation_error("step_weight: step " + std::to_string(t) + " outside [1, " +
                               std::to_string(schedule.steps()) + "]");
    }
    const double w = cfg.weight == WeightKind::one_minus_alpha ? 1.0 - schedule.alpha(t) : 1.0;
    if (!(w > 0.0)) {
        throw validation_error("step_weight: w(t) vanished at t=" + std::to_string(t));
    }
    return w;
}

double step_beta(const AlignmentConfig & cfg, const NoiseSchedule & schedule, int t) {
    return cfg.beta / step_weight(cfg, schedule, t);
}

std::vector<double> target_weights(std::span<const double> rewards) {
    if (rewards.size() < 2) {
        throw validation_error("target_weights: need at least 2 rewards");
    }
    double m = -std::numeric_limits<double>::infinity();
    for (double r : rewards) {
        if (std::isnan(r) || r == std::numeric_limits<double>::infinity()) {
            throw validation_error("target_weights: rewards must be finite or -inf");
        }
        m = std::max(m, r);
    }
    if (m == -std::numeric_limits<double>::infinity()) {
        throw validation_error("target_weights: degenerate group, every reward is -inf");
    }
    std::vector<double> w(rewards.size(), 0.0);
    double total = 0.0;
    for (size_t i = 0; i < rewards.size(); ++i) {
        if (rewards[i] != -std::numeric_limits<double>::infinity()) {
            w[i] = std::exp(rewards[i] - m);
            total += w[i];
        }
    }
    for (double & x : w) {
        x /= total;
    }
    return w;
}

double implicit_reward(const Denoiser & model, const ReferenceModel & ref, const Sequence & x0,
                       const Sequence & xt, int t, const Context & ctx, const AlignmentConfig & cfg,
                       const NoiseSchedule & schedule) {
    const double w = step_weight(cfg, schedule, t);
    const double lp_model = logprob_x0(model, x0, xt, t, ctx);
    const double lp_ref = logprob_x0(ref.get(), x0, xt, t, ctx);
    return cfg.beta * (lp_model - lp_ref) / w;
}

static void check_group(const PreferenceGroup & group, const std::vector<Sequence> & xts) {
    if (group.size() < 2) {
        throw validation_error("group_preference_loss: groups need at least 2 completions");
    }
    if (group.rewards.size() != group.completions.size()) {
        throw validation_error("group_preference_loss: rewards and completions disagree in count");
    }
    if (xts.size() != group.completions.size()) {
        throw validation_error("group_preference_loss: corrupted states and completions disagree in count");
    }
}

double group_preference_loss(const Denoiser & model, const ReferenceModel & ref,
                             const PreferenceGroup & group, int t, const std::vector<Sequence> & xts,
                             const AlignmentConfig & cfg, const NoiseSchedule & schedule) {
    check_group(group, xts);
    const std::vector<double> target = target_weights(group.rewards);

    std::vector<double> rtilde(xts.size());
    for (size_t i = 0; i < xts.size(); ++i) {
        rtilde[i] = implicit_reward(model, ref, group.completions[i], xts[i], t, group.ctx, cfg, schedule);
    }
    double m = rtilde[0];
    for (double r : rtilde) {
        m = std::max(m, r);
    }
    double lse = 0.0;
    for (double r : rtilde) {
        lse += std::exp(r - m);
    }
    lse = m + std::log(lse);

    double loss = 0.0;
    for (size_t i = 0; i < rtilde.size(); ++i) {
        loss -= target[i] * (rtilde[i] - lse);
    }
    return loss;
}

Val group_preference_loss_tape(TapedDenoiser & model, const ReferenceModel & ref,
                               const PreferenceGroup & group, std::span<const int> steps,
                               const std::vector<Sequence> & xts, const AlignmentConfig & cfg,
                               const NoiseSchedule & schedule, double * margin_out) {
    check_group(group, xts);
    if (steps.size() != xts.size()) {
        throw validation_error("group_preference_loss_tape: need one step per completion");
    }
    Tape & tape = model.tape();
    const std::vector<double> target = target_weights(group.rewards);

    std::vector<Val> rtilde(xts.size());
    for (size_t i = 0; i < xts.size(); ++i) {
        const int t = steps[i];
        const double scale = cfg.beta / step_weight(cfg, schedule, t);
        const double lp_ref = logprob_x0(ref.get(), group.completions[i], xts[i], t, group.ctx);
        const Val lp_model = model.logprob_x0(group.completions[i], xts[i], t);
        rtilde[i] = tape.scale(tape.shift(lp_model, -lp_ref), scale);
    }
    const Val lse = tape.logsumexp(rtilde);
    Val loss = tape.constant(0.0);
    for (size_t i = 0; i < rtilde.size(); ++i) {
        if (target[i] != 0.0) {
            loss = tape.add(loss, tape.scale(tape.sub(rtilde[i], lse), target[i]));
        }
    }
    loss = tape.neg(loss);

    if (margin_out != nullptr) {
        size_t best = 0;
        for (size_t i = 1; i < group.rewards.size(); ++i) {
            if (group.rewards[i] > group.rewards[best]) {
                best = i;
            }
        }
        double rest = 0.0;
        for (size_t i = 0; i < rtilde.size(); ++i) {
            if (i != best) {
                rest += tape.value(rtilde[i]);
            }
        }
        rest /= static_cast<double>(rtilde.size() - 1);
        *margin_out = tape.value(rtilde[best]) - rest;
    }
    return loss;
}

double EpochStats::mean_loss() const {
    double total = 0.0;
    for (const IterationStats & it : iterations) {
        total += it.mean_loss;
    }
    return iterations.empty() ? 0.0 : total / static_cast<double>(iterations.size());
}

double EpochStats::mean_margin() const {
    double total = 0.0;
    for (const IterationStats & it : iterations) {
        total += it.mean_margin;
    }
    return iterations.empty() ? 0.0 : total / static_cast<double>(iterations.size());
}

double EpochStats::mean_grad_norm() const {
    double total = 0.0;
    for (const IterationStats & it : iterations) {
        total += it.grad_norm;
    }
    return iterations.empty() ? 0.0 : total / static_cast<double>(iterations.size());
}

EpochStats align_epoch(Denoiser & model, const ReferenceModel & ref,
                       const std::vector<PreferenceGroup> & dataset, const AlignmentConfig & cfg,
                       const NoiseSchedule & schedule, AdamState & opt, Rng & rng) {
    cfg.validate();
    if (dataset.empty()) {
        throw validation_error("align_epoch: empty dataset");
    }
    const Vocabulary vocab = model.vocabulary();
    const int L = model.shape().length;
    if (model.shape().steps != schedule.steps()) {
        throw validation_error("align_epoch: schedule step count does not match the model");
    }
    if (ref.get().shape().vocab != model.shape().vocab || ref.get().shape().length != L ||
        ref.get().shape().steps != model.shape().steps) {
        throw validation_error("align_epoch: model and reference shapes are incompatible");
    }
    for (const PreferenceGroup & g : dataset) {
        if (g.size() < 2) {
            throw validation_error("align_epoch: every group needs at least 2 completions");
        }
        for (const Sequence & x : g.completions) {
            if (static_cast<int>(x.size()) != L) {
                throw validation_error("align_epoch: completion length does not match the model");
            }
        }
    }

    std::vector<size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), size_t{0});
    for (size_t i = order.size(); i > 1; --i) {
        std::swap(order[i - 1], order[static_cast<size_t>(rng.below(static_cast<int>(i)))]);
    }

    const int T = schedule.steps();
    AdamConfig adam;
    adam.lr = cfg.lr;

    EpochStats stats;
    std::vector<double> grad(model.params().size());
    int iter = 0;
    for (size_t gi : order) {
        const PreferenceGroup & group = dataset[gi];
        const int n = group.size();

        Tape tape;
        TapedDenoiser taped(tape, model);
        Val total = tape.constant(0.0);
        IterationStats row;
        row.iter = iter;
        double margin_acc = 0.0;

        for (int b = 0; b < cfg.steps_per_batch; ++b) {
            std::vector<int> steps(static_cast<size_t>(n));
            if (cfg.shared_t) {
                const int t = 1 + rng.below(T);
                std::fill(steps.begin(), steps.end(), t);
                row.t_values.push_back(t);
            } else {
                for (int i = 0; i < n; ++i) {
                    steps[static_cast<size_t>(i)] = 1 + rng.below(T);
                    row.t_values.push_back(steps[static_cast<size_t>(i)]);
                }
            }
            std::vector<Sequence> xts(static_cast<size_t>(n));
            for (int i = 0; i < n; ++i) {
                xts[static_cast<size_t>(i)] = forward_corrupt(group.completions[static_cast<size_t>(i)],
                                                              steps[static_cast<size_t>(i)], schedule,
                                                              vocab, rng);
            }
            double margin = 0.0;
            const Val loss = group_preference_loss_tape(taped, ref, group, steps, xts, cfg, schedule,
                                                        &margin);
            total = tape.add(total, loss);
            margin_acc += margin;
        }
        total = tape.scale(total, 1.0 / cfg.steps_per_batch);

        std::fill(grad.begin(), grad.end(), 0.0);
        tape.backward(total, grad);
        adam_step(model.params(), grad, opt, adam);

        row.mean_loss = tape.value(total);
        row.mean_margin = margin_acc / cfg.steps_per_batch;
        row.grad_norm = grad_norm(grad);
        stats.iterations.push_back(std::move(row));
        ++iter;
    }
    return stats;
}

std::vector<PreferenceGroup> iterative_relabel(const Denoiser & model, const RewardFn & reward_fn,
                                               int n_samples, const SamplerSettings & settings,
                                               const NoiseSchedule & schedule, int group_size,
                                               const Context & ctx, Rng & rng) {
    const std::vector<DatasetRecord> records =
        generate_records(model, reward_fn, n_samples, group_size, settings, schedule, ctx, 0, rng);
    return to_groups(records, model.vocabulary());
}

}  // namespace maskdiff
