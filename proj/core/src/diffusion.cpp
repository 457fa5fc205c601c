#include "maskdiff/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "maskdiff/errors.hpp"

namespace maskdiff {

double safe_log(double p) {
    return std::log(std::max(p, kProbFloor));
}

Sequence forward_corrupt(const Sequence & x0, int t, const NoiseSchedule & schedule,
                         const Vocabulary & vocab, Rng & rng) {
    if (t < 0 || t > schedule.steps()) {
        throw validation_error("forward_corrupt: step " + std::to_string(t) + " outside [0, " +
                               std::to_string(schedule.steps()) + "]");
    }
    check_clean(x0, vocab, "forward_corrupt input");
    const double alpha = schedule.alpha(t);
    Sequence xt(x0.size());
    for (size_t i = 0; i < x0.size(); ++i) {
        xt[i] = rng.uniform() < alpha ? x0[i] : vocab.mask_id();
    }
    return xt;
}

double posterior_unmask_prob(int s, int t, const NoiseSchedule & schedule) {
    if (s >= t) {
        throw validation_error("posterior_unmask_prob: need s < t, got s=" + std::to_string(s) +
                               " t=" + std::to_string(t));
    }
    if (s < 0 || t > schedule.steps()) {
        throw validation_error("posterior_unmask_prob: steps outside [0, " +
                               std::to_string(schedule.steps()) + "]");
    }
    const double at = schedule.alpha(t);
    if (1.0 - at == 0.0) {
        throw validation_error("posterior_unmask_prob: degenerate at t=" + std::to_string(t) +
                               " (alpha_t = 1)");
    }
    return (schedule.alpha(s) - at) / (1.0 - at);
}

std::vector<std::vector<double>> reverse_step_distribution(const Sequence & xt, int s, int t,
                                                           const std::vector<std::vector<double>> & x0_pred,
                                                           const NoiseSchedule & schedule,
                                                           const Vocabulary & vocab) {
    check_state(xt, vocab, "reverse_step_distribution state");
    if (x0_pred.size() != xt.size()) {
        throw validation_error("reverse_step_distribution: prediction row count does not match length");
    }
    const double u = posterior_unmask_prob(s, t, schedule);
    const int V = vocab.size;

    std::vector<std::vector<double>> rows(xt.size());
    for (size_t pos = 0; pos < xt.size(); ++pos) {
        std::vector<double> row(static_cast<size_t>(V) + 1, 0.0);
        if (!vocab.is_mask(xt[pos])) {
            row[static_cast<size_t>(xt[pos])] = 1.0;
        } else {
            const std::vector<double> & pred = x0_pred[pos];
            if (static_cast<int>(pred.size()) != V) {
                throw validation_error("reverse_step_distribution: prediction row at position " +
                                       std::to_string(pos) + " has wrong width");
            }
            double total = 0.0;
            for (double p : pred) {
                if (!(p >= 0.0) || !std::isfinite(p)) {
                    throw validation_error("reverse_step_distribution: invalid probability in row " +
                                           std::to_string(pos));
                }
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-9) {
                throw validation_error("reverse_step_distribution: prediction row at position " +
                                       std::to_string(pos) + " sums to " + std::to_string(total));
            }
            for (int v = 0; v < V; ++v) {
                row[static_cast<size_t>(v)] = u * pred[static_cast<size_t>(v)] / total;
            }
            row[static_cast<size_t>(V)] = 1.0 - u;
        }
        rows[pos] = std::move(row);
    }
    return rows;
}

double nelbo(const Sequence & x0, const Denoiser & model, const NoiseSchedule & schedule,
             const Context & ctx, int mc_draws, Rng & rng) {
    if (mc_draws < 1) {
        throw validation_error("nelbo: mc_draws must be at least 1");
    }
    const Vocabulary vocab = model.vocabulary();
    check_clean(x0, vocab, "nelbo input");
    const int T = schedule.steps();

    double total = 0.0;
    for (int draw = 0; draw < mc_draws; ++draw) {
        for (int t = 1; t <= T; ++t) {
            const Sequence xt = forward_corrupt(x0, t, schedule, vocab, rng);
            const double coeff = (schedule.alpha(t) - schedule.alpha(t - 1)) / (1.0 - schedule.alpha(t));
            total += coeff * logprob_x0(model, x0, xt, t, ctx);
        }
    }
    return total / mc_draws;
}

Val nelbo_tape(TapedDenoiser & model, const Sequence & x0, const NoiseSchedule & schedule, int mc_draws,
               Rng & rng) {
    if (mc_draws < 1) {
        throw validation_error("nelbo_tape: mc_draws must be at least 1");
    }
    const Vocabulary vocab = model.model().vocabulary();
    check_clean(x0, vocab, "nelbo input");
    Tape & tape = model.tape();
    const int T = schedule.steps();

    Val total = tape.constant(0.0);
    for (int draw = 0; draw < mc_draws; ++draw) {
        for (int t = 1; t <= T; ++t) {
            const Sequence xt = forward_corrupt(x0, t, schedule, vocab, rng);
            const double coeff = (schedule.alpha(t) - schedule.alpha(t - 1)) / (1.0 - schedule.alpha(t));
            total = tape.add(total, tape.scale(model.logprob_x0(x0, xt, t), coeff));
        }
    }
    return tape.scale(total, 1.0 / mc_draws);
}

}  // namespace maskdiff
