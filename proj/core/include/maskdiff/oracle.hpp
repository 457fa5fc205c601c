#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "maskdiff/align.hpp"
#include "maskdiff/denoiser.hpp"
#include "maskdiff/schedule.hpp"
#include "maskdiff/types.hpp"

namespace maskdiff {

// hard size caps for full enumeration
inline constexpr int kOracleMaxVocab = 4;
inline constexpr int kOracleMaxLength = 4;
inline constexpr int kOracleMaxSteps = 4;

// Exact clean-sequence marginal of a denoiser's reverse chain, computed by
// composing one-step kernels from the all-mask start. Returned over clean
// codes; sizes are validated against an enumeration budget.
std::vector<double> chain_marginal(const Denoiser & model, const NoiseSchedule & schedule);

// Same marginal summed over explicit trajectories; the independent route for
// cross-checking chain_marginal.
std::vector<double> chain_marginal_by_trajectories(const Denoiser & model, const NoiseSchedule & schedule);

struct TrajectoryIdentityReport {
    uint64_t instance_seed = 0;
    int vocab = 0, length = 0, steps = 0;
    double beta = 0.0;
    double max_log_residual = 0.0;   // max over trajectories |log a - log b|
    double tv = 0.0;                 // total variation between the two joints
    double normalization_gap = 0.0;  // |sum of the induced joint - 1|
    double forward_reverse_gap = 0.0;  // reference joint computed two ways
    double marginal_consistency = 0.0;  // reported only, see verify notes
    nlohmann::json to_json() const;
};

struct StepwiseConvergenceReport {
    uint64_t instance_seed = 0;
    int vocab = 0, length = 0, steps = 0;
    double beta = 0.0;
    double tv_after = 0.0;  // max over (t, reachable x_t) of TV to the tilted posterior
    int iters_used = 0;
    double final_loss = 0.0;
    bool converged = true;
    std::string note;
    nlohmann::json to_json() const;
};

// Fully enumerated tiny instance: a reference model, a reward value for every
// clean sequence, and a schedule small enough to tabulate every latent state
// and every reverse trajectory. All derived distributions live in log domain.
//
// The reference posterior here conditions the model's clean-sequence
// marginal on the revealed tokens. Under the forward-process coupling this
// is exactly the Bayes posterior of x_0 given the latent state, independent
// of the step index, and it is self-consistent: composing the kernels it
// induces reproduces the joint it came from. That closure is what makes the
// identity checks below exact rather than approximate.
class EnumeratedSystem {
  public:
    EnumeratedSystem(const Vocabulary & vocab, int length, NoiseSchedule schedule, ReferenceModel ref,
                     std::vector<double> reward_table, AlignmentConfig cfg, uint64_t instance_seed = 0);

    int n_clean() const { return n_clean_; }
    int n_states() const { return n_states_; }
    const Vocabulary & vocab() const { return vocab_; }
    int length() const { return length_; }
    const NoiseSchedule & schedule() const { return schedule_; }
    const AlignmentConfig & config() const { return cfg_; }
    const ReferenceModel & reference() const { return ref_; }
    const std::vector<double> & reward_table() const { return reward_; }

    // log of the reference chain's clean marginal, indexed by clean code
    const std::vector<double> & log_marginal() const { return log_pi0_; }

    // clean codes consistent with the revealed tokens of xt
    std::vector<int> consistent_clean(const Sequence & xt) const;

    // exact p_ref(x0 | xt), dense over clean codes, zero off support
    std::vector<double> posterior_ref(const Sequence & xt) const;

    // exact tilted posterior p*(x0 | xt, t) with beta_t = beta / w(t)
    std::vector<double> optimal_posterior(const Sequence & xt, int t, double beta) const;

    // log reference kernel and log tilted kernel for one reverse transition
    double log_ref_kernel(const Sequence & x_prev, const Sequence & xt, int t) const;
    double log_tilted_kernel(const Sequence & x_prev, const Sequence & xt, int t, double beta) const;

    // per-transition reward: log of the ratio of tilted expectations over
    // the completions of x_prev versus the completions of xt
    double transition_reward(const Sequence & x_prev, const Sequence & xt, int t, double beta) const;
    // same value through the induced kernels, the second derivation route
    double transition_reward_via_kernels(const Sequence & x_prev, const Sequence & xt, int t,
                                         double beta) const;

    // log partition functions
    double log_partition_reward() const;                                   // E_pi0[exp(r)]
    double log_partition_step(const Sequence & xt, int t, double beta) const;  // E[exp(r/beta_t)]
    double log_partition_model(const Sequence & xt, int t, double beta, const Denoiser & model) const;

    // forward-process probability of observing state xt at step t
    double state_weight(const Sequence & xt, int t) const;

    // Builds the joint induced by the tilted per-step kernels and compares it
    // against the reference joint times exp(sum of transition rewards).
    // kernel_perturbation > 0 injects that much probability mass into one
    // kernel entry, for sensitivity smoke tests.
    TrajectoryIdentityReport verify_trajectory_identity(double beta, double kernel_perturbation = 0.0) const;

    // Full-batch gradient descent on the exact distribution-matching
    // objective for a tabular model initialized at the reference, reporting
    // the worst-case TV to the tilted posterior. tol stops early once the
    // worst TV falls below it.
    StepwiseConvergenceReport verify_stepwise_convergence(double beta, int max_iters, double lr,
                                                          double tol = 1e-5) const;

  private:
    double beta_t(int t, double beta) const;
    // log sum over clean codes of exp(log_pi0 + tilt * reward), restricted
    // to the completions of the given state
    double log_restricted_sum(const Sequence & xt, double tilt) const;

    Vocabulary vocab_;
    int length_ = 0;
    NoiseSchedule schedule_;
    ReferenceModel ref_;
    std::vector<double> reward_;
    AlignmentConfig cfg_;
    uint64_t instance_seed_ = 0;
    int n_clean_ = 0;
    int n_states_ = 0;
    std::vector<double> log_pi0_;
};

struct OracleInstanceParams {
    int vocab = 2;
    int length = 2;
    int steps = 2;
    double reward_range = 2.0;  // rewards uniform in [-range, range]
    uint64_t seed = 0;
    // tie the reference rows across states and steps (a product reference);
    // required for convergence checks, where the factorized family must be
    // able to represent the tilted optimum
    bool product_reference = false;
};

EnumeratedSystem make_random_system(const OracleInstanceParams & params, const AlignmentConfig & cfg);

}  // namespace maskdiff
