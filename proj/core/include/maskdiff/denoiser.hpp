#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "maskdiff/schedule.hpp"
#include "maskdiff/tape.hpp"
#include "maskdiff/types.hpp"

namespace maskdiff {

enum class DenoiserKind { tabular, neural };

struct DenoiserShape {
    int vocab = 0;          // V regular tokens
    int length = 0;         // L
    int steps = 0;          // T
    int hidden = 0;         // neural only
    int step_embed = 0;     // neural only
    int context_arity = 0;  // payload entries the model conditions on (0 here)
};

// Predictor of the clean sequence: maps (x_t, t) to one categorical over the
// V regular tokens per position. Carry-over is structural: an unmasked input
// position always comes back as an exact point mass at its token, and no
// output row ever places mass on the mask id.
//
// Two kinds:
//   tabular  one logit row per (latent state, position, step); exactly
//            analyzable, used by the enumeration oracle
//   neural   token one-hot + learned step embedding through a two-layer
//            perceptron, weights shared across positions
class Denoiser {
  public:
    static Denoiser tabular(const Vocabulary & vocab, int length, int steps);
    // tabular with the same per-position logit rows tied across states and steps
    static Denoiser tabular_tied(const Vocabulary & vocab, int length, int steps,
                                 const std::vector<std::vector<double>> & per_position_logits);
    static Denoiser neural(const Vocabulary & vocab, int length, int steps, int hidden, int step_embed,
                           uint64_t seed);

    DenoiserKind kind() const { return kind_; }
    const DenoiserShape & shape() const { return shape_; }
    Vocabulary vocabulary() const { return Vocabulary(shape_.vocab); }
    uint64_t init_seed() const { return seed_; }

    std::vector<double> & params() { return params_; }
    const std::vector<double> & params() const { return params_; }

    // L rows of V probabilities each; rows sum to 1 within 1e-9
    std::vector<std::vector<double>> forward(const Sequence & xt, int t, const Context & ctx = Context{}) const;

    // log-softmax row for one masked position, length V
    std::vector<double> log_row(const Sequence & xt, int t, int pos) const;

    // flat parameter index of the tabular logit (state, pos, t, v)
    size_t tabular_index(int state_code, int t, int pos, int v) const;
    int state_code(const Sequence & xt) const;
    int n_states() const;

    // checkpoint: one-line JSON header + little-endian f64 parameter block
    void save(const std::string & path) const;
    static Denoiser load(const std::string & path);

  private:
    Denoiser() = default;
    void check_input(const Sequence & xt, int t) const;
    std::vector<double> logits_row(const Sequence & xt, int t, int pos) const;

    friend class TapedDenoiser;

    DenoiserKind kind_ = DenoiserKind::tabular;
    DenoiserShape shape_;
    uint64_t seed_ = 0;
    std::vector<double> params_;

    // neural parameter block offsets
    size_t off_embed_ = 0, off_w1_ = 0, off_b1_ = 0, off_w2_ = 0, off_b2_ = 0;
};

// Frozen snapshot of a denoiser, the anchor for the KL regularizer.
class ReferenceModel {
  public:
    explicit ReferenceModel(Denoiser model) : model_(std::move(model)) {}
    const Denoiser & get() const { return model_; }

  private:
    Denoiser model_;
};

// Sum over masked positions of the model's log-probability of the true
// token; 0 when nothing is masked.
double logprob_x0(const Denoiser & model, const Sequence & x0, const Sequence & xt, int t,
                  const Context & ctx = Context{});

// Tape-recorded evaluation of one denoiser. Rows are cached per (state,
// position, step) so repeated lookups within one loss share subgraphs.
class TapedDenoiser {
  public:
    TapedDenoiser(Tape & tape, const Denoiser & model);

    // V log-softmax values for a masked position
    std::span<const Val> log_row(const Sequence & xt, int t, int pos);

    Val logprob_x0(const Sequence & x0, const Sequence & xt, int t);

    const Denoiser & model() const { return model_; }
    Tape & tape() { return tape_; }

  private:
    Tape & tape_;
    const Denoiser & model_;
    std::unordered_map<int64_t, std::vector<Val>> row_cache_;
};

}  // namespace maskdiff
