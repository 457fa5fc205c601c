#pragma once

#include <memory>
#include <nlohmann/json.hpp>
#include <vector>

#include "maskdiff/types.hpp"

namespace maskdiff {

// Overlapping occurrences of motif in x0. Motif entries must be clean tokens.
int motif_count(const Sequence & x0, const Sequence & motif, const Vocabulary & vocab);

// Deterministic scalar reward on mask-free sequences.
//
//   motif_count   number of overlapping motif matches
//   composition   negative squared distance between the sequence's token
//                 frequencies and a target frequency vector
//   table         explicit value per clean code (enumerable tasks)
//   pairwise_bt   wraps a base reward used as a comparison score; dataset
//                 generation turns each pair into reward 0 for the winner
//                 and the -inf sentinel for the loser
class RewardFn {
  public:
    enum class Kind { motif_count, composition, table, pairwise_bt };

    static RewardFn motif(Sequence motif);
    static RewardFn composition(std::vector<double> target_freq);
    static RewardFn table(std::vector<double> values);
    static RewardFn pairwise_bt(RewardFn base);

    Kind kind() const { return kind_; }
    // pairwise_bt evaluates its base score; the sentinel labels are a
    // dataset-generation construct, not a property of the function
    double evaluate(const Sequence & x0, const Vocabulary & vocab) const;
    const RewardFn & base() const;

    nlohmann::json to_json() const;
    static RewardFn from_json(const nlohmann::json & j);

  private:
    RewardFn() = default;

    Kind kind_ = Kind::motif_count;
    Sequence motif_;
    std::vector<double> target_freq_;
    std::vector<double> table_;
    std::shared_ptr<const RewardFn> base_;
};

}  // namespace maskdiff
