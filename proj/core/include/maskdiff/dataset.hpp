#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "maskdiff/align.hpp"
#include "maskdiff/rewards.hpp"

namespace maskdiff {

// One offline preference record. Serialized as one JSON object per line:
//   {"group_id": int, "ctx_id": str, "tokens": [int], "reward": float|"-inf",
//    "source_stage": int, "seed": int}
// Records with the same group_id are contiguous and form one group.
struct DatasetRecord {
    int64_t group_id = 0;
    std::string ctx_id = "default";
    Sequence tokens;
    double reward = 0.0;  // -inf marks the pairwise loser
    int source_stage = 0;
    uint64_t seed = 0;
};

// Sample n_samples completions from the model, score them with reward_fn and
// partition into consecutive groups of group_size. pairwise_bt rewards
// require group_size 2 and emit reward 0 for the higher base score and the
// -inf sentinel for the other (ties keep the first).
std::vector<DatasetRecord> generate_records(const Denoiser & model, const RewardFn & reward_fn,
                                            int n_samples, int group_size,
                                            const SamplerSettings & settings,
                                            const NoiseSchedule & schedule, const Context & ctx,
                                            int source_stage, Rng & rng);

// Groups of completions drawn i.i.d. from the reference model and scored.
std::vector<PreferenceGroup> generate_offline_dataset(const ReferenceModel & ref,
                                                      const RewardFn & reward_fn, int n_groups,
                                                      int group_size, const SamplerSettings & settings,
                                                      const NoiseSchedule & schedule, const Context & ctx,
                                                      Rng & rng);

std::vector<PreferenceGroup> to_groups(const std::vector<DatasetRecord> & records,
                                       const Vocabulary & vocab);
std::vector<DatasetRecord> to_records(const std::vector<PreferenceGroup> & groups, int source_stage,
                                      uint64_t seed_base);

void save_dataset(const std::string & path, const std::vector<DatasetRecord> & records);

// Lossless round-trip of save_dataset output. Schema violations report the
// line number; a truncated trailing record reports the byte offset.
std::vector<DatasetRecord> load_dataset(const std::string & path, const Vocabulary & vocab);

}  // namespace maskdiff
