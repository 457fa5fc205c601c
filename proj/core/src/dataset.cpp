#include "maskdiff/dataset.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "maskdiff/errors.hpp"

namespace maskdiff {

static constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<DatasetRecord> generate_records(const Denoiser & model, const RewardFn & reward_fn,
                                            int n_samples, int group_size,
                                            const SamplerSettings & settings,
                                            const NoiseSchedule & schedule, const Context & ctx,
                                            int source_stage, Rng & rng) {
    if (group_size < 2) {
        throw validation_error("generate_records: group size must be at least 2");
    }
    if (n_samples < group_size || n_samples % group_size != 0) {
        throw validation_error("generate_records: n_samples must be a positive multiple of group_size");
    }
    if (reward_fn.kind() == RewardFn::Kind::pairwise_bt && group_size != 2) {
        throw validation_error("generate_records: pairwise_bt rewards require group_size 2");
    }
    const Vocabulary vocab = model.vocabulary();

    std::vector<DatasetRecord> records;
    records.reserve(static_cast<size_t>(n_samples));
    for (int i = 0; i < n_samples; ++i) {
        Rng chain = rng.split(static_cast<uint64_t>(i));
        DatasetRecord rec;
        rec.group_id = i / group_size;
        rec.ctx_id = ctx.id;
        rec.seed = chain.seed();
        rec.source_stage = source_stage;
        rec.tokens = draw_sample(model, schedule, ctx, settings, chain);
        if (has_mask(rec.tokens, vocab)) {
            throw numeric_error("generate_records: sampler produced a masked output");
        }
        rec.reward = reward_fn.evaluate(rec.tokens, vocab);
        records.push_back(std::move(rec));
    }

    if (reward_fn.kind() == RewardFn::Kind::pairwise_bt) {
        for (size_t i = 0; i + 1 < records.size(); i += 2) {
            const bool first_wins = records[i].reward >= records[i + 1].reward;
            records[i].reward = first_wins ? 0.0 : kNegInf;
            records[i + 1].reward = first_wins ? kNegInf : 0.0;
        }
    }
    return records;
}

std::vector<PreferenceGroup> generate_offline_dataset(const ReferenceModel & ref,
                                                      const RewardFn & reward_fn, int n_groups,
                                                      int group_size, const SamplerSettings & settings,
                                                      const NoiseSchedule & schedule, const Context & ctx,
                                                      Rng & rng) {
    if (n_groups < 1) {
        throw validation_error("generate_offline_dataset: need at least one group");
    }
    const std::vector<DatasetRecord> records = generate_records(
        ref.get(), reward_fn, n_groups * group_size, group_size, settings, schedule, ctx, 0, rng);
    return to_groups(records, ref.get().vocabulary());
}

std::vector<PreferenceGroup> to_groups(const std::vector<DatasetRecord> & records,
                                       const Vocabulary & vocab) {
    std::vector<PreferenceGroup> groups;
    std::set<int64_t> seen;
    for (size_t i = 0; i < records.size(); ++i) {
        const DatasetRecord & rec = records[i];
        check_clean(rec.tokens, vocab, "dataset record tokens");
        if (i == 0 || records[i - 1].group_id != rec.group_id) {
            if (!seen.insert(rec.group_id).second) {
                throw validation_error("to_groups: group_id " + std::to_string(rec.group_id) +
                                       " reappears after its group ended");
            }
            PreferenceGroup g;
            g.ctx.id = rec.ctx_id;
            groups.push_back(std::move(g));
        }
        PreferenceGroup & g = groups.back();
        if (g.ctx.id != rec.ctx_id) {
            throw validation_error("to_groups: mixed ctx_id within group " + std::to_string(rec.group_id));
        }
        g.completions.push_back(rec.tokens);
        g.rewards.push_back(rec.reward);
    }
    for (const PreferenceGroup & g : groups) {
        bool any_finite = false;
        for (double r : g.rewards) {
            any_finite = any_finite || std::isfinite(r);
        }
        if (!any_finite) {
            throw validation_error("to_groups: a group holds no finite reward");
        }
    }
    return groups;
}

std::vector<DatasetRecord> to_records(const std::vector<PreferenceGroup> & groups, int source_stage,
                                      uint64_t seed_base) {
    std::vector<DatasetRecord> records;
    int64_t gid = 0;
    uint64_t index = 0;
    for (const PreferenceGroup & g : groups) {
        for (size_t i = 0; i < g.completions.size(); ++i) {
            DatasetRecord rec;
            rec.group_id = gid;
            rec.ctx_id = g.ctx.id;
            rec.tokens = g.completions[i];
            rec.reward = g.rewards[i];
            rec.source_stage = source_stage;
            rec.seed = mix64(seed_base ^ index);
            records.push_back(std::move(rec));
            ++index;
        }
        ++gid;
    }
    return records;
}

void save_dataset(const std::string & path, const std::vector<DatasetRecord> & records) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw validation_error("save_dataset: cannot open '" + path + "' for writing");
    }
    for (const DatasetRecord & rec : records) {
        if (std::isnan(rec.reward) || rec.reward == std::numeric_limits<double>::infinity()) {
            throw validation_error("save_dataset: rewards must be finite or -inf");
        }
        nlohmann::json j;
        j["group_id"] = rec.group_id;
        j["ctx_id"] = rec.ctx_id;
        j["tokens"] = rec.tokens;
        if (rec.reward == kNegInf) {
            j["reward"] = "-inf";
        } else {
            j["reward"] = rec.reward;
        }
        j["source_stage"] = rec.source_stage;
        j["seed"] = rec.seed;
        f << j.dump() << '\n';
    }
    if (!f) {
        throw validation_error("save_dataset: write to '" + path + "' failed");
    }
}

static const char * kRecordKeys[] = {"group_id", "ctx_id", "tokens", "reward", "source_stage", "seed"};

std::vector<DatasetRecord> load_dataset(const std::string & path, const Vocabulary & vocab) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw validation_error("load_dataset: cannot open '" + path + "'");
    }
    std::vector<DatasetRecord> records;
    std::string line;
    size_t line_no = 0;
    size_t offset = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const size_t line_start = offset;
        offset += line.size() + 1;
        if (line.empty()) {
            continue;
        }
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error & e) {
            throw validation_error("load_dataset: parse error at byte offset " +
                                   std::to_string(line_start + (e.byte > 0 ? e.byte - 1 : 0)) +
                                   " (line " + std::to_string(line_no) + "): " + e.what());
        }
        if (!j.is_object()) {
            throw validation_error("load_dataset: line " + std::to_string(line_no) + " is not an object");
        }
        for (const auto & [key, value] : j.items()) {
            (void)value;
            bool known = false;
            for (const char * k : kRecordKeys) {
                known = known || key == k;
            }
            if (!known) {
                throw validation_error("load_dataset: unknown key '" + key + "' on line " +
                                       std::to_string(line_no));
            }
        }
        DatasetRecord rec;
        try {
            rec.group_id = j.at("group_id").get<int64_t>();
            rec.ctx_id = j.at("ctx_id").get<std::string>();
            rec.tokens = j.at("tokens").get<Sequence>();
            rec.source_stage = j.at("source_stage").get<int>();
            rec.seed = j.at("seed").get<uint64_t>();
            const nlohmann::json & r = j.at("reward");
            if (r.is_string()) {
                if (r.get<std::string>() != "-inf") {
                    throw validation_error("only the string \"-inf\" is a valid reward sentinel");
                }
                rec.reward = kNegInf;
            } else if (r.is_number()) {
                rec.reward = r.get<double>();
            } else {
                throw validation_error("reward must be a number or \"-inf\"");
            }
        } catch (const nlohmann::json::exception & e) {
            throw validation_error("load_dataset: schema violation on line " + std::to_string(line_no) +
                                   ": " + e.what());
        } catch (const validation_error & e) {
            throw validation_error("load_dataset: schema violation on line " + std::to_string(line_no) +
                                   ": " + e.what());
        }
        for (Token t : rec.tokens) {
            if (!vocab.valid_clean_token(t)) {
                throw validation_error("load_dataset: line " + std::to_string(line_no) +
                                       " holds token " + std::to_string(t) +
                                       (vocab.is_mask(t) ? " (the mask id)" : "") +
                                       ", dataset tokens must be clean");
            }
        }
        records.push_back(std::move(rec));
    }
    return records;
}

}  // namespace maskdiff
