#include "maskdiff/rewards.hpp"

#include <cmath>

#include "maskdiff/errors.hpp"

namespace maskdiff {

int motif_count(const Sequence & x0, const Sequence & motif, const Vocabulary & vocab) {
    if (motif.empty() || motif.size() > x0.size()) {
        throw validation_error("motif_count: motif length must be in [1, sequence length]");
    }
    check_clean(motif, vocab, "motif");
    check_clean(x0, vocab, "motif_count input");
    int count = 0;
    for (size_t start = 0; start + motif.size() <= x0.size(); ++start) {
        bool match = true;
        for (size_t i = 0; i < motif.size(); ++i) {
            if (x0[start + i] != motif[i]) {
                match = false;
                break;
            }
        }
        count += match ? 1 : 0;
    }
    return count;
}

RewardFn RewardFn::motif(Sequence motif) {
    if (motif.empty()) {
        throw validation_error("RewardFn::motif: empty motif");
    }
    RewardFn r;
    r.kind_ = Kind::motif_count;
    r.motif_ = std::move(motif);
    return r;
}

RewardFn RewardFn::composition(std::vector<double> target_freq) {
    if (target_freq.empty()) {
        throw validation_error("RewardFn::composition: empty target frequency vector");
    }
    RewardFn r;
    r.kind_ = Kind::composition;
    r.target_freq_ = std::move(target_freq);
    return r;
}

RewardFn RewardFn::table(std::vector<double> values) {
    if (values.empty()) {
        throw validation_error("RewardFn::table: empty value table");
    }
    RewardFn r;
    r.kind_ = Kind::table;
    r.table_ = std::move(values);
    return r;
}

RewardFn RewardFn::pairwise_bt(RewardFn base) {
    if (base.kind_ == Kind::pairwise_bt) {
        throw validation_error("RewardFn::pairwise_bt: base reward cannot itself be pairwise_bt");
    }
    RewardFn r;
    r.kind_ = Kind::pairwise_bt;
    r.base_ = std::make_shared<RewardFn>(std::move(base));
    return r;
}

const RewardFn & RewardFn::base() const {
    if (kind_ != Kind::pairwise_bt || !base_) {
        throw validation_error("RewardFn::base: only pairwise_bt rewards carry a base");
    }
    return *base_;
}

double RewardFn::evaluate(const Sequence & x0, const Vocabulary & vocab) const {
    switch (kind_) {
        case Kind::motif_count:
            return static_cast<double>(motif_count(x0, motif_, vocab));
        case Kind::composition: {
            check_clean(x0, vocab, "composition input");
            if (static_cast<int>(target_freq_.size()) != vocab.size) {
                throw validation_error("RewardFn::composition: target vector length must equal vocab size");
            }
            std::vector<double> freq(static_cast<size_t>(vocab.size), 0.0);
            for (Token t : x0) {
                freq[static_cast<size_t>(t)] += 1.0 / static_cast<double>(x0.size());
            }
            double dist = 0.0;
            for (size_t v = 0; v < freq.size(); ++v) {
                const double d = freq[v] - target_freq_[v];
                dist += d * d;
            }
            return -dist;
        }
        case Kind::table: {
            check_clean(x0, vocab, "table reward input");
            const int code = clean_code(x0, vocab.size);
            if (code < 0 || static_cast<size_t>(code) >= table_.size()) {
                throw validation_error("RewardFn::table: sequence code outside the table");
            }
            return table_[static_cast<size_t>(code)];
        }
        case Kind::pairwise_bt:
            return base_->evaluate(x0, vocab);
    }
    throw validation_error("RewardFn: unknown kind");
}

nlohmann::json RewardFn::to_json() const {
    nlohmann::json j;
    switch (kind_) {
        case Kind::motif_count:
            j["kind"] = "motif_count";
            j["motif"] = motif_;
            break;
        case Kind::composition:
            j["kind"] = "composition";
            j["target_freq"] = target_freq_;
            break;
        case Kind::table:
            j["kind"] = "table";
            j["values"] = table_;
            break;
        case Kind::pairwise_bt:
            j["kind"] = "pairwise_bt";
            j["base"] = base_->to_json();
            break;
    }
    return j;
}

RewardFn RewardFn::from_json(const nlohmann::json & j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "motif_count") {
        return motif(j.at("motif").get<Sequence>());
    }
    if (kind == "composition") {
        return composition(j.at("target_freq").get<std::vector<double>>());
    }
    if (kind == "table") {
        return table(j.at("values").get<std::vector<double>>());
    }
    if (kind == "pairwise_bt") {
        return pairwise_bt(from_json(j.at("base")));
    }
    throw validation_error("RewardFn: unknown kind '" + kind + "'");
}

}  // namespace maskdiff
