#include "maskdiff/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "maskdiff/errors.hpp"
#include "maskdiff/rng.hpp"

namespace maskdiff {

static constexpr size_t kMaxParams = size_t{1} << 26;

static size_t checked_pow(int base, int exp) {
    size_t r = 1;
    for (int i = 0; i < exp; ++i) {
        r *= static_cast<size_t>(base);
        if (r > kMaxParams) {
            throw validation_error("Denoiser: state space too large for a tabular model");
        }
    }
    return r;
}

Denoiser Denoiser::tabular(const Vocabulary & vocab, int length, int steps) {
    if (length < 1 || steps < 1) {
        throw validation_error("Denoiser::tabular: length and steps must be positive");
    }
    Denoiser d;
    d.kind_ = DenoiserKind::tabular;
    d.shape_ = DenoiserShape{vocab.size, length, steps, 0, 0, 0};
    const size_t states = checked_pow(vocab.size + 1, length);
    const size_t total = states * static_cast<size_t>(steps) * static_cast<size_t>(length) *
                         static_cast<size_t>(vocab.size);
    if (total > kMaxParams) {
        throw validation_error("Denoiser::tabular: parameter table of " + std::to_string(total) +
                               " entries exceeds the cap");
    }
    d.params_.assign(total, 0.0);  // zero logits: uniform rows
    return d;
}

Denoiser Denoiser::tabular_tied(const Vocabulary & vocab, int length, int steps,
                                const std::vector<std::vector<double>> & per_position_logits) {
    if (static_cast<int>(per_position_logits.size()) != length) {
        throw validation_error("Denoiser::tabular_tied: need one logit row per position");
    }
    Denoiser d = tabular(vocab, length, steps);
    for (int pos = 0; pos < length; ++pos) {
        if (static_cast<int>(per_position_logits[static_cast<size_t>(pos)].size()) != vocab.size) {
            throw validation_error("Denoiser::tabular_tied: logit row length must equal the vocabulary size");
        }
    }
    const int states = d.n_states();
    for (int t = 1; t <= steps; ++t) {
        for (int code = 0; code < states; ++code) {
            for (int pos = 0; pos < length; ++pos) {
                for (int v = 0; v < vocab.size; ++v) {
                    d.params_[d.tabular_index(code, t, pos, v)] =
                        per_position_logits[static_cast<size_t>(pos)][static_cast<size_t>(v)];
                }
            }
        }
    }
    return d;
}

Denoiser Denoiser::neural(const Vocabulary & vocab, int length, int steps, int hidden, int step_embed,
                          uint64_t seed) {
    if (length < 1 || steps < 1 || hidden < 1 || step_embed < 1) {
        throw validation_error("Denoiser::neural: all dimensions must be positive");
    }
    Denoiser d;
    d.kind_ = DenoiserKind::neural;
    d.shape_ = DenoiserShape{vocab.size, length, steps, hidden, step_embed, 0};
    d.seed_ = seed;

    const size_t V = static_cast<size_t>(vocab.size);
    const size_t T = static_cast<size_t>(steps);
    const size_t H = static_cast<size_t>(hidden);
    const size_t E = static_cast<size_t>(step_embed);
    const size_t in = V + 1 + E;

    d.off_embed_ = 0;
    d.off_w1_ = d.off_embed_ + T * E;
    d.off_b1_ = d.off_w1_ + H * in;
    d.off_w2_ = d.off_b1_ + H;
    d.off_b2_ = d.off_w2_ + V * H;
    const size_t total = d.off_b2_ + V;
    if (total > kMaxParams) {
        throw validation_error("Denoiser::neural: parameter count exceeds the cap");
    }
    d.params_.assign(total, 0.0);

    Rng rng(seed);
    for (size_t i = 0; i < T * E; ++i) {
        d.params_[d.off_embed_ + i] = rng.normal(0.0, 1.0);
    }
    const double s1 = 1.0 / std::sqrt(static_cast<double>(in));
    for (size_t i = 0; i < H * in; ++i) {
        d.params_[d.off_w1_ + i] = rng.normal(0.0, s1);
    }
    const double s2 = 1.0 / std::sqrt(static_cast<double>(H));
    for (size_t i = 0; i < V * H; ++i) {
        d.params_[d.off_w2_ + i] = rng.normal(0.0, s2);
    }
    return d;
}

int Denoiser::n_states() const {
    size_t r = 1;
    for (int i = 0; i < shape_.length; ++i) {
        r *= static_cast<size_t>(shape_.vocab + 1);
    }
    return static_cast<int>(r);
}

int Denoiser::state_code(const Sequence & xt) const {
    int code = 0;
    for (int pos = shape_.length - 1; pos >= 0; --pos) {
        code = code * (shape_.vocab + 1) + xt[static_cast<size_t>(pos)];
    }
    return code;
}

size_t Denoiser::tabular_index(int state_code, int t, int pos, int v) const {
    const size_t L = static_cast<size_t>(shape_.length);
    const size_t V = static_cast<size_t>(shape_.vocab);
    const size_t states = static_cast<size_t>(n_states());
    return ((static_cast<size_t>(t - 1) * states + static_cast<size_t>(state_code)) * L +
            static_cast<size_t>(pos)) * V + static_cast<size_t>(v);
}

void Denoiser::check_input(const Sequence & xt, int t) const {
    if (static_cast<int>(xt.size()) != shape_.length) {
        throw validation_error("Denoiser: sequence length " + std::to_string(xt.size()) +
                               " does not match the model's configured length " +
                               std::to_string(shape_.length));
    }
    if (t < 1 || t > shape_.steps) {
        throw validation_error("Denoiser: step " + std::to_string(t) + " outside [1, " +
                               std::to_string(shape_.steps) + "]");
    }
    const Vocabulary vocab(shape_.vocab);
    check_state(xt, vocab, "Denoiser input");
}

std::vector<double> Denoiser::logits_row(const Sequence & xt, int t, int pos) const {
    const int V = shape_.vocab;
    std::vector<double> z(static_cast<size_t>(V));
    if (kind_ == DenoiserKind::tabular) {
        const int code = state_code(xt);
        for (int v = 0; v < V; ++v) {
            z[static_cast<size_t>(v)] = params_[tabular_index(code, t, pos, v)];
        }
        return z;
    }
    const int H = shape_.hidden;
    const int E = shape_.step_embed;
    const int in = V + 1 + E;
    const Token tok = xt[static_cast<size_t>(pos)];
    std::vector<double> h(static_cast<size_t>(H));
    for (int j = 0; j < H; ++j) {
        double acc = params_[off_b1_ + static_cast<size_t>(j)];
        // one-hot input: only the token column of W1 contributes
        acc += params_[off_w1_ + static_cast<size_t>(j) * static_cast<size_t>(in) + static_cast<size_t>(tok)];
        for (int e = 0; e < E; ++e) {
            acc += params_[off_w1_ + static_cast<size_t>(j) * static_cast<size_t>(in) +
                           static_cast<size_t>(V + 1 + e)] *
                   params_[off_embed_ + static_cast<size_t>(t - 1) * static_cast<size_t>(E) +
                           static_cast<size_t>(e)];
        }
        h[static_cast<size_t>(j)] = std::tanh(acc);
    }
    for (int v = 0; v < V; ++v) {
        double acc = params_[off_b2_ + static_cast<size_t>(v)];
        for (int j = 0; j < H; ++j) {
            acc += params_[off_w2_ + static_cast<size_t>(v) * static_cast<size_t>(H) +
                           static_cast<size_t>(j)] * h[static_cast<size_t>(j)];
        }
        z[static_cast<size_t>(v)] = acc;
    }
    return z;
}

std::vector<double> Denoiser::log_row(const Sequence & xt, int t, int pos) const {
    check_input(xt, t);
    std::vector<double> z = logits_row(xt, t, pos);
    double m = z[0];
    for (double v : z) {
        m = std::max(m, v);
    }
    double total = 0.0;
    for (double v : z) {
        total += std::exp(v - m);
    }
    const double lse = m + std::log(total);
    for (double & v : z) {
        v -= lse;
    }
    return z;
}

std::vector<std::vector<double>> Denoiser::forward(const Sequence & xt, int t, const Context &) const {
    check_input(xt, t);
    const Vocabulary vocab(shape_.vocab);
    std::vector<std::vector<double>> rows(xt.size());
    for (size_t pos = 0; pos < xt.size(); ++pos) {
        std::vector<double> row(static_cast<size_t>(shape_.vocab), 0.0);
        if (!vocab.is_mask(xt[pos])) {
            row[static_cast<size_t>(xt[pos])] = 1.0;  // carry-over
        } else {
            const std::vector<double> lr = log_row(xt, t, static_cast<int>(pos));
            for (size_t v = 0; v < row.size(); ++v) {
                row[v] = std::exp(lr[v]);
            }
        }
        rows[pos] = std::move(row);
    }
    return rows;
}

double logprob_x0(const Denoiser & model, const Sequence & x0, const Sequence & xt, int t, const Context &) {
    const Vocabulary vocab = model.vocabulary();
    check_clean(x0, vocab, "logprob_x0 clean sequence");
    check_consistent_pair(x0, xt, vocab);
    double total = 0.0;
    for (size_t pos = 0; pos < xt.size(); ++pos) {
        if (vocab.is_mask(xt[pos])) {
            const std::vector<double> lr = model.log_row(xt, t, static_cast<int>(pos));
            total += lr[static_cast<size_t>(x0[pos])];
        }
    }
    return total;
}

// ---------------------------------------------------------------------------
// checkpoint io

static void put_le64(std::string & out, uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
    }
}

static uint64_t get_le64(const char * p) {
    uint64_t x = 0;
    for (int i = 0; i < 8; ++i) {
        x |= static_cast<uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    }
    return x;
}

void Denoiser::save(const std::string & path) const {
    nlohmann::json header;
    header["format"] = "maskdiff-checkpoint-v1";
    header["kind"] = kind_ == DenoiserKind::tabular ? "tabular" : "neural";
    header["vocab"] = shape_.vocab;
    header["length"] = shape_.length;
    header["steps"] = shape_.steps;
    header["hidden"] = shape_.hidden;
    header["step_embed"] = shape_.step_embed;
    header["context_arity"] = shape_.context_arity;
    header["seed"] = seed_;
    header["param_count"] = params_.size();

    std::string blob = header.dump();
    blob.push_back('\n');
    for (double p : params_) {
        uint64_t bits;
        std::memcpy(&bits, &p, sizeof(bits));
        put_le64(blob, bits);
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) {
        throw validation_error("Denoiser::save: cannot open '" + path + "' for writing");
    }
    f.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!f) {
        throw validation_error("Denoiser::save: write to '" + path + "' failed");
    }
}

Denoiser Denoiser::load(const std::string & path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        throw validation_error("Denoiser::load: cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(f, line)) {
        throw validation_error("Denoiser::load: missing checkpoint header in '" + path + "'");
    }
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception & e) {
        throw validation_error("Denoiser::load: bad header in '" + path + "': " + e.what());
    }
    if (header.value("format", "") != "maskdiff-checkpoint-v1") {
        throw validation_error("Denoiser::load: '" + path + "' is not a maskdiff checkpoint");
    }

    const std::string kind = header.at("kind").get<std::string>();
    const Vocabulary vocab(header.at("vocab").get<int>());
    const int length = header.at("length").get<int>();
    const int steps = header.at("steps").get<int>();
    const uint64_t seed = header.at("seed").get<uint64_t>();

    Denoiser d;
    if (kind == "tabular") {
        d = tabular(vocab, length, steps);
    } else if (kind == "neural") {
        d = neural(vocab, length, steps, header.at("hidden").get<int>(),
                   header.at("step_embed").get<int>(), seed);
    } else {
        throw validation_error("Denoiser::load: unknown kind '" + kind + "'");
    }
    d.seed_ = seed;

    const size_t count = header.at("param_count").get<size_t>();
    if (count != d.params_.size()) {
        throw validation_error("Denoiser::load: parameter count " + std::to_string(count) +
                               " does not match the declared shape");
    }
    std::string block(count * 8, '\0');
    f.read(block.data(), static_cast<std::streamsize>(block.size()));
    if (f.gcount() != static_cast<std::streamsize>(block.size())) {
        throw validation_error("Denoiser::load: truncated parameter block in '" + path + "'");
    }
    for (size_t i = 0; i < count; ++i) {
        const uint64_t bits = get_le64(block.data() + i * 8);
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        d.params_[i] = v;
    }
    return d;
}

// ---------------------------------------------------------------------------
// taped evaluation

TapedDenoiser::TapedDenoiser(Tape & tape, const Denoiser & model) : tape_(tape), model_(model) {}

std::span<const Val> TapedDenoiser::log_row(const Sequence & xt, int t, int pos) {
    model_.check_input(xt, t);
    const DenoiserShape & s = model_.shape_;
    const int V = s.vocab;

    int64_t key;
    if (model_.kind_ == DenoiserKind::tabular) {
        const int64_t code = model_.state_code(xt);
        key = ((code * s.length) + pos) * (s.steps + 1) + t;
    } else {
        // the neural row depends only on the input token, which is MASK for
        // every masked position, so one row per step serves all positions
        key = static_cast<int64_t>(t) * (s.vocab + 2) + xt[static_cast<size_t>(pos)];
    }
    auto it = row_cache_.find(key);
    if (it != row_cache_.end()) {
        return it->second;
    }

    std::vector<Val> logits(static_cast<size_t>(V));
    if (model_.kind_ == DenoiserKind::tabular) {
        const int code = model_.state_code(xt);
        for (int v = 0; v < V; ++v) {
            const size_t idx = model_.tabular_index(code, t, pos, v);
            logits[static_cast<size_t>(v)] = tape_.param(static_cast<int>(idx), model_.params_[idx]);
        }
    } else {
        const int H = s.hidden;
        const int E = s.step_embed;
        const int in = V + 1 + E;
        const Token tok = xt[static_cast<size_t>(pos)];
        const std::vector<double> & p = model_.params_;

        std::vector<Val> embed(static_cast<size_t>(E));
        for (int e = 0; e < E; ++e) {
            const size_t idx = model_.off_embed_ + static_cast<size_t>(t - 1) * static_cast<size_t>(E) +
                               static_cast<size_t>(e);
            embed[static_cast<size_t>(e)] = tape_.param(static_cast<int>(idx), p[idx]);
        }
        std::vector<Val> h(static_cast<size_t>(H));
        for (int j = 0; j < H; ++j) {
            const size_t b1 = model_.off_b1_ + static_cast<size_t>(j);
            const size_t w_tok = model_.off_w1_ + static_cast<size_t>(j) * static_cast<size_t>(in) +
                                 static_cast<size_t>(tok);
            Val acc = tape_.add(tape_.param(static_cast<int>(b1), p[b1]),
                                tape_.param(static_cast<int>(w_tok), p[w_tok]));
            for (int e = 0; e < E; ++e) {
                const size_t w = model_.off_w1_ + static_cast<size_t>(j) * static_cast<size_t>(in) +
                                 static_cast<size_t>(V + 1 + e);
                acc = tape_.add(acc, tape_.mul(tape_.param(static_cast<int>(w), p[w]),
                                               embed[static_cast<size_t>(e)]));
            }
            h[static_cast<size_t>(j)] = tape_.tanh(acc);
        }
        for (int v = 0; v < V; ++v) {
            const size_t b2 = model_.off_b2_ + static_cast<size_t>(v);
            Val acc = tape_.param(static_cast<int>(b2), p[b2]);
            for (int j = 0; j < H; ++j) {
                const size_t w = model_.off_w2_ + static_cast<size_t>(v) * static_cast<size_t>(H) +
                                 static_cast<size_t>(j);
                acc = tape_.add(acc, tape_.mul(tape_.param(static_cast<int>(w), p[w]),
                                               h[static_cast<size_t>(j)]));
            }
            logits[static_cast<size_t>(v)] = acc;
        }
    }

    const Val lse = tape_.logsumexp(logits);
    std::vector<Val> log_probs(static_cast<size_t>(V));
    for (int v = 0; v < V; ++v) {
        log_probs[static_cast<size_t>(v)] = tape_.sub(logits[static_cast<size_t>(v)], lse);
    }
    auto inserted = row_cache_.emplace(key, std::move(log_probs));
    return inserted.first->second;
}

Val TapedDenoiser::logprob_x0(const Sequence & x0, const Sequence & xt, int t) {
    const Vocabulary vocab = model_.vocabulary();
    check_clean(x0, vocab, "logprob_x0 clean sequence");
    check_consistent_pair(x0, xt, vocab);
    Val total = tape_.constant(0.0);
    for (size_t pos = 0; pos < xt.size(); ++pos) {
        if (vocab.is_mask(xt[pos])) {
            const std::span<const Val> row = log_row(xt, t, static_cast<int>(pos));
            total = tape_.add(total, row[static_cast<size_t>(x0[pos])]);
        }
    }
    return total;
}

}  // namespace maskdiff
